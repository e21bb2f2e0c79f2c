"""
Shared fixtures: brute-force and scipy oracles for the solvers, and a
small scenario that keeps the end-to-end runs quick.
"""

import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from ceplan.planner.config.scenario import Scenario


def enumerate_vertices(A, b, tol=1e-9):
    """Every vertex of {x >= 0, A x <= b}, by solving each n-subset of tight rows."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    n = A.shape[1]
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    vertices = []
    for rows in itertools.combinations(range(G.shape[0]), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if (G @ x <= h + 1e-7).all():
            vertices.append(x)
    return vertices


def vertex_ratio_max(p):
    """max over the vertices of an LfpProblem's polytope."""
    values = [p.numerator(x) / p.denominator(x) for x in enumerate_vertices(p.constraint_matrix, p.rhs)]
    assert values, "oracle found no vertex"
    return max(values)


def charnes_cooper_max(p):
    """
    Same optimum through the linear substitution y = t x, t = 1 / (d.x + beta):
    max c.y + alpha t  s.t.  A y - rhs t <= 0, d.y + beta t = 1, y, t >= 0.
    """
    A, rhs = p.constraint_matrix, p.rhs
    n = A.shape[1]
    cost = -np.concatenate([p.num_c, [p.num_alpha]])
    A_ub = np.hstack([A, -rhs[:, None]])
    A_eq = np.concatenate([p.den_d, [p.den_beta]])[None, :]
    res = linprog(cost, A_ub=A_ub, b_ub=np.zeros(A.shape[0]), A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (n + 1), method="highs")
    assert res.status == 0, res.message
    return -res.fun


@pytest.fixture
def vertex_oracle():
    return vertex_ratio_max


@pytest.fixture
def lp_oracle():
    return charnes_cooper_max


@pytest.fixture
def small_scenario(tmp_path):
    """Six 4-hour slots, short batches; prices follow the default peak/off-peak curve."""
    return Scenario(num_slots=6, slot_minutes=240, runs=8, seed=11, output_dir=str(tmp_path / "out"))
