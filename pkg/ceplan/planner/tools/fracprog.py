# -*- coding: utf-8 -*-
"""
planner/tools/fracprog.py

Linear programming subsolver (primal simplex, Bland's rule) and the
Bitran-Novaes solver for linear fractional programs.

Both work on the inequality form

    max  objective . x      s.t.  A x <= rhs,  x >= 0

and return vertices of the feasible polyhedron.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ceplan.planner.tools.errors import (
    DimensionMismatch,
    Infeasible,
    MaxIterationsExceeded,
    NonpositiveDenominator,
    Unbounded,
    ZeroDenominatorDirection,
)

logger = logging.getLogger(__name__)

TOL = 1e-9
MAX_LFP_ITER = 1000
MAX_PIVOTS = 100_000


# ============================================================================
# PROBLEM TYPES
# ============================================================================

def _as_system(constraint_matrix, rhs):
    A = np.atleast_2d(np.asarray(constraint_matrix, dtype=float))
    b = np.asarray(rhs, dtype=float).ravel()
    m, n = A.shape
    if m < 1 or n < 1:
        raise DimensionMismatch(f"constraint matrix must be at least 1x1, got {A.shape}")
    if b.shape[0] != m:
        raise DimensionMismatch(f"rhs has {b.shape[0]} entries, constraint matrix has {m} rows")
    return A, b


def _as_vector(values, n, name):
    v = np.asarray(values, dtype=float).ravel()
    if v.shape[0] != n:
        raise DimensionMismatch(f"{name} has {v.shape[0]} entries, expected {n}")
    return v


@dataclass
class LpProblem:
    """max objective . x  s.t.  constraint_matrix x <= rhs, x >= 0."""

    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.constraint_matrix, self.rhs = _as_system(self.constraint_matrix, self.rhs)
        self.objective = _as_vector(self.objective, self.constraint_matrix.shape[1], "objective")


@dataclass
class LfpProblem:
    """max (num_c . x + num_alpha) / (den_d . x + den_beta) over A x <= rhs, x >= 0."""

    num_c: np.ndarray
    num_alpha: float
    den_d: np.ndarray
    den_beta: float
    constraint_matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.constraint_matrix, self.rhs = _as_system(self.constraint_matrix, self.rhs)
        n = self.constraint_matrix.shape[1]
        self.num_c = _as_vector(self.num_c, n, "num_c")
        self.den_d = _as_vector(self.den_d, n, "den_d")
        self.num_alpha = float(self.num_alpha)
        self.den_beta = float(self.den_beta)

    @property
    def num_vars(self) -> int:
        return self.constraint_matrix.shape[1]

    def numerator(self, x) -> float:
        return float(self.num_c @ x + self.num_alpha)

    def denominator(self, x) -> float:
        return float(self.den_d @ x + self.den_beta)


@dataclass
class LfpSolution:
    x_opt: np.ndarray
    objective_value: float
    iterations: int
    trace: list = field(default_factory=list)
    vertices: list = field(default_factory=list)

    def trace_frame(self) -> pd.DataFrame:
        """Iteration trace as a table: iteration, objective, x_0..x_{n-1}."""
        rows = []
        for i, (value, vertex) in enumerate(zip(self.trace, self.vertices)):
            row = {"iteration": i, "objective": value}
            row.update({f"x_{j}": v for j, v in enumerate(vertex)})
            rows.append(row)
        return pd.DataFrame(rows)


# ============================================================================
# SIMPLEX
# ============================================================================

def _pivot_system(T: np.ndarray, rhs: np.ndarray, row: int, col: int):
    piv = T[row, col]
    T[row] /= piv
    rhs[row] /= piv
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    rhs -= factors * rhs[row]
    T[:, col] = 0.0
    T[row, col] = 1.0


def _run_phase(T, rhs, basis, cost, tol, budget):
    """Primal simplex iterations with Bland's rule; returns pivots used."""
    m = T.shape[0]
    pivots = 0
    while True:
        reduced = cost - cost[basis] @ T
        entering = np.flatnonzero(reduced > tol)
        if entering.size == 0:
            return pivots
        e = entering[0]
        col = T[:, e]
        positive = col > tol
        if not positive.any():
            raise Unbounded(f"objective unbounded along column {e}")
        ratios = np.full(m, np.inf)
        ratios[positive] = np.maximum(rhs[positive], 0.0) / col[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
        leave = ties[np.argmin(basis[ties])]
        _pivot_system(T, rhs, leave, e)
        basis[leave] = e
        pivots += 1
        if pivots > budget:
            raise MaxIterationsExceeded(f"simplex exceeded {budget} pivots")


def lp_solve(p: LpProblem, tol: float = TOL) -> np.ndarray:
    """
    Two-phase primal simplex with Bland's anti-cycling rule.

    Entering variable is the lowest index with positive reduced cost, the
    leaving row is the minimum ratio with ties broken by the lowest basic
    index, so ties among optimal vertices resolve deterministically.

    Raises:
        Infeasible: empty feasible set
        Unbounded: objective unbounded above
    """
    A, b, c = p.constraint_matrix, p.rhs, p.objective
    m, n = A.shape
    scale = max(1.0, float(np.abs(b).max()))

    sign = np.where(b < 0, -1.0, 1.0)
    art_rows = np.flatnonzero(b < 0)
    n_art = art_rows.size

    T = np.zeros((m, n + m + n_art))
    T[:, :n] = A * sign[:, None]
    T[np.arange(m), n + np.arange(m)] = sign
    T[art_rows, n + m + np.arange(n_art)] = 1.0
    rhs = b * sign

    basis = n + np.arange(m)
    basis[art_rows] = n + m + np.arange(n_art)

    used = 0
    if n_art:
        phase1 = np.zeros(T.shape[1])
        phase1[n + m:] = -1.0
        used += _run_phase(T, rhs, basis, phase1, tol, MAX_PIVOTS)
        residual = rhs[basis >= n + m].sum()
        if residual > tol * scale:
            raise Infeasible(f"phase 1 residual {residual:.3e} > 0, feasible set is empty")

        # drive zero-valued artificials out of the basis; drop redundant rows
        keep = np.ones(m, dtype=bool)
        for row in np.flatnonzero(basis >= n + m):
            candidates = np.flatnonzero(np.abs(T[row, :n + m]) > tol)
            if candidates.size:
                _pivot_system(T, rhs, row, candidates[0])
                basis[row] = candidates[0]
            else:
                keep[row] = False
        T, rhs, basis = T[keep][:, :n + m], rhs[keep], basis[keep]

    cost = np.concatenate([c, np.zeros(m)])
    used += _run_phase(T, rhs, basis, cost, tol, MAX_PIVOTS - used)

    x = np.zeros(n + m)
    x[basis] = rhs
    x = x[:n]
    x[np.abs(x) <= tol] = 0.0
    logger.debug("[LP] optimum %.9g after %d pivots", float(c @ x), used)
    return x


# ============================================================================
# LINEAR FRACTIONAL PROGRAMMING (Bitran-Novaes)
# ============================================================================

def lfp_gamma(p: LfpProblem) -> np.ndarray:
    """Component of the numerator direction orthogonal to the denominator direction."""
    d = p.den_d
    dd = float(d @ d)
    if dd == 0.0:
        raise ZeroDenominatorDirection("denominator direction is zero; solve the LP on num_c instead")
    return p.num_c - (float(p.num_c @ d) / dd) * d


def _ratio(p: LfpProblem, x, tol) -> float:
    den = p.denominator(x)
    if den <= tol:
        raise NonpositiveDenominator(f"denominator {den:.3e} at iterate {np.round(x, 6).tolist()}")
    return p.numerator(x) / den


def lfp_solve(p: LfpProblem, tol: float = TOL, max_iter: int = MAX_LFP_ITER) -> LfpSolution:
    """
    Global maximum of (c.x + alpha) / (d.x + beta) by vertex hopping.

    Step 1 solves the LP on gamma (c projected off d); each further step
    solves the LP on c - L(x*) d and moves to the new vertex, until two
    successive vertices agree within `tol` in every coordinate.
    """
    A, b = p.constraint_matrix, p.rhs

    if not np.any(p.den_d):
        x = lp_solve(LpProblem(p.num_c, A, b), tol=tol)
        value = _ratio(p, x, tol)
        return LfpSolution(x_opt=x, objective_value=value, iterations=0, trace=[value], vertices=[x])

    gamma = lfp_gamma(p)
    if np.allclose(gamma, 0.0, atol=tol * max(1.0, float(np.abs(p.num_c).max()))):
        # numerator parallel to denominator: any feasible vertex starts the search
        gamma = np.zeros_like(gamma)
    x_star = lp_solve(LpProblem(gamma, A, b), tol=tol)
    L = _ratio(p, x_star, tol)
    trace, vertices = [L], [x_star]
    logger.debug("[LFP] step 1 L=%.12g", L)

    for it in range(1, max_iter + 1):
        x_new = lp_solve(LpProblem(p.num_c - L * p.den_d, A, b), tol=tol)
        L_new = _ratio(p, x_new, tol)
        logger.debug("[LFP] iter %d L=%.12g", it, L_new)

        if np.all(np.abs(x_new - x_star) <= tol):
            return LfpSolution(x_opt=x_new, objective_value=L_new, iterations=it,
                               trace=trace, vertices=vertices)
        if L_new <= L + 1e-12 * max(1.0, abs(L)):
            # tied vertex on the same level set, nothing better exists
            return LfpSolution(x_opt=x_star, objective_value=L, iterations=it,
                               trace=trace, vertices=vertices)

        x_star, L = x_new, L_new
        trace.append(L)
        vertices.append(x_star)

    raise MaxIterationsExceeded(f"Bitran-Novaes did not settle within {max_iter} iterations")
