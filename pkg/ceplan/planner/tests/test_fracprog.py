import numpy as np
import pytest

from ceplan.planner.tools.errors import (
    DimensionMismatch,
    Infeasible,
    NonpositiveDenominator,
    Unbounded,
    ZeroDenominatorDirection,
)
from ceplan.planner.tools.fracprog import LfpProblem, LpProblem, lfp_gamma, lfp_solve, lp_solve

BOX2 = (np.eye(2), np.ones(2))


# ----------------------------------------------------------------------
# lp_solve
# ----------------------------------------------------------------------

def test_lp_single_variable_box():
    x = lp_solve(LpProblem([1.0], [[1.0]], [1.0]))
    assert x == pytest.approx([1.0])


def test_lp_box_corner():
    x = lp_solve(LpProblem([3.0, 1.0], *BOX2))
    assert x == pytest.approx([1.0, 1.0])
    assert 3 * x[0] + x[1] == pytest.approx(4.0)


def test_lp_contradictory_bounds_are_infeasible():
    with pytest.raises(Infeasible):
        lp_solve(LpProblem([1.0], [[1.0]], [-1.0]))


def test_lp_unbounded():
    with pytest.raises(Unbounded):
        lp_solve(LpProblem([1.0, 0.0], [[0.0, 1.0]], [1.0]))


def test_lp_greater_equal_rows_need_phase_one():
    # min 3x1 + 4x2 s.t. x1 + x2 >= 2, 2x1 + x2 >= 3
    x = lp_solve(LpProblem([-3.0, -4.0], [[-1.0, -1.0], [-2.0, -1.0]], [-2.0, -3.0]))
    assert 3 * x[0] + 4 * x[1] == pytest.approx(6.0)
    assert x == pytest.approx([2.0, 0.0])


def test_lp_degenerate_cycling_example_terminates():
    # classic cycling instance for the largest-coefficient rule
    c = [0.75, -20.0, 0.5, -6.0]
    A = [[0.25, -8.0, -1.0, 9.0],
         [0.5, -12.0, -0.5, 3.0],
         [0.0, 0.0, 1.0, 0.0]]
    x = lp_solve(LpProblem(c, A, [0.0, 0.0, 1.0]))
    assert float(np.dot(c, x)) == pytest.approx(1.25)


def test_lp_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        LpProblem([1.0, 2.0], [[1.0, 0.0]], [1.0, 2.0])


# ----------------------------------------------------------------------
# lfp_gamma
# ----------------------------------------------------------------------

@pytest.mark.parametrize("c, d, expected", [
    ((1, 0), (0, 1), (1, 0)),
    ((1, 1), (1, 1), (0, 0)),
    ((3, 1), (1, 2), (2, -1)),
])
def test_gamma(c, d, expected):
    p = LfpProblem(c, 0.0, d, 1.0, *BOX2)
    assert lfp_gamma(p) == pytest.approx(expected)


def test_gamma_zero_direction():
    with pytest.raises(ZeroDenominatorDirection):
        lfp_gamma(LfpProblem((1, 0), 0.0, (0, 0), 1.0, *BOX2))


# ----------------------------------------------------------------------
# lfp_solve
# ----------------------------------------------------------------------

def test_lfp_box_toy():
    sol = lfp_solve(LfpProblem((3, 1), 1.0, (1, 2), 2.0, *BOX2))
    assert sol.x_opt == pytest.approx([1.0, 0.0])
    assert sol.objective_value == pytest.approx(4.0 / 3.0)


def test_lfp_constant_denominator_matches_lp():
    c = (2.0, 5.0)
    A, b = [[1.0, 1.0], [1.0, 0.0]], [3.0, 2.0]
    sol = lfp_solve(LfpProblem(c, 0.0, (0.0, 0.0), 1.0, A, b))
    assert sol.x_opt == pytest.approx(lp_solve(LpProblem(c, A, b)))
    assert sol.iterations == 0


def test_lfp_proportional_numerator_is_constant():
    d = np.array([1.0, 3.0])
    sol = lfp_solve(LfpProblem(2.0 * d, 0.0, d, 0.0, [[-1.0, -1.0], [1.0, 1.0]], [-1.0, 4.0]))
    assert sol.objective_value == pytest.approx(2.0)


def test_lfp_nonpositive_denominator():
    p = LfpProblem([1.0], 0.0, [-1.0], 0.5, [[1.0]], [1.0])
    with pytest.raises(NonpositiveDenominator):
        lfp_solve(p)


def test_lfp_infeasible():
    with pytest.raises(Infeasible):
        lfp_solve(LfpProblem([1.0], 0.0, [1.0], 1.0, [[1.0], [-1.0]], [1.0, -2.0]))


def _random_problem(rng):
    n = int(rng.integers(2, 5))
    upper = rng.uniform(0.5, 5.0, n)
    A = np.vstack([np.eye(n), np.ones((1, n)), -np.ones((1, n))])
    b = np.concatenate([upper, [rng.uniform(0.3, 1.0) * upper.sum()], [-rng.uniform(0.0, 0.3) * upper.sum()]])
    return LfpProblem(num_c=rng.uniform(0.0, 2.0, n), num_alpha=rng.uniform(0.0, 1.0),
                      den_d=rng.uniform(0.1, 2.0, n), den_beta=rng.uniform(0.1, 1.0),
                      constraint_matrix=A, rhs=b)


@pytest.mark.parametrize("seed", range(200))
def test_lfp_matches_vertex_enumeration(seed, vertex_oracle, lp_oracle):
    p = _random_problem(np.random.default_rng(seed))
    sol = lfp_solve(p)

    assert sol.objective_value == pytest.approx(vertex_oracle(p), abs=1e-7)
    assert sol.objective_value == pytest.approx(lp_oracle(p), abs=1e-7)

    # feasible, monotone and short
    assert (p.constraint_matrix @ sol.x_opt <= p.rhs + 1e-9).all()
    assert (sol.x_opt >= -1e-9).all()
    assert all(b >= a - 1e-12 for a, b in zip(sol.trace, sol.trace[1:]))
    assert sol.iterations <= 50


def test_trace_frame_columns():
    sol = lfp_solve(LfpProblem((3, 1), 1.0, (1, 2), 2.0, *BOX2))
    frame = sol.trace_frame()
    assert list(frame.columns) == ["iteration", "objective", "x_0", "x_1"]
    assert frame["objective"].iloc[-1] == pytest.approx(sol.objective_value)
