import math

import numpy as np
import pandas as pd
import pytest
from scipy.optimize import linprog

from ceplan.planner.agents.realtime_agent import (
    RequestEvent,
    SlotState,
    accept_probability,
    bill_slot,
    calibrate_admission,
    handle_request,
    reallocate,
    reset_bounds,
    simulate_day,
)
from ceplan.planner.tools.demand import OperationCycle, benefit_weights
from ceplan.planner.tools.errors import (
    InfeasibleRebounds,
    NoVolume,
    UndefinedAtZeroElapsed,
    ZeroAllocation,
)
from ceplan.planner.tools.workload import default_app_specs, generate_week

PARAMS = calibrate_admission()


class _FixedDraw:
    """Stands in for a Generator; every uniform draw returns `value`."""

    def __init__(self, value):
        self.value = value

    def random(self):
        return self.value


# ----------------------------------------------------------------------
# admission probability
# ----------------------------------------------------------------------

def test_calibration_constants():
    assert PARAMS.m2 == pytest.approx(4.321928, abs=1e-6)
    assert PARAMS.m1 * 60 + PARAMS.m2 == pytest.approx(math.log(0.95) / math.log(0.1), abs=1e-12)
    assert PARAMS.m1 == pytest.approx(-0.07166, abs=1e-5)


def test_reference_points():
    assert accept_probability(5.0, 10.0, 0.0, PARAMS) == pytest.approx(0.05, abs=1e-12)
    assert accept_probability(9.0, 10.0, 60.0, PARAMS) == pytest.approx(0.95, abs=1e-12)


def test_probability_boundaries():
    assert accept_probability(0.0, 3.0, 17.0, PARAMS) == 1.0
    assert accept_probability(3.0, 3.0, 17.0, PARAMS) == 0.0
    slack = calibrate_admission(kappa=0.5)
    assert accept_probability(4.0, 10.0, 10.0, slack) == 1.0
    with pytest.raises(ZeroAllocation):
        accept_probability(0.0, 0.0, 10.0, PARAMS)


def test_probability_monotone_on_grid():
    shares = np.linspace(0.0, 1.0, 21)
    minutes = np.linspace(0.0, 60.0, 13)
    for params in (PARAMS, calibrate_admission(kappa=0.3)):
        grid = np.array([[accept_probability(s * 8.0, 8.0, t, params) for t in minutes] for s in shares])
        assert (np.diff(grid, axis=0) <= 1e-15).all()
        assert (np.diff(grid, axis=1) >= -1e-15).all()


def test_slack_never_lowers_probability():
    slack = calibrate_admission(kappa=0.5)
    for share in np.linspace(0.0, 1.0, 11):
        assert accept_probability(share, 1.0, 30.0, slack) >= accept_probability(share, 1.0, 30.0, PARAMS)


def test_shorter_slots_keep_reference_points():
    params = calibrate_admission(slot_minutes=15)
    assert accept_probability(9.0, 10.0, 15.0, params) == pytest.approx(0.95, abs=1e-12)


# ----------------------------------------------------------------------
# bound reset / reallocation
# ----------------------------------------------------------------------

def _state(x, g, t):
    return SlotState(slot=1, allocated=np.array(x, dtype=float), consumed=np.array(g, dtype=float), elapsed_min=t)


def test_reset_bounds_trace():
    state = _state([10, 20, 30], [10, 5, 15], 30.0)
    b_new, B_new = reset_bounds(state, 0, [0.9, 0.5, 0.2])
    assert b_new == pytest.approx([20.0, 10.0, 30.0])
    assert B_new == pytest.approx([20.0, 20.0, 30.0])

    x_new = reallocate(state, (b_new, B_new), [0.9, 0.5, 0.2])
    assert x_new == pytest.approx([20.0, 10.0, 30.0])
    assert x_new.sum() == pytest.approx(60.0)


def test_reset_bounds_relaxes_lowest_weight_app():
    # every app is on pace to use its allocation, so the floors leave no slack
    state = _state([10, 20, 30], [10, 10, 20], 30.0)
    b_new, B_new = reset_bounds(state, 0, [0.9, 0.5, 0.2])
    assert b_new[2] == pytest.approx(20.0)
    assert b_new[1] == pytest.approx(20.0)
    assert (b_new[0], B_new[0]) == pytest.approx((20.0, 20.0))
    assert reallocate(state, (b_new, B_new), [0.9, 0.5, 0.2]) == pytest.approx([20.0, 20.0, 20.0])


def test_reset_bounds_guards():
    with pytest.raises(NoVolume):
        reset_bounds(_state([5, 5], [5, 5], 30.0), 0, [1.0, 1.0])
    with pytest.raises(UndefinedAtZeroElapsed):
        reset_bounds(_state([5, 5], [5, 0], 0.0), 0, [1.0, 1.0])


def test_reallocate_equal_weights_goes_to_lowest_index():
    state = _state([4, 4, 4], [0, 0, 0], 10.0)
    x_new = reallocate(state, ([1.0, 1.0, 1.0], [10.0, 10.0, 10.0]), [0.5, 0.5, 0.5])
    assert x_new == pytest.approx([10.0, 1.0, 1.0])


def test_reallocate_single_app():
    state = _state([7.5], [7.5], 20.0)
    assert reallocate(state, ([0.0], [100.0]), [0.3]) == pytest.approx([7.5])


def test_reallocate_infeasible_bounds():
    state = _state([4, 4], [0, 0], 10.0)
    with pytest.raises(InfeasibleRebounds):
        reallocate(state, ([5.0, 5.0], [6.0, 6.0]), [1.0, 1.0])


@pytest.mark.parametrize("seed", range(20))
def test_greedy_matches_linear_program(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    x = rng.uniform(0.0, 10.0, n)
    lower = x * rng.uniform(0.0, 1.0, n)
    upper = x + rng.uniform(0.0, 10.0, n)
    omega = rng.uniform(0.1, 1.0, n)
    state = _state(x, np.zeros(n), 30.0)

    x_new = reallocate(state, (lower, upper), omega)
    res = linprog(-omega, A_eq=np.ones((1, n)), b_eq=[x.sum()], bounds=list(zip(lower, upper)), method="highs")
    assert res.status == 0
    assert float(omega @ x_new) == pytest.approx(-res.fun, abs=1e-9)
    assert x_new.sum() == pytest.approx(x.sum(), abs=1e-12)
    assert (x_new >= lower - 1e-12).all() and (x_new <= upper + 1e-12).all()


def test_random_reset_then_reallocate_traces():
    rng = np.random.default_rng(17)
    checked = 0
    for _ in range(500):
        n = int(rng.integers(2, 6))
        x = rng.uniform(0.5, 10.0, n)
        g = x * rng.uniform(0.0, 1.0, n)
        a1 = int(rng.integers(n))
        g[a1] = x[a1]
        omega = rng.uniform(0.1, 1.0, n)
        state = _state(x, g, float(rng.uniform(1.0, 60.0)))
        try:
            b_new, B_new = reset_bounds(state, a1, omega)
        except NoVolume:
            continue
        others = np.arange(n) != a1
        assert (b_new[others] <= x[others] + 1e-12).all()
        assert B_new[a1] >= x[a1]

        x_new = reallocate(state, (b_new, B_new), omega)
        assert x_new.sum() == pytest.approx(x.sum(), abs=1e-9)
        assert (x_new >= b_new - 1e-9).all() and (x_new <= B_new + 1e-9).all()
        res = linprog(-omega, A_eq=np.ones((1, n)), b_eq=[x.sum()], bounds=list(zip(b_new, B_new)),
                      method="highs")
        assert res.status == 0
        assert float(omega @ x_new) == pytest.approx(-res.fun, abs=1e-8)
        checked += 1
    assert checked > 400


# ----------------------------------------------------------------------
# billing
# ----------------------------------------------------------------------

def test_bill_slot():
    state = _state([5, 5], [4, 5], 60.0)
    assert bill_slot(state, 1.1) == 0.0
    state = _state([5, 5], [6, 6], 60.0)
    assert bill_slot(state, 1.1) == pytest.approx(2.2)


# ----------------------------------------------------------------------
# request handling
# ----------------------------------------------------------------------

def test_background_request_without_allocation_is_denied():
    state = _state([2, 2], [2, 0], 10.0)
    state, decision = handle_request(state, RequestEvent(12.0, 1, 0.1, "background"), _FixedDraw(0.0), PARAMS,
                                     [1.0, 1.0])
    assert not decision.admitted
    assert state.consumed[0] == 2.0


def test_background_request_follows_probability():
    state = _state([10, 10], [5, 0], 0.0)
    # probability 0.05 at half use, t = 0
    _, low = handle_request(_state([10, 10], [5, 0], 0.0), RequestEvent(0.0, 1, 0.1, "background"),
                            _FixedDraw(0.04), PARAMS, [1.0, 1.0])
    _, high = handle_request(state, RequestEvent(0.0, 1, 0.1, "background"), _FixedDraw(0.06), PARAMS,
                             [1.0, 1.0])
    assert low.admitted and low.probability == pytest.approx(0.05)
    assert not high.admitted


def test_foreground_request_is_admitted():
    state = _state([2, 2], [0.5, 0], 10.0)
    state, decision = handle_request(state, RequestEvent(11.0, 1, 1.0, "foreground"), _FixedDraw(0.99), PARAMS,
                                     [1.0, 1.0])
    assert decision.admitted and decision.source == "allocation"
    assert state.consumed[0] == pytest.approx(1.5)


def test_exhausted_foreground_app_is_reallocated():
    # app 2 is on pace for 4 of its 20 MB, leaving 16 MB to move
    state = _state([10, 20], [10, 2], 30.0)
    state, decision = handle_request(state, RequestEvent(30.0, 1, 2.0, "foreground"), _FixedDraw(0.5), PARAMS,
                                     [0.9, 0.4])
    assert decision.decision == "admit" and decision.source == "reallocated"
    assert state.reallocations == 1
    assert state.allocated.sum() == pytest.approx(30.0)
    assert state.allocated == pytest.approx([26.0, 4.0])
    assert state.overage.sum() == 0.0
    assert bill_slot(state, 1.0) == 0.0


def test_short_foreground_app_is_reallocated_before_it_runs_dry():
    # app 1 still has 1 MB of its 10, the request needs 2
    state = _state([10, 20], [9, 2], 30.0)
    state, decision = handle_request(state, RequestEvent(30.0, 1, 2.0, "foreground"), _FixedDraw(0.5), PARAMS,
                                     [0.9, 0.4])
    assert decision.decision == "admit" and decision.source == "reallocated"
    assert state.allocated == pytest.approx([25.0, 5.0])
    assert state.consumed == pytest.approx([11.0, 2.0])
    assert state.overage.sum() == 0.0


def test_no_slot_volume_goes_to_overage():
    state = _state([2, 2], [2, 2], 30.0)
    state, decision = handle_request(state, RequestEvent(40.0, 2, 1.0, "foreground"), _FixedDraw(0.5), PARAMS,
                                     [1.0, 1.0])
    assert decision.decision == "overage"
    assert state.overage[1] == pytest.approx(1.0)
    assert bill_slot(state, 1.1) == pytest.approx(1.1)

    state = _state([2, 2], [2, 2], 30.0)
    _, decision = handle_request(state, RequestEvent(40.0, 2, 1.0, "foreground"), _FixedDraw(0.5), PARAMS,
                                 [1.0, 1.0], allow_overage=False)
    assert not decision.admitted


def test_reallocation_at_slot_start_is_deferred():
    state = _state([0.0, 5.0], [0.0, 0.0], 0.0)
    state, decision = handle_request(state, RequestEvent(0.0, 1, 1.0, "foreground"), _FixedDraw(0.5), PARAMS,
                                     [0.9, 0.1])
    assert decision.source == "reallocated"
    assert state.elapsed_min == 0.0


# ----------------------------------------------------------------------
# day simulation
# ----------------------------------------------------------------------

def _events():
    return pd.DataFrame({
        "slot": [1, 1, 1, 2, 2],
        "minute": [5.0, 20.0, 40.0, 10.0, 50.0],
        "app": [1, 2, 1, 2, 2],
        "kind": ["foreground", "background", "foreground", "background", "foreground"],
        "volume_mb": [1.0, 0.5, 2.5, 0.2, 3.0],
    })


def test_unmanaged_day_consumes_everything():
    x = np.array([[2.0, 1.0], [1.0, 1.0]])
    out = simulate_day(x, _events(), np.ones((2, 2)), [1.0, 1.0], [1.05, 1.1], PARAMS,
                       np.random.default_rng(0), managed=False)
    assert out.volume == pytest.approx(7.2)
    assert out.prebuy_payment == pytest.approx(5.0)
    # slot 1: 4.0 used of 3.0; slot 2: 3.2 of 2.0
    assert out.additional_payment == pytest.approx(1.05 * 1.0 + 1.1 * 1.2)
    assert out.cost_efficiency == pytest.approx(out.benefit / out.payment)


def test_managed_day_is_seeded_and_logged():
    x = np.array([[2.0, 1.0], [1.0, 1.0]])
    runs = [simulate_day(x, _events(), np.ones((2, 2)), [1.0, 1.0], [1.05, 1.1], PARAMS,
                         np.random.default_rng(4), log_decisions=True) for _ in range(2)]
    assert runs[0].volume == runs[1].volume
    pd.testing.assert_frame_equal(runs[0].decisions, runs[1].decisions)
    assert len(runs[0].decisions) == 5
    # foreground requests are never denied while overage is allowed
    fg = runs[0].decisions[runs[0].decisions["kind"] == "foreground"]
    assert (fg["decision"] != "deny").all()


@pytest.mark.parametrize("seed", range(10))
def test_day_without_overage_never_exceeds_prebought(seed):
    cycle = OperationCycle(num_slots=24, slot_minutes=60)
    week = generate_week(default_app_specs(), cycle, seed)
    # half of a past day's traffic, so most slots run short
    x = 0.5 * week[0].profile.x
    omega = benefit_weights(week[-1].history).omega
    prices = np.full(24, 1.0)
    out = simulate_day(x, week[-1].events, omega, prices, 1.05 * prices, PARAMS,
                       np.random.default_rng(seed), allow_overage=False)
    assert (out.consumed.sum(axis=1) <= x.sum(axis=1) + 1e-9).all()
    assert out.additional_payment == 0.0
