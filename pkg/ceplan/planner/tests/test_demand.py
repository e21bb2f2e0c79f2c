import numpy as np
import pytest

from ceplan.flows.history import RollingHistory
from ceplan.planner.tools.demand import (
    AccessHistory,
    BenefitWeights,
    ConsumptionBounds,
    TrafficProfile,
    benefit_of,
    benefit_weights,
    default_bounds,
    iota_app,
    iota_slot,
)
from ceplan.planner.tools.errors import DimensionMismatch, EmptyHistory
from ceplan.planner.tools.workload import WorkloadDay

# population variance 1/3 equals range^2 / 12, so the exponent is exactly 1
UNIT_EXPONENT_ROW = [0.0, 2.0, 1.0, 1.0, 1.0, 1.0]


def test_iota_max_slot_is_one():
    out = iota_slot([1.0, 4.0, 2.0, 0.0], delta=0.1)
    assert out[1] == pytest.approx(1.0)


def test_iota_all_equal_is_one():
    assert iota_slot([3.0] * 5, delta=0.1) == pytest.approx(np.ones(5))


def test_iota_never_accessed_is_floor():
    assert iota_slot([0.0] * 3, delta=0.1) == pytest.approx(np.full(3, 0.1))
    assert iota_app([0.0] * 4, delta_prime=0.5) == pytest.approx(np.full(4, 0.5))


def test_iota_unit_exponent():
    assert iota_slot(UNIT_EXPONENT_ROW, delta=0.1)[2] == pytest.approx(0.55)
    assert iota_app(UNIT_EXPONENT_ROW, delta_prime=0.5)[2] == pytest.approx(0.75)


def test_iota_range_and_monotone():
    rng = np.random.default_rng(3)
    for _ in range(50):
        row = rng.poisson(4.0, size=24).astype(float)
        out = iota_slot(row, delta=0.1)
        assert (out >= 0.1 - 1e-12).all() and (out <= 1.0 + 1e-12).all()
        order = np.argsort(row, kind="stable")
        assert (np.diff(out[order]) >= -1e-12).all()


def test_iota_concavity_switch():
    # exponent < 1 when the variance is high, > 1 when it is low
    high_var = [0.0, 0.0, 0.0, 1.0, 2.0, 2.0, 2.0]
    low_var = [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0]
    assert iota_slot(high_var, 0.1)[3] > 0.55
    assert iota_slot(low_var, 0.1)[1] < 0.55


def test_benefit_weights_zero_access_app():
    tau = np.array([[1.0, 0.0], [2.0, 0.0], [3.0, 0.0]])
    w = benefit_weights(AccessHistory(tau), delta=0.1, delta_prime=0.5)
    # slot floor 0.1 times app floor 0.5
    assert w.omega[:, 1] == pytest.approx([0.05, 0.05, 0.05])
    assert w.omega == pytest.approx(w.iota_slot * w.iota_app[None, :])
    assert ((w.omega > 0) & (w.omega <= 1)).all()


def test_benefit_weights_empty_history():
    with pytest.raises(EmptyHistory):
        benefit_weights(AccessHistory(np.zeros((0, 0))))


def test_benefit_of():
    omega = np.ones((2, 2))
    w = BenefitWeights(omega=omega, iota_app=np.ones(2), iota_slot=omega)
    x = TrafficProfile([[10.0, 5.0], [20.6317, 10.0]])
    assert benefit_of(TrafficProfile(np.zeros((2, 2))), w) == 0.0
    assert benefit_of(x, w) == pytest.approx(45.6317)
    assert benefit_of(TrafficProfile(2 * x.x), w) == pytest.approx(2 * benefit_of(x, w))
    with pytest.raises(DimensionMismatch):
        benefit_of(TrafficProfile(np.ones((3, 2))), w)


# ----------------------------------------------------------------------
# default bounds
# ----------------------------------------------------------------------

def test_default_bounds_identical_days():
    x = np.array([[1.0, 2.0], [3.0, 0.5]])
    bd = default_bounds([x] * 7)
    assert bd.b_slot == pytest.approx(x)
    assert bd.B_slot == pytest.approx(x)
    assert bd.B_slot_total == pytest.approx(x.sum(axis=1))
    assert bd.B_app == pytest.approx(x.sum(axis=0))
    assert bd.b_app is None


def test_default_bounds_cell_min_max():
    days = [np.array([[float(v)]]) for v in (4, 2, 7, 1, 5, 3, 6)]
    bd = default_bounds(days)
    assert bd.b_slot[0, 0] == 1.0
    assert bd.B_slot[0, 0] == 7.0


def test_slot_cap_is_max_of_daily_totals():
    app1 = [1.0, 8.0, 2.0, 2.0, 2.0, 2.0, 2.0]
    app2 = [2.0, 1.0, 2.0, 2.0, 2.0, 2.0, 2.0]
    bd = default_bounds([np.array([[u, v]]) for u, v in zip(app1, app2)])
    assert bd.B_slot_total[0] == pytest.approx(9.0)
    assert bd.B_slot[0].sum() == pytest.approx(10.0)


def test_default_bounds_errors():
    with pytest.raises(EmptyHistory):
        default_bounds([])
    with pytest.raises(DimensionMismatch):
        default_bounds([np.ones((2, 2))] * 6 + [np.ones((2, 3))])


def test_app_demand_is_clamped():
    bd = ConsumptionBounds(b_slot=[[1.0, 0.0]], B_slot=[[5.0, 5.0]], B_slot_total=[8.0], B_app=[5.0, 4.0])
    clamped = bd.with_app_demand([0.5, 6.0])
    assert clamped.b_app == pytest.approx([1.0, 4.0])


# ----------------------------------------------------------------------
# rolling history
# ----------------------------------------------------------------------

def _day(value, shape=(2, 2)):
    return WorkloadDay(history=AccessHistory(np.full(shape, 2.0)), events=None,
                       profile=TrafficProfile(np.full(shape, float(value))))


def test_rolling_history_drops_oldest():
    history = RollingHistory([_day(v) for v in range(1, 8)])
    history.record_actuals(np.full((2, 2), 100.0))
    assert len(history) == 7
    assert history.days[0].profile.x[0, 0] == 2.0
    bd = history.bounds()
    assert bd.B_slot[0, 0] == 100.0
    assert bd.b_slot[0, 0] == 2.0


def test_rolling_history_shape_check():
    history = RollingHistory([_day(1)])
    with pytest.raises(DimensionMismatch):
        history.push(_day(1, shape=(3, 2)))


def test_rolling_history_persists(tmp_path):
    history = RollingHistory([_day(v) for v in (1, 2, 3)], max_days=3)
    path = history.save(tmp_path / "history.csv")
    restored = RollingHistory.load(path, max_days=3)
    assert [d.profile.volume for d in restored.days] == pytest.approx([4.0, 8.0, 12.0])
    assert restored.latest().history.tau == pytest.approx(np.full((2, 2), 2.0))
