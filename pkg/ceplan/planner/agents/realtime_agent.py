# -*- coding: utf-8 -*-
"""
agents/realtime_agent.py

Real-time consumption agent.
Admits foreground requests directly and background requests with a
probability that falls with the consumed share of the slot allocation
and rises with elapsed time. When a foreground app runs dry it resets
the slot bounds, reallocates the unused volume by benefit weight, and
bills whatever goes past the pre-bought volume at the real-time price.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ceplan.planner.tools.errors import (
    DimensionMismatch,
    InfeasibleRebounds,
    NoVolume,
    UndefinedAtZeroElapsed,
    ZeroAllocation,
)

logger = logging.getLogger(__name__)

SLOT_MINUTES = 60
DEFERRED_MINUTE = 1.0
REF_LOW = (0.5, 0.0, 0.05)    # consumed share, minute, probability
REF_HIGH = (0.9, 60.0, 0.95)
VOLUME_TOL = 1e-12

DECISION_COLUMNS = ["slot", "minute", "app", "kind", "volume_mb", "decision", "probability", "source"]


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class AdmissionParams:
    m1: float
    m2: float
    kappa: float = 0.0
    slot_minutes: int = SLOT_MINUTES

    def __post_init__(self):
        if not 0.0 <= self.kappa < 1.0:
            raise ValueError(f"kappa must be in [0, 1), got {self.kappa}")
        # exponent is affine in t, so checking both ends covers the slot
        for t in (0.0, float(self.slot_minutes)):
            if self.m1 * t + self.m2 <= 0:
                raise ValueError(f"admission exponent m1*t + m2 must stay positive, fails at t={t}")

    def exponent(self, t: float) -> float:
        return self.m1 * t + self.m2


@dataclass
class RequestEvent:
    minute: float
    app: int            # 1-based
    volume: float       # MB
    kind: str           # "foreground" | "background"
    slot: int = 1       # 1-based

    def __post_init__(self):
        if self.volume <= 0:
            raise ValueError(f"request volume must be positive, got {self.volume}")
        if self.kind not in ("foreground", "background"):
            raise ValueError(f"unknown request kind {self.kind!r}")

    @property
    def is_foreground(self) -> bool:
        return self.kind == "foreground"


@dataclass
class SlotState:
    slot: int
    allocated: np.ndarray
    consumed: np.ndarray = None
    elapsed_min: float = 0.0
    realtime_price: float = 0.0
    overage: np.ndarray = None
    reallocations: int = 0
    slot_minutes: int = SLOT_MINUTES

    def __post_init__(self):
        self.allocated = np.asarray(self.allocated, dtype=float).copy()
        n = self.allocated.shape[0]
        self.consumed = np.zeros(n) if self.consumed is None else np.asarray(self.consumed, dtype=float).copy()
        self.overage = np.zeros(n) if self.overage is None else np.asarray(self.overage, dtype=float).copy()
        if self.consumed.shape != (n,) or self.overage.shape != (n,):
            raise DimensionMismatch("slot state vectors must share one length")
        self.prebought = float(self.allocated.sum())

    @property
    def num_apps(self) -> int:
        return self.allocated.shape[0]

    @property
    def remaining(self) -> np.ndarray:
        return np.maximum(self.allocated - self.consumed, 0.0)

    @property
    def slot_remaining(self) -> float:
        return float(self.remaining.sum())

    def advance(self, minute: float):
        if minute < self.elapsed_min:
            raise ValueError(f"event at minute {minute} precedes elapsed {self.elapsed_min}")
        self.elapsed_min = float(minute)


@dataclass
class Decision:
    admitted: bool
    decision: str        # admit | deny | overage
    probability: float
    source: str          # allocation | reallocated | overage | none


# ============================================================================
# ADMISSION
# ============================================================================

def calibrate_admission(kappa: float = 0.0, slot_minutes: int = SLOT_MINUTES) -> AdmissionParams:
    """
    Fit m1, m2 through the two reference points:
    half the allocation used at the start of the slot admits with 0.05,
    90% used at the end admits with 0.95.
    """
    share_lo, t_lo, p_lo = REF_LOW
    share_hi, t_hi, p_hi = REF_HIGH
    m2 = math.log(p_lo) / math.log(1.0 - share_lo)
    m1 = (math.log(p_hi) / math.log(1.0 - share_hi) - m2) / (t_hi - t_lo)
    # reference times are given on a 60-minute slot
    m1 *= SLOT_MINUTES / slot_minutes
    return AdmissionParams(m1=m1, m2=m2, kappa=kappa, slot_minutes=slot_minutes)


def accept_probability(g: float, x: float, t: float, params: AdmissionParams) -> float:
    """
    rho = base ** (m1 t + m2), base = 1 - g/x, or with slack kappa
    base = min(1, 1 - (g/x - kappa) / (1 - kappa)).
    """
    if x <= 0:
        raise ZeroAllocation("no allocation to admit against")
    share = min(max(g / x, 0.0), 1.0)
    if params.kappa > 0:
        base = min(1.0, 1.0 - (share - params.kappa) / (1.0 - params.kappa))
    else:
        base = 1.0 - share
    base = max(base, 0.0)
    if base >= 1.0:
        return 1.0
    return base ** params.exponent(t)


# ============================================================================
# BOUND RESET / REALLOCATION
# ============================================================================

def reset_bounds(state: SlotState, a1: int, weights) -> tuple[np.ndarray, np.ndarray]:
    """
    New per-app bounds for the slot after app `a1` (0-based) ran out.

    Every app keeps at least its extrapolated hourly use min(60 g/t, x);
    `a1` is offered g + all slack above those floors. If the floors leave
    no slack, the lowest-weight app that still has volume drops its floor
    to what it has consumed.

    Raises:
        NoVolume: nothing left in the slot
        UndefinedAtZeroElapsed: t = 0
    """
    x, g = state.allocated, state.consumed
    omega = np.asarray(weights, dtype=float).ravel()
    if omega.shape != x.shape:
        raise DimensionMismatch(f"{omega.shape[0]} weights for {x.shape[0]} apps")
    if (x - g).clip(min=0).sum() <= VOLUME_TOL:
        raise NoVolume(f"slot {state.slot}: allocation exhausted")
    t = state.elapsed_min
    if t <= 0:
        raise UndefinedAtZeroElapsed("consumption rate 60 g / t is undefined at t = 0")

    rate = state.slot_minutes * g / t
    b_new = np.minimum(rate, x)
    B_new = x.copy()

    if (x - b_new).sum() <= VOLUME_TOL:
        candidates = [a for a in np.argsort(omega, kind="stable")
                      if a != a1 and x[a] - g[a] > VOLUME_TOL]
        if candidates:
            b_new[candidates[0]] = g[candidates[0]]

    # use past an earlier overage is already billed and does not count against the slot
    used = min(g[a1], x[a1])
    slack = float((x - b_new).sum())
    upper = max(rate[a1], used + slack)
    lower = min(rate[a1], used + slack)
    B_new[a1] = max(upper, x[a1])
    b_new[a1] = lower
    logger.debug("[REALTIME] slot %d reset for app %d: b'=%s B'=%s", state.slot, a1 + 1,
                 np.round(b_new, 6).tolist(), np.round(B_new, 6).tolist())
    return b_new, B_new


def reallocate(state: SlotState, bounds, weights, price: float | None = None) -> np.ndarray:
    """
    Redistribute the slot's allocation within the new bounds, keeping its
    total, so that sum_a omega_a x'_a is maximal.

    Fills apps in descending weight order (ties to the lower index) on
    top of the lower bounds. The slot price is the same for every app,
    so the payment side of the ratio is fixed and `price` does not
    change the result.
    """
    b_new, B_new = (np.asarray(v, dtype=float) for v in bounds)
    omega = np.asarray(weights, dtype=float).ravel()
    total = float(state.allocated.sum())
    tol = 1e-9 * max(1.0, total)
    if (b_new > B_new + tol).any() or b_new.sum() > total + tol or B_new.sum() < total - tol:
        raise InfeasibleRebounds(
            f"slot {state.slot}: need sum b'={b_new.sum():.6g} <= {total:.6g} <= sum B'={B_new.sum():.6g}")

    x_new = b_new.copy()
    left = total - x_new.sum()
    last = None
    for a in np.argsort(-omega, kind="stable"):
        if left <= 0:
            break
        add = min(B_new[a] - x_new[a], left)
        if add > 0:
            x_new[a] += add
            left -= add
            last = a
    if last is not None:
        x_new[last] += total - x_new.sum()
    return x_new


def bill_slot(state: SlotState, p_real: float) -> float:
    """Additional payment: real-time price times consumption above the pre-bought slot volume."""
    if p_real <= 0:
        raise ValueError(f"real-time price must be positive, got {p_real}")
    excess = float(state.consumed.sum()) - state.prebought
    return max(p_real * excess, 0.0)


# ============================================================================
# REQUEST HANDLING
# ============================================================================

def _consume(state: SlotState, a: int, volume: float):
    room = max(state.allocated[a] - state.consumed[a], 0.0)
    state.consumed[a] += volume
    if volume > room:
        state.overage[a] += volume - room


def handle_request(state: SlotState, ev: RequestEvent, rng, params: AdmissionParams, weights,
                   prices=None, allow_overage: bool = True) -> tuple[SlotState, Decision]:
    """
    Apply one request to the slot state.

    `weights` is the slot's N-vector of benefit weights; `prices`, when
    given, is the K-vector of real-time prices and sets the slot price.
    Background requests always draw one uniform so that runs differing
    only in parameters see the same random stream.

    A foreground request whose remaining allocation is smaller than the
    request triggers the bound reset even if the app is not yet fully
    used up; reset_bounds counts its use as min(g, x), so the new floors
    still fit in the slot total.
    """
    a = ev.app - 1
    if not 0 <= a < state.num_apps:
        raise DimensionMismatch(f"event for app {ev.app}, slot has {state.num_apps} apps")
    state.advance(ev.minute)
    if prices is not None:
        state.realtime_price = float(np.asarray(prices, dtype=float)[state.slot - 1])

    remaining = state.allocated[a] - state.consumed[a]

    if not ev.is_foreground:
        u = rng.random()
        if remaining + VOLUME_TOL < ev.volume:
            return state, Decision(False, "deny", 0.0, "none")
        try:
            rho = accept_probability(state.consumed[a], state.allocated[a], state.elapsed_min, params)
        except ZeroAllocation:
            rho = 0.0
        if u < rho:
            _consume(state, a, ev.volume)
            return state, Decision(True, "admit", rho, "allocation")
        return state, Decision(False, "deny", rho, "none")

    if remaining + VOLUME_TOL >= ev.volume:
        _consume(state, a, ev.volume)
        return state, Decision(True, "admit", 1.0, "allocation")

    if state.slot_remaining > VOLUME_TOL:
        saved = state.elapsed_min
        if state.elapsed_min <= 0:
            logger.warning("[REALTIME] slot %d: reallocation at t=0 evaluated at t=%.0f",
                           state.slot, DEFERRED_MINUTE)
            state.elapsed_min = DEFERRED_MINUTE
        bounds = reset_bounds(state, a, weights)
        state.elapsed_min = saved
        state.allocated = reallocate(state, bounds, weights, state.realtime_price)
        state.reallocations += 1
        if state.allocated[a] - state.consumed[a] + VOLUME_TOL >= ev.volume:
            _consume(state, a, ev.volume)
            return state, Decision(True, "admit", 1.0, "reallocated")

    if allow_overage:
        _consume(state, a, ev.volume)
        return state, Decision(True, "overage", 1.0, "overage")
    return state, Decision(False, "deny", 1.0, "none")


# ============================================================================
# DAY SIMULATION
# ============================================================================

@dataclass
class DayOutcome:
    consumed: np.ndarray              # K x N MB
    prebuy_payment: float
    additional_payment: float
    benefit: float
    additional_by_slot: np.ndarray
    reallocations: int = 0
    decisions: pd.DataFrame | None = field(default=None, repr=False)

    @property
    def payment(self) -> float:
        return self.prebuy_payment + self.additional_payment

    @property
    def cost_efficiency(self) -> float:
        return self.benefit / self.payment if self.payment > 0 else 0.0

    @property
    def volume(self) -> float:
        return float(self.consumed.sum())


def events_from_frame(frame: pd.DataFrame) -> list[RequestEvent]:
    return [RequestEvent(minute=float(r.minute), app=int(r.app), volume=float(r.volume_mb),
                         kind=str(r.kind), slot=int(r.slot))
            for r in frame.itertuples(index=False)]


def simulate_day(schedule_x, events: pd.DataFrame, omega, day_ahead_prices, realtime_prices,
                 params: AdmissionParams, rng, managed: bool = True, allow_overage: bool = True,
                 log_decisions: bool = False) -> DayOutcome:
    """
    Run one day of requests against a pre-bought K x N schedule.

    managed=False admits every request (the unmanaged baseline) and is
    billed by the same rule.
    """
    x = np.atleast_2d(np.asarray(schedule_x, dtype=float))
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    p = np.asarray(day_ahead_prices, dtype=float).ravel()
    p_real = np.asarray(realtime_prices, dtype=float).ravel()
    K, N = x.shape
    if omega.shape != (K, N) or p.shape != (K,) or p_real.shape != (K,):
        raise DimensionMismatch("schedule, weights and prices must agree on K x N")

    ordered = events.sort_values(["slot", "minute"], kind="mergesort")
    consumed = np.zeros((K, N))
    extra = np.zeros(K)
    reallocations = 0
    log = [] if log_decisions else None

    for k, slot_events in ordered.groupby("slot", sort=True):
        if not 1 <= k <= K:
            raise DimensionMismatch(f"event for slot {k}, cycle has {K} slots")
        state = SlotState(slot=int(k), allocated=x[k - 1], realtime_price=p_real[k - 1],
                          slot_minutes=params.slot_minutes)
        for ev in events_from_frame(slot_events):
            if managed:
                state, decision = handle_request(state, ev, rng, params, omega[k - 1],
                                                 allow_overage=allow_overage)
            else:
                state.advance(ev.minute)
                _consume(state, ev.app - 1, ev.volume)
                decision = Decision(True, "admit", 1.0, "unmanaged")
            if log is not None:
                log.append((int(k), ev.minute, ev.app, ev.kind, ev.volume, decision.decision,
                            decision.probability, decision.source))
        consumed[k - 1] = state.consumed
        extra[k - 1] = bill_slot(state, p_real[k - 1])
        reallocations += state.reallocations

    outcome = DayOutcome(
        consumed=consumed,
        prebuy_payment=float(p @ x.sum(axis=1)),
        additional_payment=float(extra.sum()),
        benefit=float((omega * consumed).sum()),
        additional_by_slot=extra,
        reallocations=reallocations,
        decisions=pd.DataFrame(log, columns=DECISION_COLUMNS) if log is not None else None,
    )
    logger.debug("[REALTIME] %s day: %.3f MB, CE %.6f", "managed" if managed else "unmanaged",
                 outcome.volume, outcome.cost_efficiency)
    return outcome
