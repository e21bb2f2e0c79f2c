# -*- coding: utf-8 -*-
"""
planner/tools/demand.py

Consumer behaviour model: access statistics, benefit valuation weights
(omega = iota_app * iota_slot) and default consumption bounds from the
latest days of history.

Matrices are K x N: one row per time slot, one column per app.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ceplan.planner.tools.errors import DimensionMismatch, EmptyHistory

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 0.1
DEFAULT_DELTA_PRIME = 0.5


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class OperationCycle:
    num_slots: int = 24
    slot_minutes: int = 60

    def __post_init__(self):
        if self.num_slots < 1:
            raise ValueError(f"an operation cycle needs at least one slot, got {self.num_slots}")


@dataclass
class AccessHistory:
    """Foreground (tau) and background (tau_bg) access counts, K x N."""

    tau: np.ndarray
    tau_bg: np.ndarray | None = None

    def __post_init__(self):
        self.tau = np.atleast_2d(np.asarray(self.tau, dtype=float))
        if self.tau_bg is not None:
            self.tau_bg = np.atleast_2d(np.asarray(self.tau_bg, dtype=float))
            if self.tau_bg.shape != self.tau.shape:
                raise DimensionMismatch(f"tau_bg {self.tau_bg.shape} != tau {self.tau.shape}")
        if (self.tau < 0).any() or (self.tau_bg is not None and (self.tau_bg < 0).any()):
            raise ValueError("access counts must be nonnegative")

    @property
    def app_totals(self) -> np.ndarray:
        return self.tau.sum(axis=0)


@dataclass
class BenefitWeights:
    omega: np.ndarray
    iota_app: np.ndarray
    iota_slot: np.ndarray
    delta: float = DEFAULT_DELTA
    delta_prime: float = DEFAULT_DELTA_PRIME

    @property
    def shape(self):
        return self.omega.shape


@dataclass
class ConsumptionBounds:
    """
    b_slot, B_slot: per slot and app (K x N)
    B_slot_total: per-slot cap over all apps (K)
    b_app, B_app: per-app demand over the cycle (N); b_app is user input
    """

    b_slot: np.ndarray
    B_slot: np.ndarray
    B_slot_total: np.ndarray
    B_app: np.ndarray
    b_app: np.ndarray | None = None

    def __post_init__(self):
        self.b_slot = np.asarray(self.b_slot, dtype=float)
        self.B_slot = np.asarray(self.B_slot, dtype=float)
        self.B_slot_total = np.asarray(self.B_slot_total, dtype=float).ravel()
        self.B_app = np.asarray(self.B_app, dtype=float).ravel()
        if self.b_app is not None:
            self.b_app = np.asarray(self.b_app, dtype=float).ravel()
        K, N = self.b_slot.shape
        if self.B_slot.shape != (K, N) or self.B_slot_total.shape != (K,) or self.B_app.shape != (N,):
            raise DimensionMismatch("consumption bounds do not share one K x N shape")
        if self.b_app is not None and self.b_app.shape != (N,):
            raise DimensionMismatch(f"b_app has {self.b_app.shape[0]} entries, expected {N}")

    @property
    def shape(self):
        return self.b_slot.shape

    def with_app_demand(self, b_app) -> "ConsumptionBounds":
        """Set b_app, clamped to [sum_k b_slot, B_app]."""
        requested = np.asarray(b_app, dtype=float).ravel()
        floor = self.b_slot.sum(axis=0)
        clamped = np.minimum(np.maximum(requested, floor), self.B_app)
        if not np.allclose(clamped, requested):
            logger.warning("[DEMAND] b_app clamped to [sum_k b_k^a, B^a]: %s -> %s",
                           np.round(requested, 4).tolist(), np.round(clamped, 4).tolist())
        return ConsumptionBounds(self.b_slot, self.B_slot, self.B_slot_total, self.B_app, clamped)

    def with_app_range(self, b_app, B_app) -> "ConsumptionBounds":
        """Replace both per-app demand bounds (B_app first, then the clamped b_app)."""
        bounds = ConsumptionBounds(self.b_slot, self.B_slot, self.B_slot_total, B_app)
        return bounds.with_app_demand(b_app)

    def resolved_b_app(self) -> np.ndarray:
        return self.b_app if self.b_app is not None else self.b_slot.sum(axis=0)


@dataclass
class TrafficProfile:
    """Allocation x of MB per slot (rows) and app (columns)."""

    x: np.ndarray

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        if (self.x < -1e-9).any():
            raise ValueError("traffic profile entries must be nonnegative")

    @property
    def shape(self):
        return self.x.shape

    @property
    def volume(self) -> float:
        return float(self.x.sum())

    @property
    def app_totals(self) -> np.ndarray:
        return self.x.sum(axis=0)

    @property
    def slot_totals(self) -> np.ndarray:
        return self.x.sum(axis=1)


# ============================================================================
# BENEFIT VALUATION
# ============================================================================

def _iota(values, floor: float) -> np.ndarray:
    """floor + (1 - floor) * (v / v_max) ** e,  e = (range^2 / 12) / population variance."""
    v = np.asarray(values, dtype=float).ravel()
    if (v < 0).any():
        raise ValueError("access counts must be nonnegative")
    v_max, v_min = v.max(), v.min()
    if v_max == 0.0:
        # never accessed: only the floor is left
        return np.full_like(v, floor)
    variance = v.var()
    if variance == 0.0:
        # every entry is the maximum
        return np.ones_like(v)
    exponent = ((v_max - v_min) ** 2 / 12.0) / variance
    return floor + (1.0 - floor) * (v / v_max) ** exponent


def iota_slot(tau_row, delta: float = DEFAULT_DELTA) -> np.ndarray:
    """Per-slot propensity of one app from its K access counts."""
    return _iota(tau_row, delta)


def iota_app(tau_totals, delta_prime: float = DEFAULT_DELTA_PRIME) -> np.ndarray:
    """Per-app propensity from the N access totals."""
    return _iota(tau_totals, delta_prime)


def benefit_weights(history: AccessHistory, delta: float = DEFAULT_DELTA,
                    delta_prime: float = DEFAULT_DELTA_PRIME) -> BenefitWeights:
    tau = history.tau
    if tau.size == 0:
        raise EmptyHistory("access history is empty")
    slot_part = np.column_stack([iota_slot(tau[:, a], delta) for a in range(tau.shape[1])])
    app_part = iota_app(history.app_totals, delta_prime)
    omega = slot_part * app_part[None, :]
    return BenefitWeights(omega=omega, iota_app=app_part, iota_slot=slot_part,
                          delta=delta, delta_prime=delta_prime)


def benefit_of(profile: TrafficProfile, w: BenefitWeights) -> float:
    """V = sum_a sum_k omega_k^a x_k^a."""
    if profile.shape != w.shape:
        raise DimensionMismatch(f"profile {profile.shape} vs weights {w.shape}")
    return float((w.omega * profile.x).sum())


# ============================================================================
# DEFAULT BOUNDS
# ============================================================================

def default_bounds(week) -> ConsumptionBounds:
    """
    Bounds from the latest days (normally 7):
    per-cell min and max, per-slot max of daily totals, per-app max of daily totals.
    b_app stays unset for the user to provide.
    """
    days = [p.x if isinstance(p, TrafficProfile) else np.atleast_2d(np.asarray(p, dtype=float))
            for p in week]
    if not days:
        raise EmptyHistory("no consumption history to derive bounds from")
    shape = days[0].shape
    for i, day in enumerate(days):
        if day.shape != shape:
            raise DimensionMismatch(f"day {i} has shape {day.shape}, expected {shape}")
    if len(days) != 7:
        logger.warning("[DEMAND] deriving bounds from %d days instead of 7", len(days))

    stack = np.stack(days)
    return ConsumptionBounds(
        b_slot=stack.min(axis=0),
        B_slot=stack.max(axis=0),
        B_slot_total=stack.sum(axis=2).max(axis=0),
        B_app=stack.sum(axis=1).max(axis=0),
    )
