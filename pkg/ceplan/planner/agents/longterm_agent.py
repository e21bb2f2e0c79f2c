# -*- coding: utf-8 -*-
"""
agents/longterm_agent.py

Long-term agent for bundle (usage-based) plans: monthly cost and cost
efficiency, the running estimate of the month's volume, and guidance on
how much to use for the rest of the month.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ceplan.planner.tools.errors import DegeneratePlan, MissingDays, ZeroVolume

logger = logging.getLogger(__name__)

DAYS_PER_MONTH = 30
MB_PER_GB = 1024
# $0.27 per 10 KB with 1 MB = 1024 KB
OVERAGE_PER_MB = 0.27 / 10 * 1024


@dataclass(frozen=True)
class BundlePlan:
    name: str
    base_cost: float          # $
    cap_mb: float
    overage_per_mb: float = OVERAGE_PER_MB

    def __post_init__(self):
        if self.base_cost <= 0 or self.cap_mb <= 0 or self.overage_per_mb <= 0:
            raise ValueError(f"plan {self.name!r}: base cost, cap and overage price must be positive")


PLAN_PRESETS = {
    "200MB": BundlePlan("200MB", base_cost=10.0, cap_mb=200.0),
    "500MB": BundlePlan("500MB", base_cost=15.0, cap_mb=500.0),
    "1GB": BundlePlan("1GB", base_cost=20.0, cap_mb=1.0 * MB_PER_GB),
}


def get_plan(name: str) -> BundlePlan:
    try:
        return PLAN_PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown plan preset {name!r}; choose from {sorted(PLAN_PRESETS)}") from None


@dataclass
class DailyLedger:
    """Daily volumes chi_1..chi_d of the current month (MB)."""

    chi: np.ndarray = field(default_factory=lambda: np.zeros(0))
    omega_bar: float = 1.0

    def __post_init__(self):
        self.chi = np.asarray(self.chi, dtype=float).ravel()
        if self.chi.size > DAYS_PER_MONTH:
            raise ValueError(f"ledger holds {self.chi.size} days, a month has {DAYS_PER_MONTH}")
        if (self.chi < 0).any():
            raise ValueError("daily volumes must be nonnegative")
        if self.omega_bar <= 0:
            raise ValueError(f"omega_bar must be positive, got {self.omega_bar}")

    @property
    def days(self) -> int:
        return self.chi.size

    def consumed(self, d: int | None = None) -> float:
        d = self.days if d is None else d
        return float(self.chi[:d].sum())


# ============================================================================
# COST / CE
# ============================================================================

def monthly_cost(x: float, plan: BundlePlan) -> float:
    """Base cost up to the cap (inclusive), linear overage beyond it."""
    if x < 0:
        raise ValueError(f"monthly volume must be nonnegative, got {x}")
    if x <= plan.cap_mb:
        return plan.base_cost
    return plan.base_cost + plan.overage_per_mb * (x - plan.cap_mb)


def monthly_ce(x: float, plan: BundlePlan, omega_bar: float = 1.0) -> float:
    if x <= 0:
        raise ZeroVolume("monthly cost efficiency needs a positive volume")
    return omega_bar * x / monthly_cost(x, plan)


def peak_volume(plan: BundlePlan) -> float:
    """Volume at which monthly CE peaks: the cap, unless overage is too cheap for a peak."""
    if plan.base_cost >= plan.overage_per_mb * plan.cap_mb:
        raise DegeneratePlan(
            f"plan {plan.name!r}: base cost {plan.base_cost} >= overage cost of the cap "
            f"{plan.overage_per_mb * plan.cap_mb:.6g}; CE keeps rising past the cap")
    return plan.cap_mb


# ============================================================================
# MONTHLY ESTIMATE
# ============================================================================

def estimate_volume(ledger: DailyLedger, d: int) -> float:
    """chi_bar(d) = 30 / d * sum of the first d days."""
    if not 1 <= d <= DAYS_PER_MONTH:
        raise MissingDays(f"day must be in 1..{DAYS_PER_MONTH}, got {d}")
    if d > ledger.days:
        raise MissingDays(f"estimate after day {d} needs {d} ledger entries, have {ledger.days}")
    return DAYS_PER_MONTH / d * ledger.consumed(d)


def estimate_month(ledger: DailyLedger, d: int, plan: BundlePlan) -> float:
    return monthly_ce(estimate_volume(ledger, d), plan, ledger.omega_bar)


def remaining_budget(ledger: DailyLedger, plan: BundlePlan) -> float:
    """Daily volume for the rest of the month that lands the total on the cap."""
    d = ledger.days
    if d >= DAYS_PER_MONTH:
        return 0.0
    return max(plan.cap_mb - ledger.consumed(), 0.0) / (DAYS_PER_MONTH - d)


def next_day_choices(ledger: DailyLedger, plan: BundlePlan, spread: float = 0.5) -> dict:
    """
    Estimated CE after tomorrow for three choices: the average day so far,
    `spread` less than that, and `spread` more.
    """
    if ledger.days == 0:
        raise MissingDays("no ledger days to average")
    if ledger.days >= DAYS_PER_MONTH:
        raise MissingDays("the month is complete")
    average = ledger.consumed() / ledger.days
    choices = {"average": average, "less": average * (1 - spread), "more": average * (1 + spread)}
    out = {}
    for label, volume in choices.items():
        extended = DailyLedger(np.append(ledger.chi, volume), ledger.omega_bar)
        out[label] = {"volume_mb": volume,
                      "estimated_ce": estimate_month(extended, extended.days, plan)}
    return out


# ============================================================================
# TABLES
# ============================================================================

def ce_curves(plans, max_volume: float | None = None, step: float = 1.0,
              omega_bar: float = 1.0) -> pd.DataFrame:
    """CE against monthly volume, one column per plan."""
    plans = list(plans)
    if max_volume is None:
        max_volume = 1.5 * max(p.cap_mb for p in plans)
    volumes = np.arange(step, max_volume + step / 2, step)
    frame = pd.DataFrame({"volume_mb": volumes})
    for plan in plans:
        frame[f"ce_{plan.name}"] = [monthly_ce(v, plan, omega_bar) for v in volumes]
    return frame


def estimate_series(ledger: DailyLedger, plan: BundlePlan) -> pd.DataFrame:
    rows = []
    for d in range(1, ledger.days + 1):
        volume = estimate_volume(ledger, d)
        rows.append({
            "day": d,
            "consumed_mb": ledger.consumed(d),
            "estimated_mb": volume,
            "estimated_ce": monthly_ce(volume, plan, ledger.omega_bar) if volume > 0 else 0.0,
        })
    return pd.DataFrame(rows, columns=["day", "consumed_mb", "estimated_mb", "estimated_ce"])
