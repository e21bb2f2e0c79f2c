# -*- coding: utf-8 -*-
"""
planner/tasks.py

Builders for the scheduling problems the pipeline solves: the full
problem for either demand case, and the reduced problem when only a
subset of apps can be managed.
"""

import logging
from dataclasses import dataclass

import numpy as np

from ceplan.planner.agents.dayahead_agent import PriceCurve, SchedulingProblem, payment_of
from ceplan.planner.tools.demand import (
    AccessHistory,
    BenefitWeights,
    ConsumptionBounds,
    TrafficProfile,
    benefit_of,
    benefit_weights,
    default_bounds,
)
from ceplan.planner.tools.errors import DimensionMismatch, EmptyHistory

logger = logging.getLogger(__name__)

DEMAND_CASES = ("fixed", "elastic")
STRATEGIES = ("frequency", "demand")


@dataclass
class DayaheadInputs:
    """What the day-ahead stage derives from history."""

    weights: BenefitWeights
    bounds: ConsumptionBounds
    baseline: TrafficProfile
    access: AccessHistory
    prices: PriceCurve


def derive_inputs(days, prices: PriceCurve, delta: float, delta_prime: float,
                  omega_override=None) -> DayaheadInputs:
    """
    Weights from the latest day's access counts, bounds from all days,
    and the latest day's profile as the unscheduled baseline.
    """
    days = list(days)
    if not days:
        raise EmptyHistory("no history days")
    latest = days[-1]
    weights = benefit_weights(latest.history, delta, delta_prime)
    if omega_override is not None:
        omega = np.asarray(omega_override, dtype=float)
        if omega.shape != weights.shape:
            raise DimensionMismatch(f"omega override {omega.shape} vs {weights.shape}")
        weights = BenefitWeights(omega=omega, iota_app=weights.iota_app, iota_slot=weights.iota_slot,
                                 delta=delta, delta_prime=delta_prime)
        logger.info("[TASKS] benefit weights overridden from the scenario")
    bounds = default_bounds([d.profile for d in days])
    return DayaheadInputs(weights=weights, bounds=bounds, baseline=latest.profile,
                          access=latest.history, prices=prices)


def build_problem(inputs: DayaheadInputs, case: str = "elastic", margin: float = 0.1,
                  b_app=None, strict_paper_matrix: bool = False) -> SchedulingProblem:
    """
    fixed:   b^a = B^a = x^a of the baseline
    elastic: b^a = (1 - margin) x^a, B^a = (1 + margin) x^a
    An explicit b_app replaces the lower end. b^a is clamped to
    [sum_k b_k^a, B^a], so the baseline stays feasible.
    """
    if case not in DEMAND_CASES:
        raise ValueError(f"demand case must be one of {DEMAND_CASES}, got {case!r}")
    x_app = inputs.baseline.app_totals
    if case == "fixed":
        lower, upper = x_app, x_app
    else:
        lower, upper = (1.0 - margin) * x_app, (1.0 + margin) * x_app
    if b_app is not None:
        lower = np.asarray(b_app, dtype=float)
    bounds = inputs.bounds.with_app_range(lower, upper)
    return SchedulingProblem(inputs.weights, inputs.prices, bounds,
                             strict_paper_matrix=strict_paper_matrix)


# ============================================================================
# LIMITED MANAGEMENT
# ============================================================================

def select_apps(inputs: DayaheadInputs, max_apps: int, strategy: str) -> list[int]:
    """
    Indices (0-based, ascending) of the apps kept under management.

    frequency: drop the apps with the fewest foreground accesses
    demand:    drop the apps with the least baseline volume
    Ties keep the lower index.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    N = inputs.baseline.shape[1]
    if not 1 <= max_apps <= N:
        raise ValueError(f"max_apps must be in 1..{N}, got {max_apps}")
    score = inputs.access.app_totals if strategy == "frequency" else inputs.baseline.app_totals
    order = np.lexsort((np.arange(N), -score))
    return sorted(int(a) for a in order[:max_apps])


def build_subset_problem(problem: SchedulingProblem, baseline: TrafficProfile, keep) -> SchedulingProblem:
    """
    The problem restricted to `keep`; the other apps consume their
    baseline, which enters as fixed benefit and payment and uses up part
    of each slot cap.
    """
    keep = sorted(keep)
    N = baseline.shape[1]
    drop = [a for a in range(N) if a not in keep]
    w, bd = problem.weights, problem.bounds

    passthrough = TrafficProfile(np.where(np.isin(np.arange(N), drop)[None, :], baseline.x, 0.0))
    sub_weights = BenefitWeights(omega=w.omega[:, keep], iota_app=w.iota_app[keep],
                                 iota_slot=w.iota_slot[:, keep], delta=w.delta, delta_prime=w.delta_prime)
    sub_bounds = ConsumptionBounds(
        b_slot=bd.b_slot[:, keep],
        B_slot=bd.B_slot[:, keep],
        B_slot_total=bd.B_slot_total - passthrough.slot_totals,
        B_app=bd.B_app[keep],
        b_app=bd.resolved_b_app()[keep],
    )
    return SchedulingProblem(
        sub_weights, problem.prices, sub_bounds,
        benefit_offset=problem.benefit_offset + benefit_of(passthrough, w),
        payment_offset=problem.payment_offset + payment_of(passthrough, problem.prices),
        strict_paper_matrix=problem.strict_paper_matrix,
    )


def combine_profile(subset_x, baseline: TrafficProfile, keep) -> TrafficProfile:
    """Scheduled columns for `keep`, baseline columns for the rest."""
    x = baseline.x.copy()
    x[:, sorted(keep)] = np.asarray(subset_x, dtype=float)
    return TrafficProfile(x)
