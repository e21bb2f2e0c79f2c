# -*- coding: utf-8 -*-
"""
agents/dayahead_agent.py

Day-ahead pre-scheduling agent.
Builds the cost-efficiency LFP over a K x N traffic profile, shifts it to
standard form, solves it, and provides the profit-maximization baseline.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ceplan.planner.tools.demand import (
    BenefitWeights,
    ConsumptionBounds,
    TrafficProfile,
    benefit_of,
)
from ceplan.planner.tools.errors import DimensionMismatch, InfeasibleBounds, ZeroVolume
from ceplan.planner.tools.fracprog import (
    MAX_LFP_ITER,
    TOL,
    LfpProblem,
    LfpSolution,
    LpProblem,
    lfp_solve,
    lp_solve,
)

logger = logging.getLogger(__name__)

DEFAULT_ETA = 0.2
FEASIBILITY_TOL = 1e-9


# ============================================================================
# TYPES
# ============================================================================

@dataclass
class PriceCurve:
    """Day-ahead unit prices, cents per MB, one per slot."""

    p: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float).ravel()
        if self.p.size == 0 or (self.p <= 0).any():
            raise ValueError("day-ahead prices must be positive")

    @property
    def num_slots(self) -> int:
        return self.p.shape[0]


@dataclass
class SchedulingProblem:
    """
    Benefit weights, prices and bounds of one day-ahead scheduling problem.

    benefit_offset / payment_offset are fixed contributions of traffic
    outside the scheduled apps, so the ratio optimized is that of the
    whole profile. strict_paper_matrix drops the per-app upper-bound rows.
    """

    weights: BenefitWeights
    prices: PriceCurve
    bounds: ConsumptionBounds
    benefit_offset: float = 0.0
    payment_offset: float = 0.0
    strict_paper_matrix: bool = False

    def __post_init__(self):
        K, N = self.bounds.shape
        if self.weights.shape != (K, N):
            raise DimensionMismatch(f"weights {self.weights.shape} vs bounds {(K, N)}")
        if self.prices.num_slots != K:
            raise DimensionMismatch(f"{self.prices.num_slots} prices for {K} slots")
        self.check_feasible()

    @property
    def shape(self):
        return self.bounds.shape

    def check_feasible(self):
        """Raise InfeasibleBounds naming the first violated constraint."""
        bd, tol = self.bounds, FEASIBILITY_TOL
        b_app = bd.resolved_b_app()

        bad = np.argwhere(bd.b_slot > bd.B_slot + tol)
        if bad.size:
            k, a = bad[0]
            raise InfeasibleBounds(
                f"slot {k + 1} app {a + 1}: b={bd.b_slot[k, a]:.6g} > B={bd.B_slot[k, a]:.6g}")
        if (bd.b_slot < -tol).any():
            raise InfeasibleBounds("negative basic demand b_k^a")

        slot_floor = bd.b_slot.sum(axis=1)
        for k in np.flatnonzero(slot_floor > bd.B_slot_total + tol):
            raise InfeasibleBounds(
                f"slot {k + 1}: sum_a b_k^a={slot_floor[k]:.6g} > B_k={bd.B_slot_total[k]:.6g}")

        app_floor = bd.b_slot.sum(axis=0)
        for a in np.flatnonzero(app_floor > b_app + tol):
            raise InfeasibleBounds(
                f"app {a + 1}: sum_k b_k^a={app_floor[a]:.6g} > b^a={b_app[a]:.6g}")
        for a in np.flatnonzero(b_app > bd.B_app + tol):
            raise InfeasibleBounds(f"app {a + 1}: b^a={b_app[a]:.6g} > B^a={bd.B_app[a]:.6g}")
        app_reach = bd.B_slot.sum(axis=0)
        for a in np.flatnonzero(b_app > app_reach + tol):
            raise InfeasibleBounds(
                f"app {a + 1}: b^a={b_app[a]:.6g} > sum_k B_k^a={app_reach[a]:.6g}")


@dataclass
class StandardFormOffsets:
    """Shift X* = X - b and the constant terms it adds to the ratio."""

    b_slot: np.ndarray
    alpha: float
    beta: float
    row_groups: dict = field(default_factory=dict)

    def restore(self, x_shifted) -> TrafficProfile:
        K, N = self.b_slot.shape
        x = np.asarray(x_shifted, dtype=float).reshape(K, N) + self.b_slot
        return TrafficProfile(np.maximum(x, 0.0))


@dataclass
class ScheduledProfile:
    """
    A profile with its benefit V, payment C (cents) and CE = V / C.

    benefit and payment include the problem's fixed offsets.
    """

    profile: TrafficProfile
    benefit: float
    payment: float
    cost_efficiency: float
    iterations: int = 0
    solution: LfpSolution | None = None

    @property
    def volume(self) -> float:
        return self.profile.volume


# ============================================================================
# PRICING / EVALUATION
# ============================================================================

def payment_of(profile: TrafficProfile, prices: PriceCurve) -> float:
    """C = sum_k p_k * sum_a x_k^a."""
    if profile.shape[0] != prices.num_slots:
        raise DimensionMismatch(f"profile has {profile.shape[0]} slots, prices {prices.num_slots}")
    return float(prices.p @ profile.slot_totals)


def evaluate_profile(profile: TrafficProfile, weights: BenefitWeights, prices: PriceCurve,
                     benefit_offset: float = 0.0, payment_offset: float = 0.0,
                     iterations: int = 0, solution: LfpSolution | None = None) -> ScheduledProfile:
    benefit = benefit_of(profile, weights) + benefit_offset
    payment = payment_of(profile, prices) + payment_offset
    if payment <= 0:
        raise ZeroVolume("profile has no paid volume; cost efficiency is undefined")
    return ScheduledProfile(profile=profile, benefit=benefit, payment=payment,
                            cost_efficiency=benefit / payment, iterations=iterations,
                            solution=solution)


# ============================================================================
# STANDARD FORM
# ============================================================================

def to_standard_form(sp: SchedulingProblem) -> tuple[LfpProblem, StandardFormOffsets]:
    """
    Variables are the K*N shifted volumes, slot-major (index k*N + a).

    Row groups, in order:
      upper   K*N rows   x*_k^a <= B_k^a - b_k^a
      demand  N rows     -sum_k x*_k^a <= sum_k b_k^a - b^a
      slot    K rows     sum_a x*_k^a <= B_k - sum_a b_k^a
      app_cap N rows     sum_k x*_k^a <= B^a - sum_k b_k^a   (omitted when strict)
    """
    sp.check_feasible()
    bd = sp.bounds
    K, N = bd.shape
    n = K * N
    b = bd.b_slot
    b_app = bd.resolved_b_app()

    # gather matrices: per-app sum over slots, per-slot sum over apps
    by_app = np.tile(np.eye(N), K)
    by_slot = np.kron(np.eye(K), np.ones((1, N)))

    blocks = [np.eye(n), -by_app, by_slot]
    rhs = [(bd.B_slot - b).ravel(), b.sum(axis=0) - b_app, bd.B_slot_total - b.sum(axis=1)]
    groups = {"upper": (0, n), "demand": (n, n + N), "slot": (n + N, n + N + K)}
    if not sp.strict_paper_matrix:
        blocks.append(by_app)
        rhs.append(bd.B_app - b.sum(axis=0))
        groups["app_cap"] = (n + N + K, n + 2 * N + K)

    omega = sp.weights.omega
    prices = np.repeat(sp.prices.p, N)
    offsets = StandardFormOffsets(
        b_slot=b.copy(),
        alpha=float((omega * b).sum()) + sp.benefit_offset,
        beta=float(prices @ b.ravel()) + sp.payment_offset,
        row_groups=groups,
    )
    problem = LfpProblem(
        num_c=omega.ravel(),
        num_alpha=offsets.alpha,
        den_d=prices,
        den_beta=offsets.beta,
        constraint_matrix=np.vstack(blocks),
        rhs=np.concatenate(rhs),
    )
    return problem, offsets


# ============================================================================
# SCHEDULERS
# ============================================================================

def schedule(sp: SchedulingProblem, tol: float = TOL, max_iter: int = MAX_LFP_ITER) -> ScheduledProfile:
    """Cost-efficiency-optimal profile over the problem's feasible set."""
    problem, offsets = to_standard_form(sp)
    solution = lfp_solve(problem, tol=tol, max_iter=max_iter)
    profile = offsets.restore(solution.x_opt)
    result = evaluate_profile(profile, sp.weights, sp.prices, sp.benefit_offset, sp.payment_offset,
                              iterations=solution.iterations, solution=solution)
    logger.info("[DAYAHEAD] CE schedule: %.4f MB, CE %.6f after %d iterations",
                result.volume, result.cost_efficiency, result.iterations)
    return result


def schedule_pm(sp: SchedulingProblem, eta: float = DEFAULT_ETA, tol: float = TOL) -> ScheduledProfile:
    """Profit-maximization baseline: max V - eta * C over the same feasible set."""
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta}")
    problem, offsets = to_standard_form(sp)
    lp = LpProblem(problem.num_c - eta * problem.den_d, problem.constraint_matrix, problem.rhs)
    profile = offsets.restore(lp_solve(lp, tol=tol))
    result = evaluate_profile(profile, sp.weights, sp.prices, sp.benefit_offset, sp.payment_offset)
    logger.info("[DAYAHEAD] PM schedule (eta=%.3g): %.4f MB, CE %.6f", eta, result.volume,
                result.cost_efficiency)
    return result


def demand_report(scheduled: ScheduledProfile, prices: PriceCurve) -> pd.DataFrame:
    """Per-slot pre-buy volumes and payment of a schedule."""
    x = scheduled.profile.x
    K, N = x.shape
    frame = pd.DataFrame(x, columns=[f"app{a + 1}_mb" for a in range(N)])
    frame.insert(0, "slot", np.arange(1, K + 1))
    frame.insert(1, "price_cents_per_mb", prices.p)
    frame["total_mb"] = x.sum(axis=1)
    frame["payment_cents"] = prices.p * frame["total_mb"].to_numpy()
    return frame
