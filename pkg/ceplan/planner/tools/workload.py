# -*- coding: utf-8 -*-
"""
planner/tools/workload.py

Synthetic traffic generator: Poisson access counts per slot, a
foreground/background split, log-normal per-access volumes and
real-time price draws.

Randomness comes from numpy's PCG64 seeded through SeedSequence, so a
seed reproduces the same rates, events and prices on every platform
numpy supports.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from ceplan.planner.tools.demand import AccessHistory, OperationCycle, TrafficProfile
from ceplan.planner.tools.errors import DimensionMismatch, ModelError, NonpositiveMoments

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "PCG64"
KB_PER_MB = 1024.0
DEFAULT_BG_RATIO = 5.0
OPEN_LOW_FRACTION = 0.01
PRICE_BAND = (1.0, 1.1)

EVENT_COLUMNS = ["slot", "minute", "app", "kind", "volume_mb"]


@dataclass(frozen=True)
class AppTrafficSpec:
    """
    Per-app traffic settings.

    A range with a lower end of 0 is open at zero; its rate is sampled
    from [0.01 * upper, upper].
    """

    lambda_fg_range: tuple
    lambda_bg_range: tuple
    mean_volume_kb: float
    var_volume: float
    name: str = ""

    def __post_init__(self):
        for label, (lo, hi) in (("lambda_fg_range", self.lambda_fg_range),
                                ("lambda_bg_range", self.lambda_bg_range)):
            if hi <= 0 or lo < 0 or lo > hi:
                raise ValueError(f"{label} must satisfy 0 <= low <= high, high > 0; got ({lo}, {hi})")
        if self.mean_volume_kb <= 0 or self.var_volume <= 0:
            raise NonpositiveMoments(
                f"volume moments must be positive, got E={self.mean_volume_kb}, D={self.var_volume}")

    @property
    def lognormal(self):
        return lognormal_params(self.mean_volume_kb, self.var_volume)


@dataclass
class WorkloadDay:
    """One generated day: access counts, the event stream and the aggregated profile."""

    history: AccessHistory
    events: pd.DataFrame
    profile: TrafficProfile


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def _seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))


# ============================================================================
# APP TABLE
# ============================================================================

def default_app_specs() -> list[AppTrafficSpec]:
    """The five-app traffic table used by the default scenario."""
    return [
        AppTrafficSpec((3.0, 9.0), (3.0, 30.0), 100.0, 1e4, name="app1"),
        AppTrafficSpec((0.0, 2.0), (0.0, 8.0), 50.0, 900.0, name="app2"),
        AppTrafficSpec((0.0, 1.0), (0.0, 4.0), 200.0, 1e4, name="app3"),
        AppTrafficSpec((0.0, 0.15), (0.0, 0.6), 10000.0, 9e6, name="app4"),
        AppTrafficSpec((0.0, 2.0), (0.0, 8.0), 200.0, 4e4, name="app5"),
    ]


def expand_specs(specs, num_apps: int, seed: int = 0, jitter: float = 0.1) -> list[AppTrafficSpec]:
    """
    Extend the app table to `num_apps` entries by cycling through `specs`
    and scaling each copy's ranges and moments by a seeded factor in
    [1 - jitter, 1 + jitter]. Copies are synthetic; the originals are kept as-is.
    """
    specs = list(specs)
    if not specs:
        raise ModelError("no app traffic specs to expand")
    if num_apps <= len(specs):
        return specs[:num_apps]

    rng = _rng(seed)
    out = list(specs)
    for i in range(len(specs), num_apps):
        base = specs[i % len(specs)]
        f_rate, f_mean, f_var = rng.uniform(1.0 - jitter, 1.0 + jitter, size=3)
        out.append(replace(
            base,
            lambda_fg_range=tuple(v * f_rate for v in base.lambda_fg_range),
            lambda_bg_range=tuple(v * f_rate for v in base.lambda_bg_range),
            mean_volume_kb=base.mean_volume_kb * f_mean,
            var_volume=base.var_volume * f_var,
            name=f"app{i + 1}",
        ))
    logger.info("[WORKLOAD] app table extended from %d to %d apps (jitter %.0f%%)",
                len(specs), num_apps, jitter * 100)
    return out


# ============================================================================
# DISTRIBUTIONS
# ============================================================================

def lognormal_params(mean: float, variance: float) -> tuple[float, float]:
    """Invert E = exp(mu + s2/2), D = exp(2 mu + s2)(exp(s2) - 1) into (mu, s2)."""
    if mean <= 0 or variance <= 0:
        raise NonpositiveMoments(f"log-normal moments must be positive, got E={mean}, D={variance}")
    sigma2 = float(np.log1p(variance / mean ** 2))
    mu = float(np.log(mean) - sigma2 / 2.0)
    return mu, sigma2


def _draw_range(rng, lo_hi, size):
    lo, hi = lo_hi
    if lo == 0:
        lo = OPEN_LOW_FRACTION * hi
    return rng.uniform(lo, hi, size=size)


def draw_rates(specs, cycle: OperationCycle, seed, bg_ratio: float | None = DEFAULT_BG_RATIO,
               shape=None) -> tuple[np.ndarray, np.ndarray]:
    """
    Per-slot arrival rates (K x N) for foreground and background accesses.

    Drawn once per scenario and held fixed across days. With `bg_ratio`
    set, the background rate is that multiple of the foreground rate;
    otherwise it is drawn from the app's own background range. `shape`
    is an optional K-vector multiplier applied to both.
    """
    specs = list(specs)
    if not specs:
        raise ModelError("no app traffic specs")
    rng = _rng(seed)
    K = cycle.num_slots
    lam_fg = np.column_stack([_draw_range(rng, s.lambda_fg_range, K) for s in specs])
    if bg_ratio is not None:
        lam_bg = bg_ratio * lam_fg
    else:
        lam_bg = np.column_stack([_draw_range(rng, s.lambda_bg_range, K) for s in specs])

    if shape is not None:
        multiplier = np.asarray(shape, dtype=float).ravel()
        if multiplier.shape != (K,):
            raise DimensionMismatch(f"diurnal shape has {multiplier.shape[0]} points, expected {K}")
        if (multiplier < 0).any():
            raise ValueError("diurnal shape multipliers must be nonnegative")
        lam_fg = lam_fg * multiplier[:, None]
        lam_bg = lam_bg * multiplier[:, None]
    return lam_fg, lam_bg


# ============================================================================
# GENERATION
# ============================================================================

def _events_for(rng, counts, kind, mu, sigma, slot_minutes):
    K, N = counts.shape
    flat = counts.ravel()
    cells = np.repeat(np.arange(K * N), flat)
    slots, apps = np.divmod(cells, N)
    volumes_kb = rng.lognormal(mean=mu[apps], sigma=sigma[apps])
    minutes = rng.uniform(0.0, slot_minutes, size=cells.size)
    return pd.DataFrame({
        "slot": slots + 1,
        "minute": minutes,
        "app": apps + 1,
        "kind": kind,
        "volume_mb": volumes_kb / KB_PER_MB,
    })


def generate_day(specs, cycle: OperationCycle, seed, rates=None,
                 bg_ratio: float | None = DEFAULT_BG_RATIO, shape=None) -> WorkloadDay:
    """
    One operation cycle of synthetic traffic.

    Foreground and background access counts are Poisson draws with the
    slot's rates; every access carries a log-normal volume (KB, reported
    in MB) and a uniform arrival minute within its slot. Events are
    sorted by slot then minute; slots and apps are numbered from 1.
    """
    specs = list(specs)
    if not specs:
        raise ModelError("no app traffic specs")
    ss = _seed_sequence(seed)
    rate_seq, draw_seq = ss.spawn(2)
    if rates is None:
        rates = draw_rates(specs, cycle, rate_seq, bg_ratio=bg_ratio, shape=shape)
    lam_fg, lam_bg = rates
    K, N = cycle.num_slots, len(specs)
    if lam_fg.shape != (K, N) or lam_bg.shape != (K, N):
        raise DimensionMismatch(f"rates must be {K} x {N}")

    rng = _rng(draw_seq)
    params = np.array([s.lognormal for s in specs])
    mu, sigma = params[:, 0], np.sqrt(params[:, 1])

    tau = rng.poisson(lam_fg)
    tau_bg = rng.poisson(lam_bg)
    events = pd.concat([
        _events_for(rng, tau, "foreground", mu, sigma, cycle.slot_minutes),
        _events_for(rng, tau_bg, "background", mu, sigma, cycle.slot_minutes),
    ], ignore_index=True)
    events = events.sort_values(["slot", "minute"], kind="mergesort").reset_index(drop=True)

    x = np.zeros((K, N))
    np.add.at(x, (events["slot"].to_numpy() - 1, events["app"].to_numpy() - 1),
              events["volume_mb"].to_numpy())

    logger.debug("[WORKLOAD] day: %d fg / %d bg accesses, %.3f MB",
                 int(tau.sum()), int(tau_bg.sum()), x.sum())
    return WorkloadDay(history=AccessHistory(tau=tau, tau_bg=tau_bg), events=events,
                       profile=TrafficProfile(x))


def generate_week(specs, cycle: OperationCycle, seed, num_days: int = 7,
                  bg_ratio: float | None = DEFAULT_BG_RATIO, shape=None, rates=None) -> list[WorkloadDay]:
    """
    `num_days` days sharing one set of rates, each with its own sub-seed.

    Returns the days oldest first.
    """
    specs = list(specs)
    if not specs:
        raise ModelError("no app traffic specs")
    children = _seed_sequence(seed).spawn(num_days + 1)
    if rates is None:
        rates = draw_rates(specs, cycle, children[0], bg_ratio=bg_ratio, shape=shape)
    return [generate_day(specs, cycle, child, rates=rates) for child in children[1:]]


def realtime_prices(day_ahead, seed) -> np.ndarray:
    """p_real_k = u_k * p_k, u_k ~ Uniform[1.0, 1.1] independently per slot."""
    p = np.asarray(getattr(day_ahead, "p", day_ahead), dtype=float).ravel()
    rng = _rng(seed)
    return rng.uniform(*PRICE_BAND, size=p.shape[0]) * p
