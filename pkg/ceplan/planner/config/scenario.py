# -*- coding: utf-8 -*-
"""
config/scenario.py

Scenario configuration: one JSON file validated by pydantic.
Every field has a default, so an empty object is the default scenario.
"""

import json
import logging
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ceplan.planner.agents.dayahead_agent import DEFAULT_ETA, PriceCurve
from ceplan.planner.agents.longterm_agent import PLAN_PRESETS, BundlePlan
from ceplan.planner.tools.demand import DEFAULT_DELTA, DEFAULT_DELTA_PRIME, OperationCycle
from ceplan.planner.tools.workload import (
    DEFAULT_BG_RATIO,
    AppTrafficSpec,
    default_app_specs,
    expand_specs,
)

logger = logging.getLogger(__name__)

PEAK_HOURS = (9, 22)
PEAK_PRICE = 1.0
OFF_PEAK_PRICE = 0.5


def default_price_curve(num_slots: int = 24) -> list[float]:
    """0.5 cents/MB overnight, 1.0 in hours 9-22 (1-based), mapped onto K slots."""
    prices = []
    for s in range(1, num_slots + 1):
        hour = int(np.ceil(s * 24 / num_slots))
        prices.append(PEAK_PRICE if PEAK_HOURS[0] <= hour <= PEAK_HOURS[1] else OFF_PEAK_PRICE)
    return prices


class AppSpecModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lambda_fg: tuple[float, float]
    lambda_bg: tuple[float, float]
    mean_volume_kb: float = Field(gt=0)
    var_volume: float = Field(gt=0)
    name: str = ""

    @field_validator("lambda_fg", "lambda_bg")
    @classmethod
    def _range(cls, v):
        lo, hi = v
        if lo < 0 or hi <= 0 or lo > hi:
            raise ValueError(f"rate range must satisfy 0 <= low <= high, high > 0; got {v}")
        return v

    def to_spec(self) -> AppTrafficSpec:
        return AppTrafficSpec(self.lambda_fg, self.lambda_bg, self.mean_volume_kb, self.var_volume,
                              name=self.name)

    @classmethod
    def from_spec(cls, spec: AppTrafficSpec) -> "AppSpecModel":
        return cls(lambda_fg=spec.lambda_fg_range, lambda_bg=spec.lambda_bg_range,
                   mean_volume_kb=spec.mean_volume_kb, var_volume=spec.var_volume, name=spec.name)


class PlanModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    base_cost: float = Field(gt=0)
    cap_mb: float = Field(gt=0)
    overage_per_mb: float = Field(default=PLAN_PRESETS["500MB"].overage_per_mb, gt=0)

    def to_plan(self) -> BundlePlan:
        return BundlePlan(self.name, self.base_cost, self.cap_mb, self.overage_per_mb)


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # cycle
    num_slots: int = Field(default=24, ge=1)
    slot_minutes: int = Field(default=60, ge=1)

    # workload
    apps: list[AppSpecModel] = Field(
        default_factory=lambda: [AppSpecModel.from_spec(s) for s in default_app_specs()])
    num_apps: Optional[int] = Field(default=None, ge=1)
    bg_ratio: Optional[float] = Field(default=DEFAULT_BG_RATIO, gt=0)
    diurnal_shape: Optional[list[float]] = None
    history_days: int = Field(default=7, ge=1)
    history_path: Optional[str] = None

    # prices (cents/MB)
    price_curve: Optional[list[float]] = None

    # behaviour model
    delta: float = Field(default=DEFAULT_DELTA, gt=0, lt=1)
    delta_prime: float = Field(default=DEFAULT_DELTA_PRIME, gt=0, lt=1)
    omega_override: Optional[list[list[float]]] = None

    # day-ahead
    demand_mode: Literal["fixed", "elastic"] = "elastic"
    demand_margin: float = Field(default=0.1, ge=0, lt=1)
    b_app: Optional[list[float]] = None
    eta: float = Field(default=DEFAULT_ETA, ge=0)
    strict_paper_matrix: bool = False

    # real-time
    kappa: float = Field(default=0.0, ge=0, lt=1)
    allow_overage: bool = True
    runs: int = Field(default=1000, ge=1)
    log_decisions: bool = False

    # long-term
    plan: str = "500MB"
    plans: list[PlanModel] = Field(default_factory=list)
    omega_bar: float = Field(default=1.0, gt=0)
    ledger: Optional[list[float]] = None

    # limited management
    max_apps: Optional[int] = Field(default=None, ge=1)
    strategy: Literal["frequency", "demand", "both"] = "both"

    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    output_dir: Optional[str] = None

    @field_validator("history_path")
    @classmethod
    def _history_exists(cls, v):
        if v is not None and not Path(v).is_file():
            raise ValueError(f"history file {v} does not exist")
        return v

    @model_validator(mode="after")
    def _consistent(self):
        K = self.num_slots
        if self.price_curve is None:
            self.price_curve = default_price_curve(K)
        if len(self.price_curve) != K:
            raise ValueError(f"price_curve has {len(self.price_curve)} points, expected {K}")
        if any(p <= 0 for p in self.price_curve):
            raise ValueError("price_curve entries must be positive")

        if self.diurnal_shape is not None:
            if len(self.diurnal_shape) != K:
                raise ValueError(f"diurnal_shape has {len(self.diurnal_shape)} points, expected {K}")
            if any(v < 0 for v in self.diurnal_shape):
                raise ValueError("diurnal_shape entries must be nonnegative")

        if not self.apps:
            raise ValueError("at least one app spec is required")
        N = self.total_apps
        if self.b_app is not None and len(self.b_app) != N:
            raise ValueError(f"b_app has {len(self.b_app)} entries, expected {N}")
        if self.omega_override is not None:
            shape = np.shape(self.omega_override)
            if shape != (K, N):
                raise ValueError(f"omega_override must be {K} x {N}, got {shape}")
            if not all(0 < w <= 1 for row in self.omega_override for w in row):
                raise ValueError("omega_override entries must lie in (0, 1]")
        if self.max_apps is not None and self.max_apps > N:
            raise ValueError(f"max_apps={self.max_apps} exceeds the {N} installed apps")

        names = {p.name for p in self.plans} | set(PLAN_PRESETS)
        if self.plan not in names:
            raise ValueError(f"unknown plan {self.plan!r}; choose from {sorted(names)}")
        if self.ledger is not None:
            if len(self.ledger) > 30 or any(v < 0 for v in self.ledger):
                raise ValueError("ledger holds at most 30 nonnegative daily volumes")
        return self

    # ------------------------------------------------------------------
    # Domain views
    # ------------------------------------------------------------------

    @property
    def total_apps(self) -> int:
        return self.num_apps if self.num_apps is not None else len(self.apps)

    def cycle(self) -> OperationCycle:
        return OperationCycle(num_slots=self.num_slots, slot_minutes=self.slot_minutes)

    def specs(self) -> list[AppTrafficSpec]:
        base = [a.to_spec() for a in self.apps]
        if self.num_apps is None:
            return base
        return expand_specs(base, self.num_apps, seed=self.seed)

    def prices(self) -> PriceCurve:
        return PriceCurve(self.price_curve)

    def all_plans(self) -> list[BundlePlan]:
        custom = {p.name: p.to_plan() for p in self.plans}
        merged = {**PLAN_PRESETS, **custom}
        return list(merged.values())

    def bundle_plan(self) -> BundlePlan:
        return {p.name: p for p in self.all_plans()}[self.plan]


def load_scenario(path=None, **overrides) -> Scenario:
    """
    Read a scenario file (or the defaults) and apply overrides.
    Overrides whose value is None are ignored.
    """
    data = {}
    if path is not None:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError(f"{path}: scenario must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    scenario = Scenario.model_validate(data)
    logger.debug("[CONFIG] scenario: %d slots, %d apps, seed %d", scenario.num_slots,
                 scenario.total_apps, scenario.seed)
    return scenario
