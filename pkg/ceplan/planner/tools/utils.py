# -*- coding: utf-8 -*-
"""
tools/utils.py

Report records and their validation.
"""

import json
import math

from pydantic import BaseModel, Field, model_validator

CE_REL_TOL = 1e-9


class ProfileRow(BaseModel):
    """One row of the indicator table: volume, benefit, payment and CE = benefit / payment."""

    name: str
    volume_mb: float = Field(ge=0)
    benefit: float = Field(ge=0)
    payment_cents: float = Field(gt=0)
    cost_efficiency: float

    @model_validator(mode="after")
    def _ce_identity(self):
        expected = self.benefit / self.payment_cents
        if not math.isclose(self.cost_efficiency, expected, rel_tol=CE_REL_TOL, abs_tol=1e-15):
            raise ValueError(f"{self.name}: CE {self.cost_efficiency} != benefit/payment {expected}")
        return self

    @classmethod
    def of(cls, name: str, volume: float, benefit: float, payment: float) -> "ProfileRow":
        return cls(name=name, volume_mb=volume, benefit=benefit, payment_cents=payment,
                   cost_efficiency=benefit / payment)


class RunReport(BaseModel):
    command: str
    seed: int
    rows: list[ProfileRow] = Field(default_factory=list)
    iterations: dict[str, int] = Field(default_factory=dict)
    summary: dict = Field(default_factory=dict)

    def row(self, name: str) -> ProfileRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def profile_row(name: str, scheduled) -> ProfileRow:
    """Row from anything with volume, benefit, payment (ScheduledProfile, DayOutcome)."""
    return ProfileRow.of(name, scheduled.volume, scheduled.benefit, scheduled.payment)


def validate_report_json(raw_output: str) -> RunReport:
    """
    Parse a report.json and re-check every row's CE identity.

    Raises:
        ValueError if the JSON is invalid or a row is inconsistent
    """
    try:
        data = json.loads(raw_output)
    except json.JSONDecodeError:
        raise ValueError("report was not valid JSON")

    if not isinstance(data, dict):
        raise ValueError("report must be a JSON object")

    if "rows" not in data or not isinstance(data["rows"], list):
        raise ValueError("report must contain a 'rows' list")

    return RunReport.model_validate(data)
