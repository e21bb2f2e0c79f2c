"""
Rolling consumption history
---------------------------
- Keeps the latest days (default 7) in memory, oldest first
- After each simulated day the actual profile is pushed in and the
  oldest day drops out, so the next day's default bounds follow actuals
- Persists to / restores from the long-format history CSV
"""

import logging
from collections import deque

import numpy as np
import pandas as pd

from ceplan.planner.tools.demand import AccessHistory, ConsumptionBounds, TrafficProfile, default_bounds
from ceplan.planner.tools.errors import DimensionMismatch, EmptyHistory
from ceplan.planner.tools.io_utils import history_frame, read_history_csv, write_csv
from ceplan.planner.tools.workload import EVENT_COLUMNS, WorkloadDay

logger = logging.getLogger(__name__)

HISTORY_DAYS = 7


class RollingHistory:
    """Fixed-length window of WorkloadDay records."""

    def __init__(self, days=(), max_days: int = HISTORY_DAYS):
        if max_days < 1:
            raise ValueError("history window must hold at least one day")
        self._days: deque[WorkloadDay] = deque(maxlen=max_days)
        for day in days:
            self.push(day)

    def __len__(self):
        return len(self._days)

    @property
    def max_days(self) -> int:
        return self._days.maxlen

    @property
    def days(self) -> list[WorkloadDay]:
        return list(self._days)

    def latest(self) -> WorkloadDay:
        if not self._days:
            raise EmptyHistory("rolling history is empty")
        return self._days[-1]

    def push(self, day: WorkloadDay):
        if self._days and day.profile.shape != self._days[-1].profile.shape:
            raise DimensionMismatch(
                f"day of shape {day.profile.shape} does not match history {self._days[-1].profile.shape}")
        self._days.append(day)

    def record_actuals(self, consumed, access: AccessHistory | None = None, events=None):
        """Push a simulated day's actual consumption (and its access counts)."""
        x = np.atleast_2d(np.asarray(consumed, dtype=float))
        if access is None:
            access = self.latest().history
        self.push(WorkloadDay(history=access,
                              events=events if events is not None else pd.DataFrame(columns=EVENT_COLUMNS),
                              profile=TrafficProfile(x)))
        logger.debug("[HISTORY] recorded %.3f MB, window %d/%d", x.sum(), len(self), self.max_days)

    def bounds(self) -> ConsumptionBounds:
        return default_bounds([d.profile for d in self._days])

    # --------------------------------------------------
    # Persistence
    # --------------------------------------------------

    def to_frame(self) -> pd.DataFrame:
        return history_frame(self._days)

    def save(self, path):
        return write_csv(self.to_frame(), path)

    @classmethod
    def load(cls, path, max_days: int = HISTORY_DAYS) -> "RollingHistory":
        return cls(read_history_csv(path), max_days=max_days)
