# -*- coding: utf-8 -*-
"""
tools/io_utils.py

CSV and JSON readers/writers for histories, event streams, ledgers and
reports. Files carry no timestamps so identical runs give identical bytes.
"""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from ceplan.planner.tools.demand import AccessHistory, TrafficProfile
from ceplan.planner.tools.errors import DimensionMismatch, EmptyHistory
from ceplan.planner.tools.workload import EVENT_COLUMNS, WorkloadDay

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"
HISTORY_COLUMNS = ["day", "slot", "app", "foreground_accesses", "background_accesses", "volume_mb"]
LEDGER_COLUMNS = ["day", "volume_mb"]


def ensure_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("[IO] wrote %s (%d rows)", path, len(frame))
    return path


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def dumps(data) -> str:
    if hasattr(data, "model_dump"):
        data = data.model_dump(mode="json")
    return json.dumps(data, sort_keys=True, indent=2, default=_default) + "\n"


def write_json(data, path) -> Path:
    path = Path(path)
    path.write_text(dumps(data), encoding="utf-8")
    logger.debug("[IO] wrote %s", path)
    return path


# ============================================================================
# MATRICES
# ============================================================================

def matrix_frame(x: np.ndarray, value_prefix: str = "app") -> pd.DataFrame:
    """K x N matrix as a table: slot, app1, ..., appN."""
    K, N = x.shape
    frame = pd.DataFrame(x, columns=[f"{value_prefix}{a + 1}" for a in range(N)])
    frame.insert(0, "slot", np.arange(1, K + 1))
    return frame


def read_matrix(path) -> np.ndarray:
    frame = pd.read_csv(path)
    if "slot" not in frame.columns:
        raise DimensionMismatch(f"{path}: missing 'slot' column")
    return frame.sort_values("slot").drop(columns="slot").to_numpy(dtype=float)


# ============================================================================
# HISTORY / EVENTS / LEDGER
# ============================================================================

def history_frame(days) -> pd.DataFrame:
    """Days (oldest first) as long-format rows, day numbered from 1."""
    frames = []
    for d, day in enumerate(days, start=1):
        K, N = day.profile.shape
        slots, apps = np.divmod(np.arange(K * N), N)
        tau_bg = day.history.tau_bg if day.history.tau_bg is not None else np.zeros((K, N))
        frames.append(pd.DataFrame({
            "day": d,
            "slot": slots + 1,
            "app": apps + 1,
            "foreground_accesses": day.history.tau.ravel().astype(int),
            "background_accesses": tau_bg.ravel().astype(int),
            "volume_mb": day.profile.x.ravel(),
        }))
    if not frames:
        return pd.DataFrame(columns=HISTORY_COLUMNS)
    return pd.concat(frames, ignore_index=True)[HISTORY_COLUMNS]


def days_from_frame(frame: pd.DataFrame) -> list[WorkloadDay]:
    missing = set(HISTORY_COLUMNS) - set(frame.columns)
    if missing:
        raise DimensionMismatch(f"history is missing columns {sorted(missing)}")
    if frame.empty:
        raise EmptyHistory("history file has no rows")
    K, N = int(frame["slot"].max()), int(frame["app"].max())
    days = []
    for _, rows in frame.groupby("day", sort=True):
        k = rows["slot"].to_numpy(dtype=int) - 1
        a = rows["app"].to_numpy(dtype=int) - 1
        tau, tau_bg, x = (np.zeros((K, N)) for _ in range(3))
        tau[k, a] = rows["foreground_accesses"].to_numpy(dtype=float)
        tau_bg[k, a] = rows["background_accesses"].to_numpy(dtype=float)
        x[k, a] = rows["volume_mb"].to_numpy(dtype=float)
        days.append(WorkloadDay(history=AccessHistory(tau=tau, tau_bg=tau_bg),
                                events=pd.DataFrame(columns=EVENT_COLUMNS),
                                profile=TrafficProfile(x)))
    return days


def read_history_csv(path) -> list[WorkloadDay]:
    return days_from_frame(pd.read_csv(path))


def events_frame(days) -> pd.DataFrame:
    frames = []
    for d, day in enumerate(days, start=1):
        events = day.events.copy()
        events.insert(0, "day", d)
        frames.append(events)
    if not frames:
        return pd.DataFrame(columns=["day"] + EVENT_COLUMNS)
    return pd.concat(frames, ignore_index=True)


def read_ledger_csv(path) -> np.ndarray:
    frame = pd.read_csv(path)
    missing = set(LEDGER_COLUMNS) - set(frame.columns)
    if missing:
        raise DimensionMismatch(f"ledger is missing columns {sorted(missing)}")
    return frame.sort_values("day")["volume_mb"].to_numpy(dtype=float)
