# -*- coding: utf-8 -*-
"""
config/settings.py

Environment settings for the planner, read from the process environment
and an optional .env file at the repository root.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Repository root (the directory holding the ceplan package)
ROOT_DIR = Path(__file__).resolve().parents[3]

env_path = ROOT_DIR / '.env'
load_dotenv(dotenv_path=env_path, override=False)


class Settings:
    """Values are read when the object is built, so a fresh Settings() sees env changes."""

    def __init__(self):
        self.LOG_LEVEL = os.getenv('CEPLAN_LOG_LEVEL', 'INFO').upper()
        self.OUTPUT_DIR = Path(os.getenv('CEPLAN_OUTPUT_DIR', 'out'))
        self.MAX_WORKERS = int(os.getenv('CEPLAN_MAX_WORKERS', '1'))
        self.LFP_MAX_ITER = int(os.getenv('CEPLAN_LFP_MAX_ITER', '1000'))
        self.SOLVER_TOL = float(os.getenv('CEPLAN_SOLVER_TOL', '1e-9'))

        # Validate
        if self.MAX_WORKERS < 1:
            raise ValueError("CEPLAN_MAX_WORKERS must be at least 1")
        if self.LFP_MAX_ITER < 1:
            raise ValueError("CEPLAN_LFP_MAX_ITER must be at least 1")
        if not 0 < self.SOLVER_TOL < 1e-3:
            raise ValueError("CEPLAN_SOLVER_TOL must be in (0, 1e-3)")

