# -*- coding: utf-8 -*-
"""
flows/planner_flow.py

Wrapper functions around CostEfficiencyPlanner to provide one API for
the CLI, batch jobs and tests.
"""

from ceplan.planner.planner import CostEfficiencyPlanner


# ================================================================
# Core Wrappers
# ================================================================

def generate_only(scenario, out_dir=None, settings=None, verbose: bool = True):
    """Generate the synthetic history only."""
    return CostEfficiencyPlanner(scenario, out_dir, settings, verbose).run_generate()


def dayahead_only(scenario, out_dir=None, settings=None, verbose: bool = True):
    """Derive weights and bounds, schedule (CE and PM) and simulate one day."""
    return CostEfficiencyPlanner(scenario, out_dir, settings, verbose).run_dayahead()


def realtime_only(scenario, out_dir=None, settings=None, schedule_path=None, verbose: bool = True):
    """Seeded real-time batch against the day-ahead schedule (or a schedule file)."""
    return CostEfficiencyPlanner(scenario, out_dir, settings, verbose).run_realtime(schedule_path)


def longterm_only(scenario, out_dir=None, settings=None, ledger_path=None, verbose: bool = True):
    return CostEfficiencyPlanner(scenario, out_dir, settings, verbose).run_longterm(ledger_path)


def limited_only(scenario, out_dir=None, settings=None, max_apps=None, strategy=None, verbose: bool = True):
    return CostEfficiencyPlanner(scenario, out_dir, settings, verbose).run_limited_management(max_apps, strategy)
