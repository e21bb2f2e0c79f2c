"""
Routes a planner subcommand to its job.
"""

import logging

from ceplan.planner.jobs import planner_jobs

logger = logging.getLogger(__name__)

HANDLERS = {
    "gen": planner_jobs.generate_job,
    "dayahead": planner_jobs.dayahead_job,
    "realtime": planner_jobs.realtime_job,
    "longterm": planner_jobs.longterm_job,
    "limited": planner_jobs.limited_job,
}


def ceplan_orchestrator(command: str, scenario, out_dir=None, settings=None, verbose: bool = True, **options):
    """Run `command` for the scenario; options go to the matching job (schedule_path, ledger_path)."""
    handler = HANDLERS.get(command)
    if handler is None:
        raise ValueError(f"unknown command {command!r}; choose from {sorted(HANDLERS)}")
    logger.info("[ORCHESTRATOR] %s (seed %d)", command, scenario.seed)
    return handler(scenario, out_dir, settings=settings, verbose=verbose, **options)
