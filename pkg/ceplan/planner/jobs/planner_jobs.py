# ceplan/planner/jobs/planner_jobs.py
"""
Job wrappers around the planner flows.
Every subcommand runs as a job whose record (type, status, seed, summary,
child failures) is written to job.json next to its outputs.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from ceplan.planner.tools.io_utils import ensure_dir, write_json

logger = logging.getLogger(__name__)

JOB_FILE = "job.json"


# =====================================================
# JOB RECORDS
# =====================================================

def create_job_record(job_type: str, seed: int | None = None, params: dict | None = None) -> dict:
    return {"type": job_type, "status": "Pending", "seed": seed, "params": dict(params or {}),
            "summary": None, "error": None, "children": []}


def update_job_status(record: dict, status: str, result_summary=None, error: str | None = None) -> dict:
    record["status"] = status
    if result_summary is not None:
        record["summary"] = result_summary
    if error is not None:
        record["error"] = error
    return record


def write_job_record(record: dict, out_dir) -> Path:
    return write_json(record, ensure_dir(out_dir) / JOB_FILE)


def run_job(job_type: str, fn, out_dir, seed: int | None = None, params: dict | None = None, **kwargs):
    """
    Run `fn(record, **kwargs)` as a job; the record is written whether it
    succeeds or fails. `fn` returns (result, summary) and may append child
    entries to the record.
    """
    record = create_job_record(job_type, seed, params)
    try:
        update_job_status(record, "Running")
        result, summary = fn(record, **kwargs)
        update_job_status(record, "Completed", result_summary=summary)
        logger.info("[JOBS] %s completed", job_type)
        return result
    except Exception as e:
        update_job_status(record, "Failed", error=f"{type(e).__name__}: {e}")
        logger.error("[JOBS] %s failed: %s", job_type, e)
        raise
    finally:
        write_job_record(record, out_dir)


# =====================================================
# BATCH FAN-OUT
# =====================================================

def fan_out(fn, seeds, max_workers: int = 1, record: dict | None = None) -> list:
    """
    Call fn(index, seed) for every seed, in a thread pool when
    max_workers > 1. Results come back in seed order; a failed run yields
    None and is logged as a child of `record` instead of aborting the batch.
    """
    seeds = list(seeds)

    def _child(i, seed):
        try:
            return fn(i, seed), None
        except Exception as e:
            return None, f"{type(e).__name__}: {e}"

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(_child, range(len(seeds)), seeds))
    else:
        outcomes = [_child(i, s) for i, s in enumerate(seeds)]

    results = []
    for i, (result, error) in enumerate(outcomes):
        if error is not None:
            logger.warning("[JOBS] run %d failed: %s", i, error)
            if record is not None:
                record["children"].append({"run": i, "status": "Failed", "error": error})
        results.append(result)
    return results


# =====================================================
# SUBCOMMAND JOBS
# =====================================================

def generate_job(scenario, out_dir=None, settings=None, verbose: bool = True):
    from ceplan.planner.flows import planner_flow
    return planner_flow.generate_only(scenario, out_dir, settings=settings, verbose=verbose)


def dayahead_job(scenario, out_dir=None, settings=None, verbose: bool = True):
    from ceplan.planner.flows import planner_flow
    return planner_flow.dayahead_only(scenario, out_dir, settings=settings, verbose=verbose)


def realtime_job(scenario, out_dir=None, settings=None, verbose: bool = True, schedule_path=None):
    from ceplan.planner.flows import planner_flow
    return planner_flow.realtime_only(scenario, out_dir, settings=settings, schedule_path=schedule_path,
                                      verbose=verbose)


def longterm_job(scenario, out_dir=None, settings=None, verbose: bool = True, ledger_path=None):
    from ceplan.planner.flows import planner_flow
    return planner_flow.longterm_only(scenario, out_dir, settings=settings, ledger_path=ledger_path,
                                      verbose=verbose)


def limited_job(scenario, out_dir=None, settings=None, verbose: bool = True):
    from ceplan.planner.flows import planner_flow
    return planner_flow.limited_only(scenario, out_dir, settings=settings, verbose=verbose)
