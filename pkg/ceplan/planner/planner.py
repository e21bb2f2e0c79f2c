# -*- coding: utf-8 -*-
"""
planner/planner.py

Master orchestrator for the cost-efficiency planner.
Runs the pipeline stages (generate -> weights/bounds -> schedule ->
simulate -> analyze) for one scenario and writes their reports.
"""

import argparse
import logging
import sys
from pathlib import Path

import coloredlogs
import numpy as np
import pandas as pd
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table

from ceplan.flows.history import RollingHistory
from ceplan.planner.agents.dayahead_agent import demand_report, evaluate_profile, schedule, schedule_pm
from ceplan.planner.agents.longterm_agent import (
    DailyLedger,
    ce_curves,
    estimate_month,
    estimate_series,
    monthly_ce,
    next_day_choices,
    peak_volume,
    remaining_budget,
)
from ceplan.planner.agents.realtime_agent import calibrate_admission, simulate_day
from ceplan.planner.config.scenario import Scenario, load_scenario
from ceplan.planner.config.settings import Settings
from ceplan.planner.jobs.planner_jobs import fan_out, run_job
from ceplan.planner.tasks import (
    STRATEGIES,
    build_problem,
    build_subset_problem,
    combine_profile,
    derive_inputs,
    select_apps,
)
from ceplan.planner.tools.demand import TrafficProfile
from ceplan.planner.tools.errors import (
    DegeneratePlan,
    DimensionMismatch,
    ModelError,
    RealtimeError,
    SolverError,
)
from ceplan.planner.tools.io_utils import (
    ensure_dir,
    events_frame,
    history_frame,
    matrix_frame,
    read_ledger_csv,
    read_matrix,
    write_csv,
    write_json,
)
from ceplan.planner.tools.utils import RunReport, profile_row
from ceplan.planner.tools.workload import (
    RNG_ALGORITHM,
    draw_rates,
    generate_day,
    generate_week,
    realtime_prices,
)

logger = logging.getLogger(__name__)

# spawn keys of the independent random streams
KEY_RATES, KEY_WEEK, KEY_DAY, KEY_BATCH = 0, 1, 2, 3
HISTOGRAM_BINS = 40


class CostEfficiencyPlanner:
    """
    Runs every stage of the planner for one scenario.
    Each run_* method is a job: it writes its outputs plus job.json to the
    output directory and returns the report.
    """

    def __init__(self, scenario: Scenario, out_dir=None, settings: Settings | None = None,
                 verbose: bool = True):
        """
        Args:
            scenario: validated scenario
            out_dir: output directory (default: scenario.output_dir or CEPLAN_OUTPUT_DIR)
            settings: environment settings
            verbose: print run summaries to the console
        """
        self.scenario = scenario
        self.settings = settings or Settings()
        self.out_dir = Path(out_dir or scenario.output_dir or self.settings.OUTPUT_DIR)
        self.verbose = verbose
        self.console = Console(stderr=True)

        self.cycle = scenario.cycle()
        self.specs = scenario.specs()
        self.prices = scenario.prices()
        self._rates = None
        self._history = None

    # ------------------------------------------------------------------
    # Shared stages
    # ------------------------------------------------------------------

    def _seq(self, *key) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.scenario.seed, spawn_key=key)

    @property
    def rates(self):
        if self._rates is None:
            s = self.scenario
            self._rates = draw_rates(self.specs, self.cycle, self._seq(KEY_RATES),
                                     bg_ratio=s.bg_ratio, shape=s.diurnal_shape)
        return self._rates

    @property
    def history(self) -> RollingHistory:
        if self._history is None:
            s = self.scenario
            if s.history_path is not None:
                self._history = RollingHistory.load(s.history_path, max_days=s.history_days)
                shape = self._history.latest().profile.shape
                if shape != (s.num_slots, s.total_apps):
                    raise DimensionMismatch(
                        f"{s.history_path}: history is {shape}, scenario is {(s.num_slots, s.total_apps)}")
                logger.info("[HISTORY] %d days loaded from %s", len(self._history), s.history_path)
            else:
                days = generate_week(self.specs, self.cycle, self._seq(KEY_WEEK),
                                     num_days=s.history_days, rates=self.rates)
                self._history = RollingHistory(days, max_days=s.history_days)
        return self._history

    def _prepare(self):
        s = self.scenario
        inputs = derive_inputs(self.history.days, self.prices, s.delta, s.delta_prime, s.omega_override)
        problem = build_problem(inputs, case=s.demand_mode, margin=s.demand_margin, b_app=s.b_app,
                                strict_paper_matrix=s.strict_paper_matrix)
        return inputs, problem

    def _schedule(self, problem):
        return schedule(problem, tol=self.settings.SOLVER_TOL, max_iter=self.settings.LFP_MAX_ITER)

    def _simulate(self, schedule_x, omega, key, log_decisions=False):
        """One real-time day on a fresh event stream: (day, managed, unmanaged)."""
        s = self.scenario
        day = generate_day(self.specs, self.cycle, self._seq(*key, 0), rates=self.rates)
        p_real = realtime_prices(self.prices, self._seq(*key, 1))
        params = calibrate_admission(kappa=s.kappa, slot_minutes=s.slot_minutes)
        rng = np.random.Generator(np.random.PCG64(self._seq(*key, 2)))
        managed = simulate_day(schedule_x, day.events, omega, self.prices.p, p_real, params, rng,
                               managed=True, allow_overage=s.allow_overage, log_decisions=log_decisions)
        unmanaged = simulate_day(schedule_x, day.events, omega, self.prices.p, p_real, params, rng,
                                 managed=False)
        return day, managed, unmanaged

    def _params(self, **extra) -> dict:
        s = self.scenario
        params = {"kappa": s.kappa, "demand_mode": s.demand_mode, "num_apps": s.total_apps,
                  "num_slots": s.num_slots, "strict_paper_matrix": s.strict_paper_matrix,
                  "rng": RNG_ALGORITHM}
        params.update(extra)
        return params

    def _job(self, name, fn, params: dict | None = None, **kwargs):
        out = ensure_dir(self.out_dir)
        return run_job(name, fn, out, seed=self.scenario.seed, params=self._params(**(params or {})), **kwargs)

    def _print_rows(self, report: RunReport, title: str):
        if not self.verbose or not report.rows:
            return
        table = Table(title=title)
        for col in ("Profile", "Volume (MB)", "Benefit", "Payment (cent)", "C.E."):
            table.add_column(col, justify="right" if col != "Profile" else "left")
        for r in report.rows:
            table.add_row(r.name, f"{r.volume_mb:.4f}", f"{r.benefit:.4f}", f"{r.payment_cents:.4f}",
                          f"{r.cost_efficiency:.4f}")
        self.console.print(table)

    # ------------------------------------------------------------------
    # gen
    # ------------------------------------------------------------------

    def run_generate(self):
        return self._job("gen", self._generate)

    def _generate(self, record):
        days = self.history.days
        lam_fg, lam_bg = self.rates
        rates = pd.concat([matrix_frame(lam_fg).assign(kind="foreground"),
                           matrix_frame(lam_bg).assign(kind="background")], ignore_index=True)
        write_csv(history_frame(days), self.out_dir / "history.csv")
        write_csv(events_frame(days), self.out_dir / "events.csv")
        write_csv(rates, self.out_dir / "rates.csv")
        summary = {
            "days": len(days),
            "daily_volume_mb": [round(d.profile.volume, 6) for d in days],
            "events": int(sum(len(d.events) for d in days)),
        }
        logger.info("[GEN] %d days, %d events", summary["days"], summary["events"])
        return days, summary

    # ------------------------------------------------------------------
    # dayahead
    # ------------------------------------------------------------------

    def run_dayahead(self):
        return self._job("dayahead", self._dayahead)

    def _dayahead(self, record):
        s = self.scenario
        inputs, problem = self._prepare()
        ce = self._schedule(problem)
        pm = schedule_pm(problem, eta=s.eta, tol=self.settings.SOLVER_TOL)
        unscheduled = evaluate_profile(inputs.baseline, inputs.weights, self.prices)
        day, managed, unmanaged = self._simulate(ce.profile.x, inputs.weights.omega, (KEY_DAY,))

        # actuals refresh the rolling window the next day's bounds come from
        self.history.record_actuals(managed.consumed, access=day.history, events=day.events)
        next_bounds = self.history.bounds()

        report = RunReport(
            command="dayahead",
            seed=s.seed,
            rows=[
                profile_row("unscheduled", unscheduled),
                profile_row("ce_scheduled", ce),
                profile_row("pm_scheduled", pm),
                profile_row("realtime_managed", managed),
                profile_row("realtime_unmanaged", unmanaged),
            ],
            iterations={"ce_scheduled": ce.iterations},
            summary={
                "improvement_vs_unscheduled": ce.cost_efficiency / unscheduled.cost_efficiency - 1.0,
                "improvement_vs_pm": ce.cost_efficiency / pm.cost_efficiency - 1.0,
                "realtime_ratio": managed.cost_efficiency / unmanaged.cost_efficiency,
                "eta": s.eta,
                "next_day_slot_caps_mb": next_bounds.B_slot_total.tolist(),
            },
        )
        out = self.out_dir
        write_json(report, out / "report.json")
        write_csv(matrix_frame(ce.profile.x), out / "schedule_ce.csv")
        write_csv(matrix_frame(pm.profile.x), out / "schedule_pm.csv")
        write_csv(demand_report(ce, self.prices), out / "demand_report.csv")
        write_csv(ce.solution.trace_frame(), out / "lfp_trace.csv")
        self.history.save(out / "history_next.csv")
        self._print_rows(report, "Day-ahead indicators")
        return report, {"ce_scheduled": ce.cost_efficiency, "iterations": ce.iterations}

    # ------------------------------------------------------------------
    # realtime
    # ------------------------------------------------------------------

    def run_realtime(self, schedule_path=None):
        params = {"runs": self.scenario.runs, "schedule": str(schedule_path) if schedule_path else None}
        return self._job("realtime", self._realtime, params, schedule_path=schedule_path)

    def _realtime(self, record, schedule_path=None):
        s = self.scenario
        inputs, problem = self._prepare()
        omega = inputs.weights.omega
        if schedule_path is not None:
            x = read_matrix(schedule_path)
            if x.shape != omega.shape:
                raise DimensionMismatch(f"schedule {x.shape} does not match scenario {omega.shape}")
            planned = evaluate_profile(TrafficProfile(x), inputs.weights, self.prices)
        else:
            planned = self._schedule(problem)
        x = planned.profile.x

        def one_run(i, _):
            _, managed, unmanaged = self._simulate(x, omega, (KEY_BATCH, i))
            return managed, unmanaged

        logger.info("[REALTIME] %d runs, kappa=%.3g, %d worker(s)", s.runs, s.kappa,
                    self.settings.MAX_WORKERS)
        results = fan_out(one_run, range(s.runs), max_workers=self.settings.MAX_WORKERS, record=record)

        rows = []
        for i, res in enumerate(results):
            if res is None:
                continue
            managed, unmanaged = res
            rows.append({"run": i, "ce_managed": managed.cost_efficiency,
                         "ce_unmanaged": unmanaged.cost_efficiency,
                         "ratio": managed.cost_efficiency / unmanaged.cost_efficiency,
                         "volume_managed_mb": managed.volume, "volume_unmanaged_mb": unmanaged.volume,
                         "payment_managed": managed.payment, "payment_unmanaged": unmanaged.payment})
        if not rows:
            raise RealtimeError("every real-time run failed")
        ratios = pd.DataFrame(rows)
        counts, edges = np.histogram(ratios["ratio"].to_numpy(), bins=HISTOGRAM_BINS)
        histogram = pd.DataFrame({"bin_low": edges[:-1], "bin_high": edges[1:], "count": counts})

        # first run again, in full detail
        _, managed, unmanaged = self._simulate(x, omega, (KEY_BATCH, 0), log_decisions=s.log_decisions)
        billing = {
            name: {"prebuy_cents": o.prebuy_payment, "additional_cents": o.additional_payment,
                   "total_cents": o.payment, "additional_by_slot": o.additional_by_slot.tolist(),
                   "reallocations": o.reallocations}
            for name, o in (("managed", managed), ("unmanaged", unmanaged))
        }

        fraction = float((ratios["ratio"] > 1.0).mean())
        report = RunReport(
            command="realtime",
            seed=s.seed,
            rows=[profile_row("ce_scheduled", planned),
                  profile_row("realtime_managed", managed),
                  profile_row("realtime_unmanaged", unmanaged)],
            iterations={"ce_scheduled": planned.iterations},
            summary={"runs": s.runs, "runs_completed": len(rows), "kappa": s.kappa,
                     "fraction_ratio_gt_1": fraction, "mean_ratio": float(ratios["ratio"].mean())},
        )
        out = self.out_dir
        write_json(report, out / "report.json")
        write_csv(ratios, out / "ratios.csv")
        write_csv(histogram, out / "ratio_histogram.csv")
        write_csv(matrix_frame(managed.consumed), out / "final_profile.csv")
        write_json(billing, out / "billing.json")
        if managed.decisions is not None:
            write_csv(managed.decisions, out / "decisions.csv")
        self._print_rows(report, f"Real-time (run 0 of {s.runs})")
        logger.info("[REALTIME] managed beats unmanaged in %.2f%% of runs", 100 * fraction)
        return report, {"fraction_ratio_gt_1": fraction, "runs_completed": len(rows)}

    # ------------------------------------------------------------------
    # longterm
    # ------------------------------------------------------------------

    def run_longterm(self, ledger_path=None):
        params = {"ledger": str(ledger_path) if ledger_path else None}
        return self._job("longterm", self._longterm, params, ledger_path=ledger_path)

    def _longterm(self, record, ledger_path=None):
        s = self.scenario
        if ledger_path is not None:
            chi, source = read_ledger_csv(ledger_path), "file"
        elif s.ledger is not None:
            chi, source = np.asarray(s.ledger, dtype=float), "scenario"
        else:
            chi = np.array([d.profile.volume for d in self.history.days])
            source = "history" if s.history_path is not None else "generated"
        ledger = DailyLedger(chi, omega_bar=s.omega_bar)
        plans = s.all_plans()
        plan = s.bundle_plan()

        peaks = {}
        for p in plans:
            try:
                peaks[p.name] = {"peak_mb": peak_volume(p), "ce_at_peak": monthly_ce(p.cap_mb, p, s.omega_bar)}
            except DegeneratePlan as e:
                logger.warning("[LONGTERM] %s", e)
                peaks[p.name] = {"peak_mb": None, "degenerate": True}

        series = estimate_series(ledger, plan)
        summary = {"plan": plan.name, "ledger_days": ledger.days, "ledger_source": source,
                   "consumed_mb": ledger.consumed(), "peaks": peaks,
                   "remaining_daily_budget_mb": remaining_budget(ledger, plan)}
        if ledger.days and ledger.consumed() > 0:
            summary["estimated_ce"] = estimate_month(ledger, ledger.days, plan)
        if 0 < ledger.days < 30 and ledger.consumed() > 0:
            summary["next_day_choices"] = next_day_choices(ledger, plan)

        report = RunReport(command="longterm", seed=s.seed, summary=summary)
        out = self.out_dir
        write_csv(ce_curves(plans, omega_bar=s.omega_bar), out / "ce_curves.csv")
        write_csv(series, out / "estimate_series.csv")
        write_json(report, out / "report.json")
        if self.verbose:
            self.console.print(f"[bold]{plan.name}[/bold]: consumed {ledger.consumed():.2f} MB in "
                               f"{ledger.days} days, keep under "
                               f"{summary['remaining_daily_budget_mb']:.2f} MB/day to stay in the bundle")
        return report, {"plan": plan.name, "ledger_days": ledger.days}

    # ------------------------------------------------------------------
    # limited
    # ------------------------------------------------------------------

    def run_limited_management(self, max_apps: int | None = None, strategy: str | None = None):
        s = self.scenario
        max_apps = max_apps or s.max_apps or s.total_apps
        strategy = strategy or s.strategy
        return self._job("limited", self._limited, {"max_apps": max_apps, "strategy": strategy},
                         max_apps=max_apps, strategy=strategy)

    def _limited(self, record, max_apps: int, strategy: str):
        s = self.scenario
        N = s.total_apps
        if not 1 <= max_apps <= N:
            raise ModelError(f"max_apps must be in 1..{N}, got {max_apps}")
        strategies = STRATEGIES if strategy == "both" else (strategy,)

        inputs, problem = self._prepare()
        unscheduled = evaluate_profile(inputs.baseline, inputs.weights, self.prices)
        full = self._schedule(problem)

        curve, rows = [], [profile_row("unscheduled", unscheduled), profile_row("ce_scheduled", full)]
        for name in strategies:
            for m in range(1, N + 1):
                keep = select_apps(inputs, m, name)
                sub = self._schedule(build_subset_problem(problem, inputs.baseline, keep))
                combined = evaluate_profile(combine_profile(sub.profile.x, inputs.baseline, keep),
                                            inputs.weights, self.prices, iterations=sub.iterations)
                curve.append({"strategy": name, "max_apps": m,
                              "managed_apps": ";".join(str(a + 1) for a in keep),
                              "volume_mb": combined.volume, "cost_efficiency": combined.cost_efficiency,
                              "iterations": sub.iterations})
                if m == max_apps:
                    rows.append(profile_row(f"limited_{name}_{m}", combined))

        at_limit = {r["strategy"]: r["cost_efficiency"] for r in curve if r["max_apps"] == max_apps}
        report = RunReport(command="limited", seed=s.seed, rows=rows,
                           iterations={"ce_scheduled": full.iterations},
                           summary={"max_apps": max_apps, "num_apps": N, "ce_at_max_apps": at_limit})
        write_json(report, self.out_dir / "report.json")
        write_csv(pd.DataFrame(curve), self.out_dir / "limited_curve.csv")
        self._print_rows(report, f"Limited management ({max_apps} of {N} apps)")
        return report, {"ce_at_max_apps": at_limit}


# ============================================================================ #
# Main
# ============================================================================ #

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='Scenario JSON file')
    common.add_argument('--seed', type=int, help='Scenario seed (unsigned 64-bit)')
    common.add_argument('--runs', type=int, help='Number of seeded real-time runs')
    common.add_argument('--kappa', type=float, help='Slack threshold of the admission probability')
    common.add_argument('--strict-paper-matrix', action='store_true',
                        help='Drop the per-app upper-bound rows from the constraint matrix')
    common.add_argument('--history', type=str, help='History CSV written by gen (replaces the generated week)')
    common.add_argument('--out', type=str, help='Output directory')
    common.add_argument('--quiet', action='store_true', help='No console tables')

    parser = argparse.ArgumentParser(prog="ceplan", description="Cost-efficiency mobile data planner")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen", parents=[common], help="Generate the synthetic workload only")
    sub.add_parser("dayahead", parents=[common], help="Day-ahead pre-scheduling")
    rt = sub.add_parser("realtime", parents=[common], help="Seeded real-time simulations")
    rt.add_argument('--plan', type=str, help='Schedule CSV (slot, app1..appN) instead of solving')
    rt.add_argument('--decision-log', action='store_true', help='Write decisions.csv for run 0')
    lt = sub.add_parser("longterm", parents=[common], help="Bundle-plan analysis")
    lt.add_argument('--ledger', type=str, help='Daily ledger CSV (day, volume_mb)')
    lm = sub.add_parser("limited", parents=[common], help="Schedule a subset of apps only")
    lm.add_argument('--max-apps', type=int, help='Number of apps under management')
    lm.add_argument('--strategy', choices=["frequency", "demand", "both"], help='Exclusion strategy')
    return parser


def main(argv=None) -> int:
    from ceplan.flows.orchestrator import ceplan_orchestrator

    args = build_parser().parse_args(argv)
    settings = Settings()
    coloredlogs.install(level=settings.LOG_LEVEL, stream=sys.stderr,
                        fmt="%(asctime)s %(name)s %(levelname)s %(message)s")

    try:
        scenario = load_scenario(
            args.config,
            seed=args.seed,
            runs=args.runs,
            kappa=args.kappa,
            strict_paper_matrix=True if args.strict_paper_matrix else None,
            output_dir=args.out,
            history_path=args.history,
            log_decisions=True if getattr(args, "decision_log", False) else None,
            max_apps=getattr(args, "max_apps", None),
            strategy=getattr(args, "strategy", None),
        )
    except ValidationError as e:
        for err in e.errors():
            loc = ".".join(str(p) for p in err["loc"]) or "<scenario>"
            logger.error("[CONFIG] %s: %s", loc, err["msg"])
        return 2
    except (OSError, ValueError) as e:
        logger.error("[CONFIG] %s", e)
        return 2

    options = {}
    if args.command == "realtime":
        options["schedule_path"] = args.plan
    elif args.command == "longterm":
        options["ledger_path"] = args.ledger

    try:
        ceplan_orchestrator(args.command, scenario, scenario.output_dir, settings=settings,
                            verbose=not args.quiet, **options)
    except ModelError as e:
        logger.error("[CONFIG] %s", e)
        return 2
    except (SolverError, RealtimeError) as e:
        logger.error("[SOLVER] %s", e)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
