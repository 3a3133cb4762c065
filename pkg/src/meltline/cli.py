"""``meltline`` command line: solve, simulate and report on scenario files.

Exit codes: 0 success, 1 unreadable or malformed input, 2 scenario rejected by
validation (or incompatible report inputs), 3 simulation disagrees with the plan.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from typing import Optional

from . import __version__
from .balancing import (
    CyclePlan,
    IncrementReport,
    InvalidScenarioError,
    Mode,
    ProfitBreakdown,
    RevenueMismatchError,
    incremental_report,
    optimize,
)
from .gantt import render_svg, render_text
from .scenario import ScenarioParseError, ScenarioSchemaError, load_scenario_file, validate
from .schedule import Check, Conflict, ScheduleReport, build_schedule, cross_check, simulate

EXIT_OK, EXIT_INPUT, EXIT_INVALID, EXIT_CROSS_CHECK = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunResult:
    scenario: str
    mode: str
    plan: CyclePlan
    profit: ProfitBreakdown
    schedule: Optional[ScheduleReport] = None
    checks: Optional[list] = None
    increment: Optional[IncrementReport] = None
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "scenario": self.scenario,
            "mode": self.mode,
            "plan": dict(self.plan.cycles),
            "profit": asdict(self.profit),
            "schedule": None if self.schedule is None else {
                **asdict(self.schedule),
                "conflicts": [list(c) for c in self.schedule.conflicts],
            },
            "checks": None if self.checks is None else [list(c) for c in self.checks],
            "increment": None if self.increment is None else asdict(self.increment),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RunResult":
        sched = doc.get("schedule")
        if sched is not None:
            sched = ScheduleReport(**{**sched, "conflicts": [Conflict(*c) for c in sched["conflicts"]]})
        checks = doc.get("checks")
        return cls(
            scenario=doc["scenario"],
            mode=doc["mode"],
            plan=CyclePlan(doc["plan"], Mode(doc["mode"])),
            profit=ProfitBreakdown(**doc["profit"]),
            schedule=sched,
            checks=None if checks is None else [Check(*c) for c in checks],
            increment=None if doc.get("increment") is None else IncrementReport(**doc["increment"]),
            version=doc["version"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


def _load(path: str):
    try:
        scenario = load_scenario_file(path)
    except OSError as exc:
        raise CliError(EXIT_INPUT, f"cannot read {path}: {exc.strerror or exc}") from exc
    except (ScenarioParseError, ScenarioSchemaError) as exc:
        raise CliError(EXIT_INPUT, f"{path}: {exc}") from exc
    problems = validate(scenario)
    if problems:
        lines = "\n".join(f"  {v.code}: {v.message}" for v in problems)
        raise CliError(EXIT_INVALID, f"{path} failed validation:\n{lines}")
    return scenario


def _solve(path: str, mode: Mode):
    scenario = _load(path)
    try:
        opt = optimize(scenario, mode)
    except InvalidScenarioError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from exc
    return scenario, opt


def _plan_table(result: RunResult) -> list:
    p = result.profit
    lines = [f"scenario: {result.scenario}  mode: {result.mode}", "", "furnace     cycles/day  idle cost USD"]
    for fid, r in result.plan.cycles.items():
        lines.append(f"{fid:<11} {r:>10.4f}  {p.idle_cost_usd_per_furnace[fid]:>13,.2f}")
    lines.append("")
    for tid, c in p.effective_cycles_per_tank.items():
        lines.append(f"tank {tid}: {c:.4f} effective cycles/day")
    lines += [
        f"total tank cycles/day: {p.total_effective_cycles:.2f}",
        f"gross revenue:  {p.gross_revenue_usd:>14,.2f} USD/day",
        f"idle cost:      {p.total_idle_cost_usd:>14,.2f} USD/day",
        f"objective:      {p.objective_usd:>14,.2f} USD/day",
        "binding: " + (", ".join(p.binding_constraints) or "none"),
    ]
    return lines


def cmd_solve(args) -> int:
    mode = Mode(args.mode)
    scenario, opt = _solve(args.scenario, mode)
    result = RunResult(scenario.name, mode.value, opt.plan, opt.breakdown)
    sys.stdout.write(result.to_json() if args.json else "\n".join(_plan_table(result)) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    mode = Mode(args.mode)
    scenario, opt = _solve(args.scenario, mode)
    timeline = build_schedule(scenario, opt.plan)
    report = simulate(scenario, timeline)
    verdict = cross_check(scenario, opt.plan, report)
    result = RunResult(scenario.name, mode.value, opt.plan, opt.breakdown, report, list(verdict.checks))

    if args.gantt:
        with open(args.gantt, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_svg(scenario, timeline))
    if args.json:
        sys.stdout.write(result.to_json())
    else:
        lines = _plan_table(result) + ["", "simulated day:"]
        for tid, c in report.achieved_cycles_per_tank.items():
            lines.append(f"  tank {tid}: {c:.4f} cycles achieved")
        for rid, u in report.utilization_per_resource.items():
            lines.append(f"  {rid:<10} utilization {u:6.1%}")
        lines.append("cross-check:")
        for c in verdict.checks:
            lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        if args.gantt_text:
            lines += ["", render_text(scenario, timeline).rstrip("\n")]
        sys.stdout.write("\n".join(lines) + "\n")
    if args.gantt_text and args.json:
        sys.stderr.write(render_text(scenario, timeline))
    if not verdict.passed:
        for c in verdict.failures():
            print(f"cross-check failed: {c.name}: {c.detail}", file=sys.stderr)
        return EXIT_CROSS_CHECK
    return EXIT_OK


def cmd_report(args) -> int:
    mode = Mode(args.mode)
    base, base_opt = _solve(args.baseline, mode)
    new, new_opt = _solve(args.optimized, mode)
    try:
        inc = incremental_report(base, base_opt.plan, new, new_opt.plan)
    except RevenueMismatchError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from exc
    result = RunResult(new.name, mode.value, new_opt.plan, new_opt.breakdown, increment=inc)
    if args.json:
        sys.stdout.write(result.to_json())
        return EXIT_OK
    growth = "n/a" if inc.growth_percent is None else f"{inc.growth_percent:.2f} %"
    rows = [
        ("daily cycles before", f"{inc.baseline_daily_cycles:.2f}"),
        ("daily cycles after", f"{inc.optimized_daily_cycles:.2f}"),
        ("output per cycle", f"{inc.revenue_per_cycle_usd:,.2f} USD"),
        ("additional operators", f"{inc.additional_labor_cost_usd_per_day:,.2f} USD/day"),
        ("increment", f"{inc.increment_usd_per_day:,.2f} USD/day"),
        ("net before", f"{inc.baseline_net_usd_per_day:,.2f} USD/day"),
        ("net after", f"{inc.optimized_net_usd_per_day:,.2f} USD/day"),
        ("growth", growth),
    ]
    sys.stdout.write(f"{base.name} -> {new.name} ({mode.value})\n")
    sys.stdout.write("".join(f"{k:<22}{v:>22}\n" for k, v in rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meltline", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.CONTINUOUS.value)
        p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("solve", help="optimise daily cycle counts")
    p.add_argument("scenario")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="optimise, build the day timeline and audit it")
    p.add_argument("scenario")
    common(p)
    p.add_argument("--gantt", metavar="PATH", help="write an SVG Gantt chart")
    p.add_argument("--gantt-text", action="store_true", help="print a text Gantt chart")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="daily profit increment between two scenarios")
    p.add_argument("baseline")
    p.add_argument("optimized")
    common(p)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"meltline: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
