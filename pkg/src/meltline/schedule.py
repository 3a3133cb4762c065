"""Turn a cycle plan into a timed day of melts, pours and casts, and audit it.

The day is treated as one period of continuous operation: an operation that
runs past the end of the horizon is split, and its remainder appears at the
start of the day as the carry-over from the previous day (``continued=True``).
Counting cast minutes over one period then gives the steady daily rate.

Dispatch per tank: the planned cycles of each feeding furnace are split into
``K = max(ceil(r_f))`` equal batches, so no batch exceeds one full cycle. Each
round, feeders pour in earliest-ready order (shortest batch melt first, furnace
id on ties) and the tank casts each pour straight away. A round lasts as long as
its slowest part: the longest batch melt or the sum of the round's casts.
Pours are instantaneous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

from .balancing import CyclePlan, evaluate_plan
from .scenario import Scenario

TIME_EPS = 1e-9
CHECK_EPS = 1e-6
CYCLE_TOL = 0.01
REVENUE_TOL = 0.005


class UnknownResourceError(KeyError):
    pass


class EventKind(str, Enum):
    MELT = "MELT"
    POUR = "POUR"
    CAST = "CAST"


# a pour empties the furnace before its next melt starts at the same instant
_KIND_ORDER = {EventKind.POUR: 0, EventKind.MELT: 1, EventKind.CAST: 2}


@dataclass(frozen=True)
class Event:
    resource: str
    kind: EventKind
    start_min: float
    end_min: float
    cycle_index: int
    link: Optional[str] = None  # POUR: receiving tank; CAST: furnace whose metal is cast
    continued: bool = False

    @property
    def duration(self) -> float:
        return self.end_min - self.start_min


@dataclass(frozen=True)
class Timeline:
    events: tuple
    horizon_min: float

    def for_resource(self, resource: str) -> list:
        return [e for e in self.events if e.resource == resource]


class Conflict(NamedTuple):
    code: str
    message: str


@dataclass(frozen=True)
class ScheduleReport:
    achieved_cycles_per_tank: dict
    utilization_per_resource: dict
    idle_minutes_per_furnace: dict
    idle_minutes_per_tank: dict
    conflicts: list = field(default_factory=list)


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class Verdict:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


def horizon_of(scenario: Scenario) -> float:
    caps = [f.daily_capacity_min for f in scenario.furnaces]
    caps += [t.daily_capacity_min for t in scenario.tanks]
    return float(max(caps))


def _wrap(start: float, end: float, horizon: float) -> list:
    """Fold [start, end) into [0, horizon) pieces; returns (start, end, continued) triples."""
    shift = math.floor(start / horizon) * horizon
    start, end = start - shift, end - shift
    if start >= horizon - TIME_EPS:
        start, end = start - horizon, end - horizon
    start = max(start, 0.0)
    pieces = []
    continued = False
    while True:
        if end <= horizon + TIME_EPS:
            pieces.append((start, min(end, horizon), continued))
            return pieces
        pieces.append((start, horizon, continued))
        start, end, continued = 0.0, end - horizon, True


def build_schedule(scenario: Scenario, plan: CyclePlan) -> Timeline:
    ids = sorted(f.id for f in scenario.furnaces)
    if sorted(plan.cycles) != ids:
        raise ValueError(f"plan covers {sorted(plan.cycles)}, scenario has furnaces {ids}")
    horizon = horizon_of(scenario)
    events = []

    for tank in scenario.tanks:
        feeders = [f for f in scenario.furnaces_of(tank.id) if plan.cycles[f.id] > TIME_EPS]
        if not feeders:
            continue
        rounds = max(math.ceil(plan.cycles[f.id] - TIME_EPS) for f in feeders)
        batches = []
        for f in feeders:
            share = plan.cycles[f.id] / rounds
            melt = share * f.cycle_time_min
            cast = share * f.output_efficiency * tank.casting_efficiency * tank.cycle_time_min
            batches.append((melt, f.id, cast, f))
        batches.sort(key=lambda b: (b[0], b[1]))

        offsets, acc = [], 0.0
        for melt, _, cast, _ in batches:
            offsets.append(acc)
            acc += cast
        round_len = max(acc, max(b[0] for b in batches))
        first_pour = max(b[0] - off for b, off in zip(batches, offsets))

        for k in range(rounds):
            for i, (melt, fid, cast, f) in enumerate(batches):
                pour = first_pour + k * round_len + offsets[i]
                for s, e, cont in _wrap(pour - melt, pour, horizon):
                    events.append(Event(fid, EventKind.MELT, s, e, k, continued=cont))
                p = _wrap(pour, pour, horizon)[0][0]
                events.append(Event(fid, EventKind.POUR, p, p, k, link=tank.id))
                cast_index = k * len(batches) + i
                for s, e, cont in _wrap(pour, pour + cast, horizon):
                    events.append(Event(tank.id, EventKind.CAST, s, e, cast_index,
                                        link=fid, continued=cont))

    events.sort(key=lambda e: (e.start_min, _KIND_ORDER[e.kind], e.resource, e.cycle_index))
    return Timeline(tuple(events), horizon)


def _merged(intervals) -> list:
    out = []
    for s, e in sorted(intervals):
        if out and s <= out[-1][1]:
            out[-1][1] = max(out[-1][1], e)
        else:
            out.append([s, e])
    return out


def _cyclic_gap(a: float, b: float, horizon: float) -> float:
    """Forward distance from time a to time b on a circular day."""
    return (b - a) % horizon


def simulate(scenario: Scenario, timeline: Timeline) -> ScheduleReport:
    """Audit ``timeline`` using its events only; the plan is never consulted."""
    furnaces = {f.id: f for f in scenario.furnaces}
    tanks = {t.id: t for t in scenario.tanks}
    H = timeline.horizon_min
    conflicts = []
    flag = lambda code, msg: conflicts.append(Conflict(code, msg))

    busy = {rid: [] for rid in (*furnaces, *tanks)}
    melts = {}
    pours = []
    for ev in timeline.events:
        if ev.resource not in busy:
            raise UnknownResourceError(ev.resource)
        if ev.start_min < -TIME_EPS or ev.end_min > H + TIME_EPS:
            flag("OUT_OF_HORIZON", f"{ev.kind.value} on {ev.resource} at "
                                   f"[{ev.start_min:g}, {ev.end_min:g}] leaves [0, {H:g}]")
        is_furnace = ev.resource in furnaces
        if ev.kind is EventKind.POUR:
            if not is_furnace:
                flag("WRONG_RESOURCE", f"POUR recorded on tank {ev.resource}")
                continue
            if ev.link not in tanks:
                raise UnknownResourceError(ev.link)
            pours.append(ev)
            continue
        if ev.end_min <= ev.start_min:
            flag("EMPTY_INTERVAL", f"{ev.kind.value} on {ev.resource} has no duration")
        if (ev.kind is EventKind.MELT) != is_furnace:
            flag("WRONG_RESOURCE", f"{ev.kind.value} recorded on {ev.resource}")
            continue
        busy[ev.resource].append((ev.start_min, ev.end_min))
        if ev.kind is EventKind.MELT:
            rec = melts.setdefault((ev.resource, ev.cycle_index), [None, 0.0])
            if not ev.continued:
                rec[0] = ev.start_min
            rec[1] += ev.duration

    for rid, spans in busy.items():
        spans = sorted(spans)
        for (s0, e0), (s1, e1) in zip(spans, spans[1:]):
            if s1 < e0 - CHECK_EPS:
                code = "FURNACE_OVERLAP" if rid in furnaces else "TANK_OVERLAP"
                flag(code, f"{rid}: [{s0:g}, {e0:g}] overlaps [{s1:g}, {e1:g}]")

    feeders = {t: set() for t in tanks}
    pour_times = {t: [] for t in tanks}
    for p in pours:
        feeders[p.link].add(p.resource)
        pour_times[p.link].append((p.start_min, p.resource))
        rec = melts.get((p.resource, p.cycle_index))
        if rec is None or rec[0] is None:
            flag("POUR_BEFORE_MELT", f"{p.resource} pours cycle {p.cycle_index} with no melt")
            continue
        elapsed = _cyclic_gap(rec[0], p.start_min, H)
        if elapsed == 0.0 and rec[1] > 0:
            elapsed = H
        if elapsed < rec[1] - CHECK_EPS:
            flag("POUR_BEFORE_MELT", f"{p.resource} pours cycle {p.cycle_index} at "
                                     f"{p.start_min:g} before its melt completes")
    for t, fs in feeders.items():
        if len(fs) > 2:
            flag("RATIO_EXCEEDED", f"tank {t} receives pours from {len(fs)} furnaces")

    for ev in timeline.events:
        if ev.kind is not EventKind.CAST or ev.continued or ev.resource not in tanks:
            continue
        ok = any(
            min(_cyclic_gap(ev.start_min, pt, H), _cyclic_gap(pt, ev.start_min, H)) <= CHECK_EPS
            and (ev.link is None or ev.link == src)
            for pt, src in pour_times[ev.resource]
        )
        if not ok:
            flag("CAST_WITHOUT_POUR", f"cast {ev.cycle_index} on {ev.resource} at "
                                      f"{ev.start_min:g} has no matching pour")

    achieved, util, idle_f, idle_t = {}, {}, {}, {}
    for rid in busy:
        minutes = sum(e - s for s, e in _merged(busy[rid]))
        cap = furnaces[rid].daily_capacity_min if rid in furnaces else tanks[rid].daily_capacity_min
        util[rid] = minutes / cap
        if minutes > cap + CHECK_EPS:
            flag("CAPACITY_EXCEEDED", f"{rid} busy {minutes:g} min of {cap:g} available")
        if rid in furnaces:
            idle_f[rid] = cap - minutes
        else:
            idle_t[rid] = cap - minutes
            achieved[rid] = minutes / tanks[rid].cycle_time_min

    return ScheduleReport(achieved, util, idle_f, idle_t, conflicts)


def cross_check(scenario: Scenario, plan: CyclePlan, report: ScheduleReport) -> Verdict:
    """Compare the simulated day against the plan's own accounting."""
    breakdown = evaluate_plan(scenario, plan)
    checks = []
    if breakdown.violated_constraints:
        checks.append(Check("CAPACITY", False,
                            "plan exceeds " + ", ".join(breakdown.violated_constraints)))
    else:
        checks.append(Check("CAPACITY", True, "plan within every capacity"))
    checks.append(Check(
        "CONFLICTS", not report.conflicts,
        "; ".join(f"{c.code}: {c.message}" for c in report.conflicts) or "timeline is conflict-free",
    ))
    revenue = 0.0
    for t in scenario.tanks:
        got = report.achieved_cycles_per_tank.get(t.id, 0.0)
        want = breakdown.effective_cycles_per_tank.get(t.id, 0.0)
        checks.append(Check(f"CYCLES:{t.id}", abs(got - want) <= CYCLE_TOL,
                            f"achieved {got:.4f} vs planned {want:.4f}"))
        revenue += got * t.revenue_per_cycle_usd
    gross = breakdown.gross_revenue_usd
    ok = abs(revenue - gross) <= REVENUE_TOL * abs(gross) if gross else abs(revenue) <= CHECK_EPS
    checks.append(Check("REVENUE", ok, f"simulated {revenue:.2f} vs planned {gross:.2f} USD"))
    return Verdict(checks)
