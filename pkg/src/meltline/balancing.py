"""Profit-maximising cycle plans for a melting line.

One decision variable per furnace: its number of melt cycles per day. Each
cycle poured into tank ``t`` yields ``Eff_f * Eff_cast,t`` effective casting
cycles, each worth ``rods_per_cycle * margin_per_rod`` USD. Unused furnace
minutes cost ``idle_cost_rate`` per minute. Expanding the idle cost

    (Cap_f - CT_f r_f) CR_f = Cap_f CR_f - CT_f CR_f r_f

moves ``-sum(Cap_f CR_f)`` into the objective constant and adds ``CT_f CR_f`` to
each furnace's coefficient.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

from .lp import INT_TOL, LpProblem, LpSolution, Status, solve_lp, solve_milp
from .scenario import Scenario, Violation, validate

BINDING_TOL = 1e-6
MAX_ASSIGNMENTS = 10_000


class InvalidScenarioError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(f"{v.code}: {v.message}" for v in self.violations)
        super().__init__(f"invalid scenario: {lines}")


class InternalConsistencyError(RuntimeError):
    """The solver reported a status that cannot occur for a valid scenario."""


class RevenueMismatchError(ValueError):
    pass


class AssignmentSearchTooLarge(ValueError):
    pass


class Mode(str, Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"


@dataclass(frozen=True)
class CyclePlan:
    cycles: dict
    mode: Mode = Mode.CONTINUOUS

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "cycles", {k: float(v) for k, v in self.cycles.items()})
        for fid, r in self.cycles.items():
            if not r >= 0:
                raise ValueError(f"cycle count for {fid!r} must be >= 0, got {r}")
            if self.mode is Mode.INTEGER and abs(r - round(r)) > INT_TOL:
                raise ValueError(f"integer plan has fractional count {r} for {fid!r}")

    def scaled(self, k: float) -> "CyclePlan":
        return CyclePlan({f: k * r for f, r in self.cycles.items()}, Mode.CONTINUOUS)

    @property
    def total(self) -> float:
        return sum(self.cycles.values())


@dataclass(frozen=True)
class ProfitBreakdown:
    gross_revenue_usd: float
    idle_cost_usd_per_furnace: dict
    objective_usd: float
    effective_cycles_per_tank: dict
    binding_constraints: list = field(default_factory=list)
    violated_constraints: list = field(default_factory=list)

    @property
    def total_idle_cost_usd(self) -> float:
        return sum(self.idle_cost_usd_per_furnace.values())

    @property
    def total_effective_cycles(self) -> float:
        return sum(self.effective_cycles_per_tank.values())

    @property
    def feasible(self) -> bool:
        return not self.violated_constraints


@dataclass(frozen=True)
class IncrementReport:
    baseline_daily_cycles: float
    optimized_daily_cycles: float
    revenue_per_cycle_usd: float
    additional_labor_cost_usd_per_day: float
    increment_usd_per_day: float
    baseline_net_usd_per_day: float
    optimized_net_usd_per_day: float
    growth_percent: Optional[float]


@dataclass(frozen=True)
class Program:
    """An ``LpProblem`` plus the legend mapping its columns and rows back to the plant."""

    problem: LpProblem
    furnace_ids: tuple
    constraint_ids: tuple


class Optimum(NamedTuple):
    plan: CyclePlan
    breakdown: ProfitBreakdown
    solution: LpSolution


class AssignmentResult(NamedTuple):
    assignment: dict
    plan: CyclePlan
    breakdown: ProfitBreakdown


def _require_valid(scenario: Scenario, allow_unfed_tanks=False) -> None:
    problems = validate(scenario, allow_unfed_tanks=allow_unfed_tanks)
    if problems:
        raise InvalidScenarioError(problems)


def cycle_value_usd(scenario: Scenario, furnace) -> float:
    """Revenue of one melt cycle of ``furnace`` after furnace and casting losses."""
    tank = scenario.tank(furnace.tank_id)
    return furnace.output_efficiency * tank.casting_efficiency * tank.revenue_per_cycle_usd


def build_program(scenario: Scenario, mode: Mode = Mode.CONTINUOUS, *,
                  allow_unfed_tanks: bool = False) -> Program:
    _require_valid(scenario, allow_unfed_tanks)
    mode = Mode(mode)
    furnaces = scenario.furnaces
    n = len(furnaces)
    objective = [
        cycle_value_usd(scenario, f) + f.cycle_time_min * f.idle_cost_rate_usd_per_min
        for f in furnaces
    ]
    constant = -sum(f.daily_capacity_min * f.idle_cost_rate_usd_per_min for f in furnaces)

    rows, rhs, ids = [], [], []
    for j, f in enumerate(furnaces):
        row = [0.0] * n
        row[j] = f.cycle_time_min
        rows.append(row)
        rhs.append(f.daily_capacity_min)
        ids.append(f"furnace:{f.id}")
    for t in scenario.tanks:
        row = [0.0] * n
        fed = False
        for j, f in enumerate(furnaces):
            if f.tank_id == t.id:
                row[j] = t.cycle_time_min * f.output_efficiency * t.casting_efficiency
                fed = True
        if not fed:
            continue
        rows.append(row)
        rhs.append(t.daily_capacity_min)
        ids.append(f"tank:{t.id}")

    problem = LpProblem(objective, rows, rhs, [mode is Mode.INTEGER] * n, constant)
    return Program(problem, tuple(f.id for f in furnaces), tuple(ids))


def evaluate_plan(scenario: Scenario, plan: CyclePlan) -> ProfitBreakdown:
    """Recompute revenue, idle cost and constraint slack at ``plan`` directly.

    Infeasible plans are evaluated anyway; the offending constraint ids are listed
    in ``violated_constraints``.
    """
    ids = [f.id for f in scenario.furnaces]
    if sorted(plan.cycles) != sorted(ids):
        raise ValueError(f"plan covers {sorted(plan.cycles)}, scenario has furnaces {sorted(ids)}")

    idle = {}
    binding, violated = [], []

    def slack(cid, used, cap):
        gap = cap - used
        if gap < -BINDING_TOL:
            violated.append(cid)
        elif gap <= BINDING_TOL:
            binding.append(cid)

    for f in scenario.furnaces:
        used = f.cycle_time_min * plan.cycles[f.id]
        spare = f.daily_capacity_min - used
        if -BINDING_TOL < spare < 0:  # rounding on a saturated furnace
            spare = 0.0
        idle[f.id] = spare * f.idle_cost_rate_usd_per_min
        slack(f"furnace:{f.id}", used, f.daily_capacity_min)

    effective = {}
    gross = 0.0
    for t in scenario.tanks:
        feeders = scenario.furnaces_of(t.id)
        if not feeders:
            effective[t.id] = 0.0
            continue
        eff = sum(plan.cycles[f.id] * f.output_efficiency for f in feeders) * t.casting_efficiency
        effective[t.id] = eff
        gross += eff * t.revenue_per_cycle_usd
        slack(f"tank:{t.id}", t.cycle_time_min * eff, t.daily_capacity_min)

    return ProfitBreakdown(
        gross_revenue_usd=gross,
        idle_cost_usd_per_furnace=idle,
        objective_usd=gross - sum(idle.values()),
        effective_cycles_per_tank=effective,
        binding_constraints=binding,
        violated_constraints=violated,
    )


def optimize(scenario: Scenario, mode: Mode = Mode.CONTINUOUS, *,
             allow_unfed_tanks: bool = False) -> Optimum:
    mode = Mode(mode)
    program = build_program(scenario, mode, allow_unfed_tanks=allow_unfed_tanks)
    solve = solve_milp if mode is Mode.INTEGER else solve_lp
    sol = solve(program.problem)
    if sol.status is not Status.OPTIMAL:
        raise InternalConsistencyError(f"solver returned {sol.status.value} for a valid scenario")
    values = sol.point
    if mode is Mode.INTEGER:
        values = [float(round(v)) for v in values]
    plan = CyclePlan(dict(zip(program.furnace_ids, values)), mode)
    return Optimum(plan, evaluate_plan(scenario, plan), sol)


def revenue_per_cycle(*scenarios: Scenario) -> float:
    """The single per-cycle value shared by every tank in ``scenarios``."""
    values = {t.revenue_per_cycle_usd for s in scenarios for t in s.tanks}
    if len(values) != 1:
        raise RevenueMismatchError(
            f"tanks disagree on revenue per cycle: {sorted(values)} USD"
        )
    return values.pop()


def increment_from_figures(baseline_cycles: float, optimized_cycles: float,
                           revenue_per_cycle_usd: float,
                           additional_labor_usd: float) -> IncrementReport:
    """Daily profit increment with baseline labour as the reference level."""
    increment = (optimized_cycles - baseline_cycles) * revenue_per_cycle_usd - additional_labor_usd
    base_net = baseline_cycles * revenue_per_cycle_usd
    opt_net = optimized_cycles * revenue_per_cycle_usd - additional_labor_usd
    growth = None if base_net == 0 else (opt_net - base_net) / base_net * 100.0
    return IncrementReport(
        baseline_daily_cycles=baseline_cycles,
        optimized_daily_cycles=optimized_cycles,
        revenue_per_cycle_usd=revenue_per_cycle_usd,
        additional_labor_cost_usd_per_day=additional_labor_usd,
        increment_usd_per_day=increment,
        baseline_net_usd_per_day=base_net,
        optimized_net_usd_per_day=opt_net,
        growth_percent=growth,
    )


def incremental_report(baseline: Scenario, baseline_plan: CyclePlan,
                       optimized: Scenario, optimized_plan: CyclePlan) -> IncrementReport:
    rate = revenue_per_cycle(baseline, optimized)
    before = evaluate_plan(baseline, baseline_plan).total_effective_cycles
    after = evaluate_plan(optimized, optimized_plan).total_effective_cycles
    extra_labor = optimized.labor.daily_labor_cost - baseline.labor.daily_labor_cost
    return increment_from_figures(before, after, rate, extra_labor)


# -- assignment search -------------------------------------------------------


def count_assignments(n_furnaces: int, n_tanks: int, per_tank: int = 2) -> int:
    """Number of furnace->tank maps with at most ``per_tank`` furnaces per tank."""
    # ways[k] = assignments of k labelled furnaces to the tanks seen so far
    ways = [1] + [0] * n_furnaces
    for _ in range(n_tanks):
        nxt = [0] * (n_furnaces + 1)
        for k, w in enumerate(ways):
            if not w:
                continue
            for extra in range(per_tank + 1):
                if k + extra <= n_furnaces:
                    nxt[k + extra] += w * math.comb(n_furnaces - k, extra)
        ways = nxt
    return ways[n_furnaces]


def legal_assignments(furnace_ids, tank_ids):
    """Yield assignment tuples (tank per sorted furnace) in lexicographic order."""
    for combo in itertools.product(sorted(tank_ids), repeat=len(furnace_ids)):
        counts = {}
        for t in combo:
            counts[t] = counts.get(t, 0) + 1
        if max(counts.values(), default=0) <= 2:
            yield combo


def optimize_assignment(scenario: Scenario, mode: Mode = Mode.CONTINUOUS) -> AssignmentResult:
    """Best furnace->tank assignment under the two-feeders-per-tank rule.

    Ties in objective go to the lexicographically smallest assignment, read as
    the tuple of tank ids for furnaces sorted by id.
    """
    furnace_ids = sorted(f.id for f in scenario.furnaces)
    tank_ids = sorted(t.id for t in scenario.tanks)
    size = count_assignments(len(furnace_ids), len(tank_ids))
    if size > MAX_ASSIGNMENTS:
        raise AssignmentSearchTooLarge(
            f"{size} legal assignments for {len(furnace_ids)} furnaces and "
            f"{len(tank_ids)} tanks exceeds the limit of {MAX_ASSIGNMENTS}"
        )
    if size == 0:
        raise InvalidScenarioError([Violation(
            "RATIO_EXCEEDED",
            f"{len(furnace_ids)} furnaces cannot be spread over {len(tank_ids)} tanks",
        )])

    results = []
    for combo in legal_assignments(furnace_ids, tank_ids):
        assignment = dict(zip(furnace_ids, combo))
        candidate = scenario.with_assignment(assignment)
        opt = optimize(candidate, mode, allow_unfed_tanks=True)
        results.append((combo, assignment, opt))

    best_value = max(opt.breakdown.objective_usd for _, _, opt in results)
    tol = 1e-9 * max(1.0, abs(best_value))
    combo, assignment, opt = min(
        (r for r in results if r[2].breakdown.objective_usd >= best_value - tol),
        key=lambda r: r[0],
    )
    return AssignmentResult(assignment, opt.plan, opt.breakdown)
