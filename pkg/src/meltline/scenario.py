"""Plant description for a melting/casting line and its JSON file format."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, fields, replace
from typing import Any, NamedTuple


class ScenarioParseError(ValueError):
    """The document is not well-formed JSON (or holds NaN/Infinity)."""


class ScenarioSchemaError(ValueError):
    """The document parsed but does not match the scenario schema."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class Furnace:
    id: str
    cycle_time_min: float
    daily_capacity_min: float
    output_efficiency: float
    idle_cost_rate_usd_per_min: float
    tank_id: str


@dataclass(frozen=True)
class TankCastingLine:
    id: str
    cycle_time_min: float
    daily_capacity_min: float
    casting_efficiency: float
    rods_per_cycle: int
    margin_per_rod_usd: float

    @property
    def revenue_per_cycle_usd(self) -> float:
        return self.rods_per_cycle * self.margin_per_rod_usd


@dataclass(frozen=True)
class LaborPlan:
    workers_total: int
    shifts_per_day: int
    wage_usd_per_worker_per_day: float

    @property
    def daily_labor_cost(self) -> float:
        return self.workers_total * self.wage_usd_per_worker_per_day


@dataclass(frozen=True)
class Scenario:
    furnaces: tuple
    tanks: tuple
    labor: LaborPlan
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "furnaces", tuple(self.furnaces))
        object.__setattr__(self, "tanks", tuple(self.tanks))

    def tank(self, tank_id: str) -> TankCastingLine:
        for t in self.tanks:
            if t.id == tank_id:
                return t
        raise KeyError(tank_id)

    def furnaces_of(self, tank_id: str) -> list:
        return [f for f in self.furnaces if f.tank_id == tank_id]

    def with_assignment(self, assignment: dict) -> "Scenario":
        """Copy with furnace tank_id fields replaced from ``assignment``."""
        furnaces = [replace(f, tank_id=assignment.get(f.id, f.tank_id)) for f in self.furnaces]
        return replace(self, furnaces=tuple(furnaces))


class Violation(NamedTuple):
    code: str
    message: str


def _finite(*values) -> bool:
    return all(isinstance(v, (int, float)) and math.isfinite(v) for v in values)


def validate(scenario: Scenario, *, allow_unfed_tanks: bool = False) -> list:
    """Return every broken invariant as a ``Violation``; an empty list means valid.

    ``allow_unfed_tanks`` relaxes only the lower end of the furnaces-per-tank rule,
    which assignment search needs when it leaves a tank without feeders.
    """
    out: list[Violation] = []
    add = lambda code, msg: out.append(Violation(code, msg))

    if not scenario.furnaces:
        add("NO_FURNACES", "scenario needs at least one furnace")
    if not scenario.tanks:
        add("NO_TANKS", "scenario needs at least one tank/casting line")

    ids = [f.id for f in scenario.furnaces] + [t.id for t in scenario.tanks]
    for rid, count in sorted(Counter(ids).items()):
        if count > 1:
            add("DUPLICATE_ID", f"id {rid!r} is used {count} times")

    tank_ids = {t.id for t in scenario.tanks}
    for f in scenario.furnaces:
        where = f"furnace {f.id!r}"
        if not _finite(f.cycle_time_min, f.daily_capacity_min, f.output_efficiency,
                       f.idle_cost_rate_usd_per_min):
            add("NON_FINITE", f"{where} has a non-finite numeric field")
            continue
        if f.cycle_time_min <= 0:
            add("CYCLE_TIME_NONPOSITIVE", f"{where}: cycle_time_min must be > 0")
        if f.daily_capacity_min <= 0:
            add("CAPACITY_NONPOSITIVE", f"{where}: daily_capacity_min must be > 0")
        if 0 < f.daily_capacity_min < f.cycle_time_min:
            add("CYCLE_EXCEEDS_CAPACITY", f"{where}: one cycle does not fit in a day")
        if not 0 < f.output_efficiency <= 1:
            add("EFFICIENCY_OUT_OF_RANGE", f"{where}: output_efficiency must lie in (0, 1]")
        if f.idle_cost_rate_usd_per_min < 0:
            add("NEGATIVE_IDLE_COST", f"{where}: idle_cost_rate_usd_per_min must be >= 0")
        if f.tank_id not in tank_ids:
            add("ORPHAN_FURNACE", f"{where} pours into unknown tank {f.tank_id!r}")

    for t in scenario.tanks:
        where = f"tank {t.id!r}"
        if not _finite(t.cycle_time_min, t.daily_capacity_min, t.casting_efficiency,
                       t.rods_per_cycle, t.margin_per_rod_usd):
            add("NON_FINITE", f"{where} has a non-finite numeric field")
            continue
        if t.cycle_time_min <= 0:
            add("CYCLE_TIME_NONPOSITIVE", f"{where}: cycle_time_min must be > 0")
        if t.daily_capacity_min <= 0:
            add("CAPACITY_NONPOSITIVE", f"{where}: daily_capacity_min must be > 0")
        if not 0 < t.casting_efficiency <= 1:
            add("EFFICIENCY_OUT_OF_RANGE", f"{where}: casting_efficiency must lie in (0, 1]")
        if isinstance(t.rods_per_cycle, bool) or t.rods_per_cycle != int(t.rods_per_cycle) \
                or t.rods_per_cycle <= 0:
            add("ROD_COUNT_INVALID", f"{where}: rods_per_cycle must be a positive integer")
        if t.margin_per_rod_usd < 0:
            add("NEGATIVE_MARGIN", f"{where}: margin_per_rod_usd must be >= 0")
        feeders = len(scenario.furnaces_of(t.id))
        if feeders > 2:
            add("RATIO_EXCEEDED", f"{where} is fed by {feeders} furnaces; at most 2 allowed")
        elif feeders == 0 and not allow_unfed_tanks:
            add("UNFED_TANK", f"{where} has no furnace pouring into it")

    lab = scenario.labor
    if not _finite(lab.workers_total, lab.shifts_per_day, lab.wage_usd_per_worker_per_day):
        add("NON_FINITE", "labor has a non-finite numeric field")
    else:
        if lab.workers_total < 0 or lab.workers_total != int(lab.workers_total):
            add("LABOR_INVALID", "workers_total must be a nonnegative integer")
        if lab.shifts_per_day < 1 or lab.shifts_per_day != int(lab.shifts_per_day):
            add("LABOR_INVALID", "shifts_per_day must be an integer >= 1")
        if lab.wage_usd_per_worker_per_day < 0:
            add("LABOR_INVALID", "wage_usd_per_worker_per_day must be >= 0")
    return out


# -- JSON ---------------------------------------------------------------------

_TOP_KEYS = ("name", "furnaces", "tanks", "labor")
_INT_FIELDS = {"rods_per_cycle", "workers_total", "shifts_per_day"}
_STR_FIELDS = {"id", "tank_id"}


def _reject_constant(token):
    raise ScenarioParseError(f"non-finite number {token} is not allowed")


def _build(cls, obj: Any, path: str):
    if not isinstance(obj, dict):
        raise ScenarioSchemaError(path, f"expected an object, got {type(obj).__name__}")
    names = [f.name for f in fields(cls)]
    for key in obj:
        if key not in names:
            raise ScenarioSchemaError(f"{path}.{key}", "unknown field")
    kwargs = {}
    for name in names:
        if name not in obj:
            raise ScenarioSchemaError(f"{path}.{name}", "missing field")
        value = obj[name]
        if name in _STR_FIELDS:
            ok = isinstance(value, str)
        elif name in _INT_FIELDS:
            ok = isinstance(value, int) and not isinstance(value, bool)
        else:
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if not ok:
            raise ScenarioSchemaError(f"{path}.{name}", f"wrong type {type(value).__name__}")
        kwargs[name] = value
    return cls(**kwargs)


def scenario_from_dict(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioSchemaError("$", "top level must be an object")
    for key in doc:
        if key not in _TOP_KEYS:
            raise ScenarioSchemaError(f"$.{key}", "unknown field")
    for key in _TOP_KEYS:
        if key not in doc:
            raise ScenarioSchemaError(f"$.{key}", "missing field")
    if not isinstance(doc["name"], str):
        raise ScenarioSchemaError("$.name", "expected a string")
    for key in ("furnaces", "tanks"):
        if not isinstance(doc[key], list):
            raise ScenarioSchemaError(f"$.{key}", "expected an array")
    furnaces = [_build(Furnace, f, f"$.furnaces[{i}]") for i, f in enumerate(doc["furnaces"])]
    tanks = [_build(TankCastingLine, t, f"$.tanks[{i}]") for i, t in enumerate(doc["tanks"])]
    labor = _build(LaborPlan, doc["labor"], "$.labor")
    return Scenario(tuple(furnaces), tuple(tanks), labor, doc["name"])


def load_scenario(text: str) -> Scenario:
    """Parse a scenario document. Does not validate; call ``validate`` for that."""
    if not text.strip():
        raise ScenarioParseError("empty document")
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(doc)


def scenario_to_dict(scenario: Scenario) -> dict:
    row = lambda obj: {f.name: getattr(obj, f.name) for f in fields(obj)}
    return {
        "name": scenario.name,
        "furnaces": [row(f) for f in scenario.furnaces],
        "tanks": [row(t) for t in scenario.tanks],
        "labor": row(scenario.labor),
    }


def save_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2, allow_nan=False) + "\n"


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def bundled_path(name: str):
    """Path of a scenario shipped with the package, e.g. ``case_study_optimized``."""
    from importlib import resources

    stem = name[:-5] if name.endswith(".json") else name
    return resources.files("meltline") / "data" / f"{stem}.json"


def load_bundled(name: str) -> Scenario:
    return load_scenario(bundled_path(name).read_text(encoding="utf-8"))
