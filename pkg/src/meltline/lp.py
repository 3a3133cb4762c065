"""Dense-tableau linear and mixed-integer programming.

Problems are in the canonical maximisation form::

    max  p.x + constant
    s.t. A x <= b,  x >= 0

``solve_lp`` runs a two-phase simplex with Bland's rule; ``solve_milp`` wraps it
in a depth-first branch-and-bound for variables flagged as integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

FEAS_TOL = 1e-7
INT_TOL = 1e-6
PRUNE_EPS = 1e-9
MAX_PIVOTS = 10_000

_PIVOT_EPS = 1e-9
_COST_EPS = 1e-9


class LpInputError(ValueError):
    """Raised for malformed problems (shape mismatch, NaN, infinity)."""


class SolverLimitError(RuntimeError):
    pass


class Status(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclass(frozen=True)
class LpProblem:
    objective: tuple
    rows: tuple = ()
    rhs: tuple = ()
    integrality: tuple = ()
    objective_constant: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "objective", tuple(float(v) for v in self.objective))
        object.__setattr__(self, "rows", tuple(tuple(float(v) for v in r) for r in self.rows))
        object.__setattr__(self, "rhs", tuple(float(v) for v in self.rhs))
        flags = tuple(bool(f) for f in self.integrality) or (False,) * len(self.objective)
        object.__setattr__(self, "integrality", flags)
        object.__setattr__(self, "objective_constant", float(self.objective_constant))

    @property
    def n(self) -> int:
        return len(self.objective)

    @property
    def m(self) -> int:
        return len(self.rows)

    def check(self) -> None:
        n = self.n
        if n < 1:
            raise LpInputError("problem needs at least one variable")
        if len(self.rhs) != self.m:
            raise LpInputError(f"{self.m} constraint rows but {len(self.rhs)} right-hand sides")
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise LpInputError(f"row {i} has {len(row)} coefficients, expected {n}")
        if len(self.integrality) != n:
            raise LpInputError(f"{len(self.integrality)} integrality flags for {n} variables")
        values = [*self.objective, *self.rhs, self.objective_constant]
        values.extend(v for row in self.rows for v in row)
        if not all(math.isfinite(v) for v in values):
            raise LpInputError("coefficients must be finite numbers")

    def with_rows(self, rows, rhs) -> "LpProblem":
        return LpProblem(
            self.objective,
            self.rows + tuple(rows),
            self.rhs + tuple(rhs),
            self.integrality,
            self.objective_constant,
        )

    def relaxed(self) -> "LpProblem":
        return LpProblem(self.objective, self.rows, self.rhs, (), self.objective_constant)


@dataclass(frozen=True)
class LpSolution:
    status: Status
    point: Optional[tuple] = None
    objective_value: Optional[float] = None
    iterations: int = 0
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def _pivot(T: np.ndarray, basis: list, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = c


def _iterate(T: np.ndarray, basis: list, ncols: int, budget: int) -> tuple[str, int]:
    """Run Bland-rule pivots on tableau ``T`` whose last row holds reduced costs.

    Only the first ``ncols`` columns may enter. Returns ("optimal" | "unbounded", pivots).
    """
    m = T.shape[0] - 1
    scale = max(1.0, float(np.max(np.abs(T[-1, :ncols]), initial=0.0)))
    pivots = 0
    while True:
        candidates = np.nonzero(T[-1, :ncols] < -_COST_EPS * scale)[0]
        if candidates.size == 0:
            return "optimal", pivots
        c = int(candidates[0])
        col = T[:m, c]
        eligible = np.nonzero(col > _PIVOT_EPS)[0]
        if eligible.size == 0:
            return "unbounded", pivots
        ratios = T[eligible, -1] / col[eligible]
        best = ratios.min()
        ties = eligible[ratios <= best + 1e-12 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, basis, r, c)
        pivots += 1
        if pivots > budget:
            raise SolverLimitError(f"simplex exceeded {MAX_PIVOTS} pivots")


def solve_lp(problem: LpProblem) -> LpSolution:
    """Solve the LP relaxation of ``problem`` (integrality flags are ignored)."""
    problem.check()
    n, m = problem.n, problem.m
    p = np.array(problem.objective)
    if m == 0:
        if np.any(p > 0):
            return LpSolution(Status.UNBOUNDED)
        return LpSolution(Status.OPTIMAL, (0.0,) * n, problem.objective_constant)

    A = np.array(problem.rows, dtype=float).reshape(m, n)
    b = np.array(problem.rhs, dtype=float)
    negative = [i for i in range(m) if b[i] < 0]
    n_art = len(negative)
    width = n + m + n_art

    T = np.zeros((m + 1, width + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    basis = [n + i for i in range(m)]
    for k, i in enumerate(negative):
        T[i, :-1] *= -1.0
        T[i, -1] *= -1.0
        T[i, n + m + k] = 1.0
        basis[i] = n + m + k

    pivots = 0
    if n_art:
        # phase I: maximise -(sum of artificials)
        T[-1, n + m :width] = 1.0
        for i in negative:
            T[-1] -= T[i]
        _, k = _iterate(T, basis, width, MAX_PIVOTS)
        pivots += k
        rhs_scale = max(1.0, float(np.max(np.abs(b))))
        if T[-1, -1] < -FEAS_TOL * rhs_scale:
            return LpSolution(Status.INFEASIBLE, iterations=pivots)
        # drive zero-level artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if basis[i] >= n + m:
                nz = np.nonzero(np.abs(T[i, : n + m]) > _PIVOT_EPS)[0]
                if nz.size:
                    _pivot(T, basis, i, int(nz[0]))
                    pivots += 1
                else:
                    continue
            keep.append(i)
        T = np.vstack([T[keep], T[-1:]])
        basis = [basis[i] for i in keep]
        T = np.delete(T, np.s_[n + m : width], axis=1)

    T[-1] = 0.0
    T[-1, :n] = -p
    for i, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[i]
    outcome, k = _iterate(T, basis, n + m, MAX_PIVOTS - pivots)
    pivots += k
    if outcome == "unbounded":
        return LpSolution(Status.UNBOUNDED, iterations=pivots)

    x = np.zeros(n + m)
    for i, j in enumerate(basis):
        x[j] = T[i, -1]
    point = np.maximum(x[:n], 0.0)
    value = float(p @ point) + problem.objective_constant
    return LpSolution(Status.OPTIMAL, tuple(float(v) for v in point), value, iterations=pivots)


def _fractional_pick(point: Sequence[float], flags: Sequence[bool]) -> Optional[int]:
    """Integer-flagged variable whose fractional part is closest to 0.5, lowest index on ties."""
    best, best_dist = None, None
    for j, (v, integer) in enumerate(zip(point, flags)):
        if not integer:
            continue
        frac = v - math.floor(v)
        if min(frac, 1.0 - frac) <= INT_TOL:
            continue
        dist = abs(frac - 0.5)
        if best is None or dist < best_dist - 1e-12:
            best, best_dist = j, dist
    return best


def solve_milp(problem: LpProblem) -> LpSolution:
    """Depth-first branch-and-bound over the LP relaxation, floor branch first."""
    problem.check()
    flags = problem.integrality
    if not any(flags):
        return solve_lp(problem)

    n = problem.n
    incumbent: Optional[LpSolution] = None
    pivots = 0
    nodes = 0
    # each node is a tuple of (var, sense, bound) where sense +1 means x <= bound
    stack: list[tuple] = [()]
    while stack:
        cuts = stack.pop()
        rows, rhs = [], []
        for j, sense, bound in cuts:
            row = [0.0] * n
            row[j] = float(sense)
            rows.append(row)
            rhs.append(sense * bound)
        sol = solve_lp(problem.with_rows(rows, rhs))
        nodes += 1
        pivots += sol.iterations
        if sol.status is Status.UNBOUNDED:
            if not cuts:
                return LpSolution(Status.UNBOUNDED, iterations=pivots, nodes=nodes)
            continue
        if sol.status is Status.INFEASIBLE:
            continue
        if incumbent is not None and sol.objective_value <= incumbent.objective_value + PRUNE_EPS:
            continue
        j = _fractional_pick(sol.point, flags)
        if j is None:
            incumbent = sol
            continue
        v = sol.point[j]
        stack.append(cuts + ((j, -1, math.ceil(v)),))
        stack.append(cuts + ((j, +1, math.floor(v)),))

    if incumbent is None:
        return LpSolution(Status.INFEASIBLE, iterations=pivots, nodes=nodes)
    # report integer variables as exact integers and price the snapped point
    point = tuple(float(round(v)) if flag else v for v, flag in zip(incumbent.point, flags))
    value = float(np.dot(problem.objective, point)) + problem.objective_constant
    return LpSolution(
        Status.OPTIMAL,
        point,
        value,
        iterations=pivots,
        nodes=nodes,
    )


def max_violation(problem: LpProblem, point: Sequence[float]) -> float:
    """Largest amount by which ``point`` breaks a row or a nonnegativity bound."""
    x = np.asarray(point, dtype=float)
    worst = float(max(0.0, -x.min())) if x.size else 0.0
    if problem.m:
        slack = np.asarray(problem.rhs) - np.asarray(problem.rows) @ x
        worst = max(worst, float(max(0.0, -slack.min())))
    return worst
