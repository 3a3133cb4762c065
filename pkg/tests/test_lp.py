import math

import pytest
from hypothesis import given, settings, strategies as st

from meltline.lp import (
    LpInputError,
    LpProblem,
    Status,
    max_violation,
    solve_lp,
    solve_milp,
)
from oracles import integer_oracle, vertex_oracle


def test_single_bound():
    sol = solve_lp(LpProblem([1.0], [[1.0]], [5.0]))
    assert sol.status is Status.OPTIMAL
    assert sol.point == pytest.approx((5.0,))
    assert sol.objective_value == pytest.approx(5.0)
    assert sol.nodes == 0


def test_two_variable_vertex():
    rows, rhs = [[1, 1], [1, 0]], [4, 2]
    status, value, point = vertex_oracle([3, 2], rows, rhs)
    assert status == "OPTIMAL"
    # frozen from the oracle run: x = (2, 2), z = 10
    assert value == pytest.approx(10.0)
    assert point == pytest.approx([2.0, 2.0])
    sol = solve_lp(LpProblem([3, 2], rows, rhs))
    assert sol.point == pytest.approx((2.0, 2.0))
    assert sol.objective_value == pytest.approx(10.0)


def test_unbounded_ray():
    sol = solve_lp(LpProblem([1.0], [[-1.0]], [-1.0]))
    assert sol.status is Status.UNBOUNDED
    assert sol.point is None and sol.objective_value is None


def test_infeasible_phase_one():
    # x1 >= 3 and x1 <= 1
    sol = solve_lp(LpProblem([1.0], [[-1.0], [1.0]], [-3.0, 1.0]))
    assert sol.status is Status.INFEASIBLE


def test_phase_one_reaches_optimum():
    # x1 + x2 >= 2, 2x1 + x2 >= 3, x1 + x2 <= 5; max -3x1 - 4x2
    p = LpProblem([-3, -4], [[-1, -1], [-2, -1], [1, 1]], [-2, -3, 5])
    status, value, _ = vertex_oracle(p.objective, p.rows, p.rhs)
    sol = solve_lp(p)
    assert status == "OPTIMAL"
    assert sol.objective_value == pytest.approx(value, abs=1e-9)


def test_objective_constant_added():
    sol = solve_lp(LpProblem([2.0], [[1.0]], [3.0], objective_constant=-1.5))
    assert sol.objective_value == pytest.approx(4.5)


def test_no_rows():
    assert solve_lp(LpProblem([1.0, 0.0])).status is Status.UNBOUNDED
    sol = solve_lp(LpProblem([-1.0, 0.0]))
    assert sol.point == (0.0, 0.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(objective=[1.0, 2.0], rows=[[1.0]], rhs=[1.0]),
        dict(objective=[1.0], rows=[[1.0]], rhs=[]),
        dict(objective=[float("nan")], rows=[[1.0]], rhs=[1.0]),
        dict(objective=[1.0], rows=[[math.inf]], rhs=[1.0]),
        dict(objective=[], rows=[], rhs=[]),
    ],
)
def test_malformed_is_input_error(kwargs):
    with pytest.raises(LpInputError):
        solve_lp(LpProblem(**kwargs))


def test_degenerate_cycling_example_terminates():
    # Beale's classic cycling instance, rewritten as a maximisation
    p = LpProblem(
        [0.75, -150, 0.02, -6],
        [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]],
        [0, 0, 1],
    )
    sol = solve_lp(p)
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == pytest.approx(0.05)
    assert sol.iterations < 10_000


# -- MILP -----------------------------------------------------------------


def test_milp_rounds_down():
    sol = solve_milp(LpProblem([1.0], [[1.0]], [2.7], [True]))
    assert sol.point == pytest.approx((2.0,))
    assert sol.objective_value == pytest.approx(2.0)
    assert sol.nodes >= 1


def test_milp_textbook():
    rows, rhs = [[6, 4], [1, 2]], [24, 6]
    best, best_x = integer_oracle([5, 4], rows, rhs, upper=[4, 3])
    # frozen from exhaustive enumeration over x1 <= 4, x2 <= 3
    assert best == 20.0 and best_x == (4, 0)
    sol = solve_milp(LpProblem([5, 4], rows, rhs, [True, True]))
    assert sol.objective_value == pytest.approx(best, abs=1e-9)
    # z = 21 is the LP relaxation value at (3, 1.5); no integer point reaches it
    assert solve_lp(LpProblem([5, 4], rows, rhs)).objective_value == pytest.approx(21.0)


def test_milp_without_flags_matches_lp():
    p = LpProblem([3, 2], [[1, 1], [1, 0]], [4, 2])
    assert solve_milp(p) == solve_lp(p)


def test_milp_infeasible():
    # 2 x = 1 has no integer solution
    p = LpProblem([1.0], [[2.0], [-2.0]], [1.0, -1.0], [True])
    assert solve_milp(p).status is Status.INFEASIBLE


def test_milp_mixed_flags():
    # x1 integer, x2 continuous
    p = LpProblem([1, 1], [[2, 1], [0, 1]], [5.5, 1.2], [True, False])
    sol = solve_milp(p)
    assert sol.point[0] == pytest.approx(2.0)
    assert sol.point[1] == pytest.approx(1.2)


# -- oracle-equivalence properties ------------------------------------------

coef = st.integers(-10, 10).map(float)


@st.composite
def small_lps(draw, nonneg_rhs=True):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(0, 6))
    objective = draw(st.lists(coef, min_size=n, max_size=n))
    rows = [draw(st.lists(coef, min_size=n, max_size=n)) for _ in range(m)]
    lo = 0 if nonneg_rhs else -10
    rhs = [float(draw(st.integers(lo, 10))) for _ in range(m)]
    return LpProblem(objective, rows, rhs)


@settings(max_examples=150, deadline=None)
@given(small_lps())
def test_lp_matches_vertex_oracle(problem):
    status, value, _ = vertex_oracle(problem.objective, problem.rows, problem.rhs)
    sol = solve_lp(problem)
    assert sol.status.value == status
    if status == "OPTIMAL":
        assert abs(sol.objective_value - value) <= 1e-8
        assert max_violation(problem, sol.point) <= 1e-7
        assert min(sol.point) >= -1e-9
    assert sol.iterations < 10_000


@settings(max_examples=100, deadline=None)
@given(small_lps(nonneg_rhs=False))
def test_lp_with_negative_rhs_matches_oracle(problem):
    status, value, _ = vertex_oracle(problem.objective, problem.rows, problem.rhs)
    sol = solve_lp(problem)
    assert sol.status.value == status
    if status == "OPTIMAL":
        assert abs(sol.objective_value - value) <= 1e-8 * max(1.0, abs(value))


@st.composite
def boxed_ips(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(0, 4))
    upper = draw(st.lists(st.integers(0, 5), min_size=n, max_size=n))
    objective = draw(st.lists(coef, min_size=n, max_size=n))
    rows = [draw(st.lists(coef, min_size=n, max_size=n)) for _ in range(m)]
    rhs = [float(draw(st.integers(-5, 20))) for _ in range(m)]
    for j, u in enumerate(upper):
        e = [0.0] * n
        e[j] = 1.0
        rows.append(e)
        rhs.append(u + 0.5 * draw(st.integers(0, 1)))
    return LpProblem(objective, rows, rhs, [True] * n), upper


@settings(max_examples=100, deadline=None)
@given(boxed_ips())
def test_milp_matches_enumeration(case):
    problem, upper = case
    best, _ = integer_oracle(problem.objective, problem.rows, problem.rhs, upper)
    sol = solve_milp(problem)
    if best is None:
        assert sol.status is Status.INFEASIBLE
        return
    assert sol.status is Status.OPTIMAL
    assert abs(sol.objective_value - best) <= 1e-9
    assert all(abs(v - round(v)) <= 1e-6 for v in sol.point)
    relax = solve_lp(problem)
    assert sol.objective_value <= relax.objective_value + 1e-9


def test_positive_scaling_keeps_unique_vertex():
    base = LpProblem([3, 2], [[1, 1], [1, 0]], [4, 2])
    ref = solve_lp(base)
    for k in (0.5, 3.0, 1000.0):
        sol = solve_lp(LpProblem([k * c for c in base.objective], base.rows, base.rhs))
        assert sol.point == pytest.approx(ref.point, abs=1e-9)
        assert sol.objective_value == pytest.approx(k * ref.objective_value)
