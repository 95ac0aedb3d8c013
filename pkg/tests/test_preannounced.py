from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from pricing_lab.consumer import best_response_linear
from pricing_lab.errors import ConcaveNotSupported, InstanceTooLarge, PeriodBeforeContour
from pricing_lab.generators import Random, gen_concave_cx, gen_harmonic, gen_loggap, gen_random
from pricing_lab.model import SKIP, LinearStorage, MultiBuyer, validate_instance
from pricing_lab.preannounced import (
    DUMMY,
    Contour,
    best_fixed_price,
    candidate_prices,
    contour_leq,
    contour_price,
    contours,
    enumerate_grid_schedules,
    feasible_set,
    quantity_at,
    solve_preannounced_bruteforce,
    solve_preannounced_dp,
)


def test_table1_dp(table1):
    sol = solve_preannounced_dp(table1)
    assert sol.schedule.prices == (17, 15)
    assert sol.revenue == 32
    schedule, revenue, tables = sol
    assert tables.R[(1, DUMMY)] == 32


def test_table1_bruteforce(table1):
    schedule, revenue = solve_preannounced_bruteforce(table1)
    assert revenue == 32
    assert best_response_linear(table1, schedule).revenue == 32


def test_contour_helpers(table1):
    c17, c10 = contours(table1, 1)
    assert c17 == Contour(F(17), 1, 1)
    assert contour_price(c10, 2, F(1)) == 11
    assert contour_price(DUMMY, 2, F(1)) is SKIP
    with pytest.raises(PeriodBeforeContour):
        contour_price(Contour(F(15), 2, 1), 1, F(1))
    assert contour_leq(c10, c17, F(1))
    assert contour_leq(c17, DUMMY, F(1))
    assert not contour_leq(DUMMY, c17, F(1))
    # after choosing 17 at t=1, period 2 may use 15 (key 13 <= 16) or 4
    assert {g.value for g in feasible_set(table1, 2, c17)} == {17, 15, 4}
    assert {g.value for g in feasible_set(table1, 2, c10)} == {10, 4}
    assert quantity_at(table1, c10, 2) == 1


def test_candidate_prices(table1):
    assert candidate_prices(table1, 2) == [4, 11, 15, 18, SKIP]


def test_dp_rejects_concave():
    with pytest.raises(ConcaveNotSupported):
        solve_preannounced_dp(gen_concave_cx(1, 1, F(1, 16)))


def test_bruteforce_size_guard():
    with pytest.raises(InstanceTooLarge):
        solve_preannounced_bruteforce(gen_random(Random(0, 6, 1)))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_loggap_dp_revenue(n):
    assert solve_preannounced_dp(gen_loggap(n)).revenue == 2**n - 1


@pytest.mark.parametrize("N", [2, 4, 8])
def test_harmonic_preannounced_revenue_is_one(N):
    assert solve_preannounced_dp(gen_harmonic(N)).revenue == 1


def test_fixed_price():
    assert best_fixed_price(gen_loggap(2)) == (1, 3)
    inst = validate_instance(1, LinearStorage(0), MultiBuyer([[0]]))
    assert best_fixed_price(inst) == (0, 0)


def test_fixed_price_ties_go_high():
    tie = validate_instance(1, LinearStorage(0), MultiBuyer([[3], [F(3, 2)]]))
    assert best_fixed_price(tie) == (3, 3)
    dup = validate_instance(1, LinearStorage(0), MultiBuyer([[4], [2], [2]]))
    assert best_fixed_price(dup) == (2, 6)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 10**6), T=st.integers(1, 4), N=st.integers(1, 3))
def test_dp_matches_bruteforce_property(seed, T, N):
    inst = gen_random(Random(seed, T, N))
    sol = solve_preannounced_dp(inst)
    _, brute = solve_preannounced_bruteforce(inst)
    assert sol.revenue == brute
    assert best_response_linear(inst, sol.schedule).revenue == sol.revenue


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6), T=st.integers(1, 5), N=st.integers(1, 4))
def test_naive_and_fast_dp_agree(seed, T, N):
    inst = gen_random(Random(seed, T, N, value_max=10, c_choices=(0, 1, 2, 3)))
    fast = solve_preannounced_dp(inst)
    slow = solve_preannounced_dp(inst, naive=True)
    assert fast.revenue == slow.revenue
    assert fast.schedule == slow.schedule


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6), T=st.integers(1, 5), N=st.integers(1, 4))
def test_dp_schedule_never_induces_storage(seed, T, N):
    inst = gen_random(Random(seed, T, N))
    sol = solve_preannounced_dp(inst)
    assert best_response_linear(inst, sol.schedule).total_storage == 0


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6), T=st.integers(1, 4), N=st.integers(1, 3))
def test_revenue_ordering_fixed_below_preannounced(seed, T, N):
    inst = gen_random(Random(seed, T, N))
    assert best_fixed_price(inst)[1] <= solve_preannounced_dp(inst).revenue


def test_grid_enumeration_concave_example():
    inst = gen_concave_cx(2, 2, F(1, 16))
    res = enumerate_grid_schedules(inst, [[F(1), SKIP], [SKIP], [F(4), SKIP]])
    assert res.schedules_checked == 4
    # 2 + 8 from the single-period buyers, 2 from the last buyer storing two units
    assert res.best_revenue == 12
    assert all(storage > 0 for _, storage in res.optimal)


def test_grid_enumeration_guard(table1):
    with pytest.raises(InstanceTooLarge):
        enumerate_grid_schedules(table1, [[F(1)] * 10, [F(1)] * 10], max_schedules=50)
