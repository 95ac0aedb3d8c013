from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from pricing_lab.errors import (
    DimensionMismatch,
    InvalidInstance,
    NegativeValue,
    NonConcaveStorage,
    NonMonotoneMarginals,
    PeriodOutOfRange,
)
from pricing_lab.model import (
    SKIP,
    ConcaveStorage,
    LinearStorage,
    MultiBuyer,
    PriceSchedule,
    SingleBuyer,
    as_schedule,
    demand_size,
    dumps_instance,
    format_rational,
    load_instance,
    loads_instance,
    ranked_values,
    save_instance,
    to_price,
    to_rational,
    validate_instance,
)


def test_skip_orders_above_every_number():
    assert SKIP > F(10**9)
    assert not SKIP < F(0)
    assert SKIP + F(3) is SKIP
    assert F(3) + SKIP is SKIP
    assert sorted([SKIP, F(2), F(1)]) == [F(1), F(2), SKIP]


def test_rational_parsing():
    assert to_rational("3/2") == F(3, 2)
    assert to_rational("0.25") == F(1, 4)
    assert to_rational(7) == F(7)
    assert to_price("skip") is SKIP
    assert format_rational(F(6, 4)) == "3/2"
    assert format_rational(SKIP) == "skip"


@pytest.mark.parametrize("bad", [0.5, True, "abc", None, "1/0"])
def test_rational_rejects_inexact_or_garbage(bad):
    with pytest.raises(InvalidInstance):
        to_rational(bad)


def test_ranked_values_table1(table1):
    row = ranked_values(table1, 1)
    assert row.values == (17, 10)
    assert row.order == (0, 1)
    assert table1.demand_at(2) == (15, 4)
    assert demand_size(table1) == 4


def test_zero_values_are_not_demand_items(loggap2):
    assert loggap2.demand_at(1) == (1,)
    assert loggap2.demand_at(3) == (2,)
    assert demand_size(loggap2) == 3


def test_period_out_of_range(table1):
    with pytest.raises(PeriodOutOfRange):
        table1.demand_at(3)
    with pytest.raises(PeriodOutOfRange):
        ranked_values(table1, 0)


def test_validation_errors():
    with pytest.raises(NegativeValue):
        validate_instance(1, LinearStorage(0), MultiBuyer([[-1]]))
    with pytest.raises(NegativeValue):
        LinearStorage(-1)
    with pytest.raises(DimensionMismatch):
        validate_instance(2, LinearStorage(0), MultiBuyer([[1]]))
    with pytest.raises(NonMonotoneMarginals):
        validate_instance(1, LinearStorage(0), SingleBuyer([[1], [2]]))
    with pytest.raises(NonConcaveStorage):
        ConcaveStorage((0, 1, 3))
    with pytest.raises(NonConcaveStorage):
        ConcaveStorage((1, 2))
    with pytest.raises(InvalidInstance):
        validate_instance(0, LinearStorage(0), MultiBuyer([]))


def test_concave_cost_extends_with_last_marginal():
    s = ConcaveStorage((0, F(3, 2), F(3, 2) + F(1, 16)))
    assert s.cost(2) == F(25, 16)
    assert s.cost(4) == F(25, 16) + 2 * F(1, 16)
    assert s.marginal_set() == (F(1, 16), F(3, 2))


def test_schedule_length_is_checked(table1):
    with pytest.raises(DimensionMismatch):
        as_schedule(table1, [1])
    assert as_schedule(table1, ["skip", "3/2"]).prices == (SKIP, F(3, 2))
    with pytest.raises(NegativeValue):
        PriceSchedule((F(-1),))


def test_json_round_trip(tmp_path, table1):
    path = tmp_path / "t.json"
    save_instance(table1, path)
    assert load_instance(path) == table1
    conc = validate_instance(2, ConcaveStorage((0, F(1, 3))), SingleBuyer([[2, 1], [1, 1]]))
    assert loads_instance(dumps_instance(conc)) == conc


def test_load_errors(tmp_path):
    with pytest.raises(InvalidInstance):
        load_instance(tmp_path / "missing.json")
    with pytest.raises(InvalidInstance):
        loads_instance("{not json")
    with pytest.raises(InvalidInstance):
        loads_instance('{"periods": 1, "storage": {"kind": "quadratic"}, "demand": {}}')


values = st.fractions(min_value=0, max_value=20, max_denominator=6)


@given(st.integers(1, 4).flatmap(lambda T: st.lists(st.lists(values, min_size=T, max_size=T), min_size=1, max_size=4)))
def test_multi_buyer_round_trip_property(rows):
    inst = validate_instance(len(rows[0]), LinearStorage(F(1, 3)), MultiBuyer(rows))
    assert loads_instance(dumps_instance(inst)) == inst
    for t in range(1, inst.periods + 1):
        col = inst.demand_at(t)
        assert list(col) == sorted(col, reverse=True)
        assert all(v > 0 for v in col)
