"""Market instances, exact price values and the JSON instance format.

Periods are 1-based in every public function. All money quantities are
``fractions.Fraction``; the symbolic ``SKIP`` price compares greater than
every number and means "no sale possible in this period".
"""

from __future__ import annotations

import json
import numbers
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

from .errors import (
    DimensionMismatch,
    InvalidInstance,
    NegativeValue,
    NonConcaveStorage,
    NonMonotoneMarginals,
    PeriodOutOfRange,
)


class _Skip:
    """Sentinel price that no buyer can pay."""

    _instance: "_Skip | None" = None

    def __new__(cls) -> "_Skip":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "SKIP"

    def __reduce__(self):
        return (_Skip, ())

    def __eq__(self, other: object) -> bool:
        return other is self

    def __hash__(self) -> int:
        return hash("pricing_lab.SKIP")

    def __lt__(self, other: object) -> bool:
        return False

    def __le__(self, other: object) -> bool:
        return other is self

    def __gt__(self, other: object) -> bool:
        return other is not self

    def __ge__(self, other: object) -> bool:
        return True

    # skip + storage is still skip
    def __add__(self, other: object) -> "_Skip":
        return self

    __radd__ = __add__


SKIP = _Skip()

Price = Union[Fraction, _Skip]


def is_skip(price: object) -> bool:
    return price is SKIP


def to_rational(value: Any) -> Fraction:
    """Convert ints, Fractions and ``"num/den"`` / decimal strings exactly.

    Binary floats are rejected: a float has usually already lost the tie
    that the caller cared about.
    """
    if isinstance(value, bool):
        raise InvalidInstance(f"boolean is not a rational value: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInstance(f"cannot parse rational {value!r}") from exc
    raise InvalidInstance(f"expected an exact rational, got {type(value).__name__} {value!r}")


def to_price(value: Any) -> Price:
    if value is SKIP or (isinstance(value, str) and value.strip().lower() == "skip"):
        return SKIP
    return to_rational(value)


def format_rational(value: Price) -> str:
    if value is SKIP:
        return "skip"
    return str(Fraction(value))


@dataclass(frozen=True)
class LinearStorage:
    """Holding cost ``c`` per unit per period."""

    c: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", to_rational(self.c))
        if self.c < 0:
            raise NegativeValue(f"storage cost must be >= 0, got {self.c}")

    def cost(self, units: int) -> Fraction:
        return self.c * units

    def marginal(self, q: int) -> Fraction:
        return self.c

    def marginal_set(self) -> tuple[Fraction, ...]:
        return (self.c,)


@dataclass(frozen=True)
class ConcaveStorage:
    """Per-period cost of holding ``q`` units, tabulated as ``cum[q]``.

    Beyond the table the last marginal is repeated, which keeps the
    function concave.
    """

    cum: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        cum = tuple(to_rational(v) for v in self.cum)
        object.__setattr__(self, "cum", cum)
        if not cum:
            raise InvalidInstance("concave storage table must contain cum[0] = 0")
        if cum[0] != 0:
            raise NonConcaveStorage(f"cum[0] must be 0, got {cum[0]}")
        marg = [b - a for a, b in zip(cum, cum[1:])]
        for q, m in enumerate(marg):
            if m < 0:
                raise NegativeValue(f"storage marginal at q={q} is negative ({m})")
        for q in range(1, len(marg)):
            if marg[q] > marg[q - 1]:
                raise NonConcaveStorage(
                    f"storage marginal rises from {marg[q - 1]} to {marg[q]} at q={q}"
                )

    @property
    def qmax(self) -> int:
        return len(self.cum) - 1

    def marginal(self, q: int) -> Fraction:
        if q < self.qmax:
            return self.cum[q + 1] - self.cum[q]
        if self.qmax == 0:
            return Fraction(0)
        return self.cum[-1] - self.cum[-2]

    def cost(self, units: int) -> Fraction:
        if units <= self.qmax:
            return self.cum[units]
        return self.cum[-1] + (units - self.qmax) * self.marginal(self.qmax)

    def marginal_set(self) -> tuple[Fraction, ...]:
        return tuple(sorted({self.marginal(q) for q in range(max(self.qmax, 1))}))


StorageCost = Union[LinearStorage, ConcaveStorage]


def _matrix(rows: Iterable[Iterable[Any]]) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(to_rational(v) for v in row) for row in rows)


@dataclass(frozen=True)
class MultiBuyer:
    """``values[i][t-1]``: value buyer ``i`` gets from one unit consumed at ``t``."""

    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _matrix(self.values))


@dataclass(frozen=True)
class SingleBuyer:
    """``marginals[j-1][t-1]``: marginal utility V(j, t) of the j-th unit at ``t``.

    Units beyond the supplied rows are worth nothing.
    """

    marginals: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "marginals", _matrix(self.marginals))


DemandSide = Union[MultiBuyer, SingleBuyer]


@dataclass(frozen=True)
class RankedRow:
    values: tuple[Fraction, ...]
    order: tuple[int, ...] | None  # sigma_t for multi-buyer, 0-based buyer ids


@dataclass(frozen=True)
class MarketInstance:
    periods: int
    storage: StorageCost
    demand: DemandSide

    def __post_init__(self) -> None:
        if isinstance(self.periods, bool) or not isinstance(self.periods, int) or self.periods < 1:
            raise InvalidInstance(f"periods must be an integer >= 1, got {self.periods!r}")
        if not isinstance(self.storage, (LinearStorage, ConcaveStorage)):
            raise InvalidInstance(f"unknown storage model {self.storage!r}")
        if not isinstance(self.demand, (MultiBuyer, SingleBuyer)):
            raise InvalidInstance(f"unknown demand model {self.demand!r}")
        rows = self.demand.values if isinstance(self.demand, MultiBuyer) else self.demand.marginals
        for k, row in enumerate(rows):
            if len(row) != self.periods:
                raise DimensionMismatch(
                    f"row {k} has {len(row)} entries, expected T={self.periods}"
                )
            for t, v in enumerate(row, start=1):
                if v < 0:
                    raise NegativeValue(f"negative value {v} in row {k}, period {t}")
        if isinstance(self.demand, SingleBuyer):
            for t in range(self.periods):
                col = [row[t] for row in rows]
                for j in range(1, len(col)):
                    if col[j] > col[j - 1]:
                        raise NonMonotoneMarginals(
                            f"V({j + 1},{t + 1})={col[j]} exceeds V({j},{t + 1})={col[j - 1]}"
                        )

    @property
    def is_single(self) -> bool:
        return isinstance(self.demand, SingleBuyer)

    @property
    def is_linear(self) -> bool:
        return isinstance(self.storage, LinearStorage)

    @property
    def n_buyers(self) -> int:
        return 1 if self.is_single else len(self.demand.values)

    @property
    def rows(self) -> tuple[tuple[Fraction, ...], ...]:
        if isinstance(self.demand, MultiBuyer):
            return self.demand.values
        return self.demand.marginals

    def check_period(self, t: int) -> None:
        if not 1 <= t <= self.periods:
            raise PeriodOutOfRange(f"period {t} outside 1..{self.periods}")

    @cached_property
    def _ranked(self) -> tuple[RankedRow, ...]:
        out = []
        for t in range(self.periods):
            col = [row[t] for row in self.rows]
            if self.is_single:
                out.append(RankedRow(tuple(col), None))
            else:
                order = tuple(sorted(range(len(col)), key=lambda i: -col[i]))
                out.append(RankedRow(tuple(col[i] for i in order), order))
        return tuple(out)

    @cached_property
    def _positive(self) -> tuple[tuple[Fraction, ...], ...]:
        return tuple(tuple(v for v in row.values if v > 0) for row in self._ranked)

    def ranked(self, t: int) -> RankedRow:
        self.check_period(t)
        return self._ranked[t - 1]

    def demand_at(self, t: int) -> tuple[Fraction, ...]:
        """Positive ranked values v_{1,t} >= v_{2,t} >= ... (the demand items)."""
        self.check_period(t)
        return self._positive[t - 1]

    def buyer_values(self, i: int) -> tuple[Fraction, ...]:
        """Per-period unit values of multi-buyer ``i`` (0-based)."""
        return self.demand.values[i]

    def utility(self, t: int, units: int) -> Fraction:
        """Single-buyer U(x, t): sum of the first ``units`` marginals."""
        col = [row[t - 1] for row in self.demand.marginals]
        return sum(col[:units], Fraction(0))

    def consumption_cap(self, t: int, buyer: int = 0) -> int:
        """Units at ``t`` that carry positive value for one buyer."""
        if self.is_single:
            return len(self._positive[t - 1])
        return 1 if self.demand.values[buyer][t - 1] > 0 else 0

    def unit_values(self, t: int, buyer: int = 0) -> tuple[Fraction, ...]:
        """Values of the successive positive units a buyer could consume at ``t``."""
        if self.is_single:
            return self._positive[t - 1]
        v = self.demand.values[buyer][t - 1]
        return (v,) if v > 0 else ()

    def all_values(self) -> list[Fraction]:
        """All positive demand values pooled over periods, in decreasing order."""
        return sorted((v for col in self._positive for v in col), reverse=True)


def validate_instance(periods: int, storage: StorageCost, demand: DemandSide) -> MarketInstance:
    return MarketInstance(periods=periods, storage=storage, demand=demand)


def ranked_values(inst: MarketInstance, t: int) -> RankedRow:
    """Values at period ``t`` sorted decreasingly; ties keep buyer order."""
    return inst.ranked(t)


def demand_size(inst: MarketInstance) -> int:
    """Number D of demand items with positive value."""
    return sum(len(inst.demand_at(t)) for t in range(1, inst.periods + 1))


@dataclass(frozen=True)
class PriceSchedule:
    prices: tuple[Price, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "prices", tuple(to_price(p) for p in self.prices))
        for p in self.prices:
            if p is not SKIP and p < 0:
                raise NegativeValue(f"negative price {p}")

    def __len__(self) -> int:
        return len(self.prices)

    def __iter__(self):
        return iter(self.prices)

    def at(self, t: int) -> Price:
        return self.prices[t - 1]

    def to_dict(self) -> dict[str, Any]:
        return {"prices": [format_rational(p) for p in self.prices]}


def as_schedule(inst: MarketInstance, prices: PriceSchedule | Sequence[Any]) -> PriceSchedule:
    sched = prices if isinstance(prices, PriceSchedule) else PriceSchedule(tuple(prices))
    if len(sched) != inst.periods:
        raise DimensionMismatch(f"schedule has {len(sched)} prices, expected T={inst.periods}")
    return sched


# --- JSON instance format -------------------------------------------------


def instance_to_dict(inst: MarketInstance) -> dict[str, Any]:
    if isinstance(inst.storage, LinearStorage):
        storage = {"kind": "linear", "c": format_rational(inst.storage.c)}
    else:
        storage = {"kind": "concave", "cum": [format_rational(v) for v in inst.storage.cum]}
    if isinstance(inst.demand, MultiBuyer):
        demand = {"kind": "multi", "values": [[format_rational(v) for v in r] for r in inst.demand.values]}
    else:
        demand = {
            "kind": "single",
            "marginals": [[format_rational(v) for v in r] for r in inst.demand.marginals],
        }
    return {"periods": inst.periods, "storage": storage, "demand": demand}


def instance_from_dict(data: dict[str, Any]) -> MarketInstance:
    try:
        storage_d = data["storage"]
        demand_d = data["demand"]
        periods = data["periods"]
        if storage_d["kind"] == "linear":
            storage: StorageCost = LinearStorage(storage_d["c"])
        elif storage_d["kind"] == "concave":
            storage = ConcaveStorage(tuple(storage_d["cum"]))
        else:
            raise InvalidInstance(f"unknown storage kind {storage_d['kind']!r}")
        if demand_d["kind"] == "multi":
            demand: DemandSide = MultiBuyer(demand_d["values"])
        elif demand_d["kind"] == "single":
            demand = SingleBuyer(demand_d["marginals"])
        else:
            raise InvalidInstance(f"unknown demand kind {demand_d['kind']!r}")
    except (KeyError, TypeError) as exc:
        raise InvalidInstance(f"malformed instance: {exc}") from exc
    return validate_instance(periods, storage, demand)


def dumps_instance(inst: MarketInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


def loads_instance(text: str) -> MarketInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInstance(f"invalid JSON: {exc}") from exc
    return instance_from_dict(data)


def load_instance(path: str | Path) -> MarketInstance:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInstance(f"cannot read instance file {path}: {exc.strerror}") from exc
    return loads_instance(text)


def save_instance(inst: MarketInstance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(inst))
