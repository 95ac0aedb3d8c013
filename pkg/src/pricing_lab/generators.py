"""Instance families: the worked example, gap constructions, random draws."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ParameterOutOfRange
from .model import (
    ConcaveStorage,
    LinearStorage,
    MarketInstance,
    MultiBuyer,
    SingleBuyer,
    to_rational,
    validate_instance,
)


@dataclass(frozen=True)
class Table1:
    pass


@dataclass(frozen=True)
class Harmonic:
    N: int
    eps: Fraction = Fraction(0)


@dataclass(frozen=True)
class LogGap:
    n: int


@dataclass(frozen=True)
class ConcaveCx:
    n1: int
    n2: int
    eps: Fraction


@dataclass(frozen=True)
class Random:
    """Seeded random instance.

    ``kind`` is ``"multi"`` (values per buyer) or ``"single"`` (``N`` is the
    number of marginal rows). ``storage="concave"`` draws a concave table
    with integer marginals up to ``cost_max`` over ``qmax`` units.
    """

    seed: int
    T: int
    N: int
    value_max: int = 8
    c_choices: tuple[int, ...] = (0, 1, 2)
    kind: str = "multi"
    storage: str = "linear"
    cost_max: int = 3
    qmax: int = 3


FamilySpec = Union[Table1, Harmonic, LogGap, ConcaveCx, Random]


def gen_table1() -> MarketInstance:
    return validate_instance(2, LinearStorage(1), MultiBuyer([[17, 15], [10, 4]]))


def gen_table1_single() -> MarketInstance:
    """The worked example read as one buyer with marginals 17, 10 and 15, 4."""
    return validate_instance(2, LinearStorage(1), SingleBuyer([[17, 15], [10, 4]]))


def gen_harmonic(N: int, eps=0) -> MarketInstance:
    """Single buyer, T=2, c=0; period-2 marginals 1+eps, 1/2, ..., 1/N."""
    if N < 2:
        raise ParameterOutOfRange(f"harmonic family needs N >= 2, got {N}")
    eps = to_rational(eps)
    if eps < 0:
        raise ParameterOutOfRange(f"eps must be >= 0, got {eps}")
    rows = [[Fraction(0), 1 + eps]] + [[Fraction(0), Fraction(1, i)] for i in range(2, N + 1)]
    return validate_instance(2, LinearStorage(0), SingleBuyer(rows))


def loggap_blocks(n: int) -> list[int]:
    """Block index (1-based) of each period, earliest block first."""
    out = []
    for k in range(1, n + 1):
        out.extend([k] * 2 ** (n - k))
    return out


def gen_loggap(n: int) -> MarketInstance:
    """T = 2^n - 1 one-period consumers; block k has 2^(n-k) periods of value 2^(k-1)."""
    if n < 1:
        raise ParameterOutOfRange(f"log-gap family needs n >= 1, got {n}")
    blocks = loggap_blocks(n)
    T = len(blocks)
    values = []
    for t, k in enumerate(blocks):
        row = [0] * T
        row[t] = 2 ** (k - 1)
        values.append(row)
    return validate_instance(T, LinearStorage(0), MultiBuyer(values))


def gen_concave_cx(n1: int, n2: int, eps) -> MarketInstance:
    """Three-period market where every optimal preannounced schedule makes someone store.

    Holding one unit for a period costs 3/2, holding two costs 3/2 + eps.
    """
    eps = to_rational(eps)
    if n1 < 1 or n2 < 1:
        raise ParameterOutOfRange("n1 and n2 must be >= 1")
    if not 0 < eps < Fraction(1, 4):
        raise ParameterOutOfRange(f"eps must lie in (0, 1/4), got {eps}")
    storage = ConcaveStorage((Fraction(0), Fraction(3, 2), Fraction(3, 2) + eps))
    values = [[1, 0, 0]] * n1 + [[0, 0, 4]] * n2 + [[0, Fraction(11, 4), 3]]
    return validate_instance(3, storage, MultiBuyer(values))


def gen_random(spec: Random) -> MarketInstance:
    if spec.T < 1 or spec.N < 1 or spec.value_max < 0:
        raise ParameterOutOfRange(f"bad random spec {spec}")
    rng = random.Random(spec.seed)
    rows = [[rng.randint(0, spec.value_max) for _ in range(spec.T)] for _ in range(spec.N)]
    if spec.storage == "concave":
        marg = sorted((rng.randint(0, spec.cost_max) for _ in range(spec.qmax)), reverse=True)
        cum = [0]
        for m in marg:
            cum.append(cum[-1] + m)
        storage = ConcaveStorage(tuple(cum))
    else:
        storage = LinearStorage(rng.choice(spec.c_choices))
    if spec.kind == "single":
        cols = [sorted((r[t] for r in rows), reverse=True) for t in range(spec.T)]
        demand = SingleBuyer([[cols[t][j] for t in range(spec.T)] for j in range(spec.N)])
    else:
        demand = MultiBuyer(rows)
    return validate_instance(spec.T, storage, demand)


def generate(spec: FamilySpec) -> MarketInstance:
    if isinstance(spec, Table1):
        return gen_table1()
    if isinstance(spec, Harmonic):
        return gen_harmonic(spec.N, spec.eps)
    if isinstance(spec, LogGap):
        return gen_loggap(spec.n)
    if isinstance(spec, ConcaveCx):
        return gen_concave_cx(spec.n1, spec.n2, spec.eps)
    if isinstance(spec, Random):
        return gen_random(spec)
    raise TypeError(f"unknown family spec {spec!r}")
