"""Optimal preannounced price schedules under linear storage cost.

A contour is a demand item (value v, period s). At any period t >= s it
proposes the price v + (t - s) c, i.e. the price at which buying at t is
exactly as good as paying v at s and storing. Contours are ordered by
their storage-adjusted key v - c s; the dynamic program walks time
backwards keeping the lowest contour selected so far.
"""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .consumer import best_response, best_response_linear
from .errors import ConcaveNotSupported, InstanceTooLarge, PeriodBeforeContour
from .model import SKIP, LinearStorage, MarketInstance, Price, PriceSchedule


@dataclass(frozen=True, order=False)
class Contour:
    value: Fraction
    period: int
    item_rank: int
    is_dummy: bool = False

    def key(self, c: Fraction) -> Fraction | None:
        """Storage-adjusted key ``v - c*s``; ``None`` for the dummy (maximal)."""
        if self.is_dummy:
            return None
        return self.value - c * self.period

    def __repr__(self) -> str:
        if self.is_dummy:
            return "Contour(*)"
        return f"Contour({self.value}, s={self.period}, j={self.item_rank})"


DUMMY = Contour(Fraction(0), 0, 0, is_dummy=True)


def _linear_c(inst: MarketInstance) -> Fraction:
    if not isinstance(inst.storage, LinearStorage):
        raise ConcaveNotSupported("preannounced solver requires linear storage cost")
    return inst.storage.c


def contours(inst: MarketInstance, t: int) -> list[Contour]:
    """Contours C_t of the positive demand items of period ``t``, by rank."""
    return [Contour(v, t, j) for j, v in enumerate(inst.demand_at(t), start=1)]


def contour_price(gamma: Contour, t: int, c: Fraction) -> Price:
    if gamma.is_dummy:
        return SKIP
    if t < gamma.period:
        raise PeriodBeforeContour(f"period {t} precedes contour period {gamma.period}")
    return gamma.value + (t - gamma.period) * c


def contour_leq(g1: Contour, g2: Contour, c: Fraction) -> bool:
    """Total preorder on contours; the dummy sits above everything."""
    if g2.is_dummy:
        return True
    if g1.is_dummy:
        return False
    return g1.key(c) <= g2.key(c)


def feasible_set(inst: MarketInstance, t: int, incumbent: Contour) -> list[Contour]:
    c = _linear_c(inst)
    cands = contours(inst, t) + [incumbent]
    return [g for g in cands if contour_leq(g, incumbent, c)]


def _count_at_least(desc_values: tuple[Fraction, ...], price: Price) -> int:
    if price is SKIP:
        return 0
    # desc_values is nonincreasing; count entries >= price
    lo, hi = 0, len(desc_values)
    while lo < hi:
        mid = (lo + hi) // 2
        if desc_values[mid] >= price:
            lo = mid + 1
        else:
            hi = mid
    return lo


def quantity_at(inst: MarketInstance, gamma: Contour, t: int) -> int:
    """Items of period ``t`` whose value covers the contour's price."""
    c = _linear_c(inst)
    return _count_at_least(inst.demand_at(t), contour_price(gamma, t, c))


@dataclass
class DpTables:
    R: dict[tuple[int, Contour], Fraction] = field(default_factory=dict)
    S: dict[tuple[int, Contour], Contour] = field(default_factory=dict)


@dataclass(frozen=True)
class PreannouncedSolution:
    schedule: PriceSchedule
    revenue: Fraction
    tables: DpTables | None = None
    path: tuple[Contour, ...] = ()

    def __iter__(self):
        return iter((self.schedule, self.revenue, self.tables))


def _rank(gain, g: Contour, key) -> tuple:
    # equal revenue: larger key (dummy largest), then later period, then better rank
    if g.is_dummy:
        return (gain, 1, 0, 0, 0)
    return (gain, 0, key, g.period, -g.item_rank)


def _common_scale(inst: MarketInstance, c: Fraction) -> int:
    scale = c.denominator
    for t in range(1, inst.periods + 1):
        for v in inst.demand_at(t):
            scale = math.lcm(scale, v.denominator)
    return scale


def solve_preannounced_dp(inst: MarketInstance, *, naive: bool = False) -> PreannouncedSolution:
    """Backward DP over (period, lowest contour chosen so far).

    ``R(t, g) = max_{g' in F_t(g)} q_t(g') p_t(g') + R(t+1, g')``. The
    feasible set is the incumbent plus the current period's contours with
    key no larger than the incumbent's, so the maximum over the latter is
    a prefix maximum over contours sorted by key. ``naive=True`` scans
    ``F_t`` literally instead (quadratic; kept for cross-checking).

    Values are scaled by a common denominator so the inner loops run on
    integers; the tables are converted back to exact rationals.
    """
    c = _linear_c(inst)
    T = inst.periods
    L = _common_scale(inst, c)
    ic = int(c * L)
    by_period = [[]] + [contours(inst, t) for t in range(1, T + 1)]
    ival = {g: int(g.value * L) for col in by_period for g in col}
    ikey = {g: v - ic * g.period for g, v in ival.items()}
    # ascending negated values per period, for counting values >= a price
    neg_cols = [[]] + [sorted(-ival[g] for g in by_period[t]) for t in range(1, T + 1)]
    R_int: dict[tuple[int, Contour], int] = {}
    S: dict[tuple[int, Contour], Contour] = {}

    def cont(t: int, g: Contour) -> int:
        return R_int[(t, g)] if t <= T else 0

    def gain_at(t: int, g: Contour) -> int:
        if g.is_dummy:
            return cont(t + 1, g)
        p = ival[g] + (t - g.period) * ic
        sold = bisect.bisect_right(neg_cols[t], -p)
        return sold * p + cont(t + 1, g)

    def rank(t: int, g: Contour) -> tuple:
        return _rank(gain_at(t, g), g, None if g.is_dummy else ikey[g])

    for t in range(T, 0, -1):
        current = by_period[t]
        scored = sorted(((ikey[g], rank(t, g), g) for g in current), key=lambda e: e[0])
        keys = [k for k, _, _ in scored]
        prefix: list[tuple[tuple, Contour]] = []
        for _, rk, g in scored:
            if not prefix or rk > prefix[-1][0]:
                prefix.append((rk, g))
            else:
                prefix.append(prefix[-1])

        incumbents = [DUMMY] + [g for s in range(1, t) for g in by_period[s]]
        for g in incumbents:
            best_rank, best = rank(t, g), g
            if naive:
                for h in current:
                    if contour_leq(h, g, c):
                        rk = rank(t, h)
                        if rk > best_rank:
                            best_rank, best = rk, h
            else:
                n = len(keys) if g.is_dummy else bisect.bisect_right(keys, ikey[g])
                if n and prefix[n - 1][0] > best_rank:
                    best_rank, best = prefix[n - 1]
            R_int[(t, g)] = best_rank[0]
            S[(t, g)] = best

    tables = DpTables({k: Fraction(v, L) for k, v in R_int.items()}, S)
    prices: list[Price] = []
    path: list[Contour] = []
    g = DUMMY
    for t in range(1, T + 1):
        g = S[(t, g)]
        path.append(g)
        p = contour_price(g, t, c)
        prices.append(p if _count_at_least(inst.demand_at(t), p) > 0 else SKIP)
    return PreannouncedSolution(PriceSchedule(tuple(prices)), tables.R[(1, DUMMY)], tables, tuple(path))


# --- brute-force oracle ----------------------------------------------------

BRUTE_MAX_T = 5
BRUTE_MAX_D = 12


def candidate_prices(inst: MarketInstance, t: int) -> list[Price]:
    """``{v_{j,s} + (t - s) c : s <= t}`` plus SKIP, sorted with SKIP last."""
    c = _linear_c(inst)
    vals = {v + (t - s) * c for s in range(1, t + 1) for v in inst.demand_at(s)}
    return sorted(vals) + [SKIP]


def solve_preannounced_bruteforce(inst: MarketInstance) -> tuple[PriceSchedule, Fraction]:
    """Enumerate every schedule over the candidate price sets.

    Revenue of a schedule under linear storage is the sum, over periods,
    of (price at the cheapest source) x (items whose value covers the
    effective price); effective prices only depend on the prefix, so the
    enumeration walks prefixes depth-first. The winning schedule is
    re-evaluated with :func:`best_response_linear` as a consistency check.
    """
    c = _linear_c(inst)
    T = inst.periods
    D = sum(len(inst.demand_at(t)) for t in range(1, T + 1))
    if T > BRUTE_MAX_T or D > BRUTE_MAX_D:
        raise InstanceTooLarge(f"brute force limited to T<={BRUTE_MAX_T}, D<={BRUTE_MAX_D}")
    cands = [candidate_prices(inst, t) for t in range(1, T + 1)]
    cols = [inst.demand_at(t) for t in range(1, T + 1)]

    best_rev: Fraction | None = None
    best_prices: tuple[Price, ...] = ()
    prices: list[Price] = []

    # carry (effective price, price paid at its source) forward one period
    def walk(t: int, carry: tuple[Price, Price], rev: Fraction) -> None:
        nonlocal best_rev, best_prices
        if t == T:
            if best_rev is None or rev > best_rev:
                best_rev, best_prices = rev, tuple(prices)
            return
        e_prev, paid_prev = carry
        e_store = e_prev + c if e_prev is not SKIP else SKIP
        for p in cands[t]:
            # latest source wins ties
            if p is not SKIP and p <= e_store:
                e, paid = p, p
            else:
                e, paid = e_store, paid_prev
            sold = _count_at_least(cols[t], e)
            prices.append(p)
            walk(t + 1, (e, paid), rev + (paid * sold if sold else 0))
            prices.pop()

    walk(0, (SKIP, SKIP), Fraction(0))
    schedule = PriceSchedule(best_prices)
    checked = best_response_linear(inst, schedule).revenue
    if checked != best_rev:
        raise AssertionError(f"brute-force evaluator disagrees with best response: {best_rev} != {checked}")
    return schedule, best_rev


def best_fixed_price(inst: MarketInstance) -> tuple[Fraction, Fraction]:
    """Best constant price over the pooled value set; ties go to the higher price.

    A constant price never rewards storing, so revenue is price times the
    number of items valued at least that much, for any storage model.
    """
    pooled = inst.all_values()
    best = (Fraction(0), Fraction(0))
    for j, v in enumerate(pooled, start=1):
        # count of values >= v includes later duplicates
        if j < len(pooled) and pooled[j] == v:
            continue
        rev = j * v
        if rev > best[1]:
            best = (v, rev)
    return best



@dataclass(frozen=True)
class GridSearchResult:
    best_revenue: Fraction
    optimal: tuple[tuple[PriceSchedule, int], ...]
    schedules_checked: int


GRID_MAX_SCHEDULES = 200_000


def enumerate_grid_schedules(
    inst: MarketInstance, levels, *, max_schedules: int = GRID_MAX_SCHEDULES
) -> GridSearchResult:
    """Score every schedule drawn from per-period price lists, any storage model.

    Returns the best revenue and every schedule attaining it together with
    the total storage its best response induces.
    """
    levels = [list(lv) for lv in levels]
    if len(levels) != inst.periods:
        raise InstanceTooLarge(f"need {inst.periods} price levels, got {len(levels)}")
    count = 1
    for lv in levels:
        count *= len(lv)
    if count > max_schedules:
        raise InstanceTooLarge(f"{count} schedules exceed limit {max_schedules}")
    best: Fraction | None = None
    winners: list[tuple[PriceSchedule, int]] = []
    for prices in itertools.product(*levels):
        sched = PriceSchedule(tuple(prices))
        out = best_response(inst, sched)
        if best is None or out.revenue > best:
            best, winners = out.revenue, [(sched, out.total_storage)]
        elif out.revenue == best:
            winners.append((sched, out.total_storage))
    return GridSearchResult(best if best is not None else Fraction(0), tuple(winners), count)
