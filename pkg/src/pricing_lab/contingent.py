"""Contingent (history-dependent) pricing on finite price grids.

The retailer posts a price each period after observing the state; buyers
then choose how many units to buy. Everything here is exact and works on
a finite grid of candidate prices, so "equilibrium" means subgame perfect
relative to that grid.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .consumer import ConsumerPlan, MarketOutcome, _outcome
from .errors import (
    InfeasibleAction,
    MultiBuyerNotSupported,
    ParameterOutOfRange,
    SingleBuyerNotSupported,
    StateSpaceTooLarge,
)
from .model import SKIP, MarketInstance, Price, PriceSchedule, format_rational, to_rational
from .preannounced import best_fixed_price

# --- price grids ------------------------------------------------------------


@dataclass(frozen=True)
class PriceGrid:
    """Sorted candidate prices per period (1-based), each ending with SKIP."""

    levels: tuple[tuple[Price, ...], ...]
    delta: Fraction | None = None

    def at(self, t: int) -> tuple[Price, ...]:
        return self.levels[t - 1]

    def numeric(self, t: int) -> tuple[Fraction, ...]:
        return tuple(p for p in self.levels[t - 1] if p is not SKIP)

    def size(self) -> int:
        return sum(len(lv) for lv in self.levels)

    def refines(self, other: "PriceGrid") -> bool:
        return len(self.levels) == len(other.levels) and all(
            set(b) <= set(a) for a, b in zip(self.levels, other.levels)
        )


def _storage_offsets(inst: MarketInstance, gap: int) -> set[Fraction]:
    """Possible storage bills of one unit held for ``gap`` periods."""
    marg = inst.storage.marginal_set()
    sums = {Fraction(0)}
    for _ in range(gap):
        sums = {a + m for a in sums for m in marg}
    return sums


def build_price_grid(inst: MarketInstance, delta=None) -> PriceGrid:
    """Candidates v_{j,s} + (t - s) c for every period s, before or after t.

    Under concave storage ``(t - s) c`` generalizes to any sum of ``|t - s|``
    storage marginals. ``delta`` adds the lattice 0, delta, 2 delta, ... up
    to the total value of all demand: a unit bought early can be worth more
    than any single valuation because it changes the prices that follow.
    """
    if delta is not None:
        delta = to_rational(delta)
        if delta <= 0:
            raise ParameterOutOfRange(f"grid resolution must be positive, got {delta}")
    T = inst.periods
    values = [inst.demand_at(s) for s in range(1, T + 1)]
    offsets = {g: _storage_offsets(inst, g) for g in range(T)}
    top = sum((v for col in values for v in col), Fraction(0))
    lattice: set[Fraction] = set()
    if delta is not None:
        lattice = {k * delta for k in range(math.floor(top / delta) + 1)}
    levels = []
    for t in range(1, T + 1):
        cands = set(lattice)
        for s in range(1, T + 1):
            sign = 1 if s <= t else -1
            for a in offsets[abs(t - s)]:
                for v in set(values[s - 1]):
                    p = v + sign * a
                    if p >= 0:
                        cands.add(p)
        levels.append(tuple(sorted(cands)) + (SKIP,))
    return PriceGrid(tuple(levels), delta)


# --- single-buyer backward induction --------------------------------------


@dataclass(frozen=True)
class SpneResult:
    revenue: Fraction
    prices: tuple[Price, ...]
    plan: ConsumerPlan
    buyer_utility: Fraction

    def __iter__(self):
        return iter((self.revenue, self.prices, self.plan))


MAX_SINGLE_WORK = 20_000_000


def solve_spne_single_buyer(
    inst: MarketInstance, grid: PriceGrid | None = None, *, max_work: int = MAX_SINGLE_WORK
) -> SpneResult:
    """Backward induction over (period, buyer inventory) with grid prices.

    At each retailer node every grid price is tried; the buyer answers with
    her exact best reply given the continuation, preferring to buy more and
    then to consume sooner when indifferent. The retailer keeps the price
    with the highest continuation revenue; among equal revenues the one
    leaving the buyer least utility, then the higher price.
    """
    if not inst.is_single:
        raise MultiBuyerNotSupported("solve_spne_single_buyer needs a single-buyer instance")
    grid = grid or build_price_grid(inst)
    T = inst.periods
    vals = [inst.unit_values(t) for t in range(1, T + 1)]
    caps = [len(v) for v in vals]
    prefix = [[sum(v[:x], Fraction(0)) for x in range(len(v) + 1)] for v in vals]
    # rem[t]: positive units after period t
    rem = [0] * (T + 1)
    for t in range(T - 1, -1, -1):
        rem[t] = rem[t + 1] + caps[t]
    work = sum(len(grid.at(t)) * (rem[t - 1] + 1) * (caps[t - 1] + rem[t] + 1) for t in range(1, T + 1))
    if work > max_work:
        raise StateSpaceTooLarge(f"single-buyer game needs ~{work} evaluations (limit {max_work})")

    WR = {0: Fraction(0)}
    WB = {0: Fraction(0)}
    price_at: dict[tuple[int, int], Price] = {}
    reply: dict[tuple[int, int, Price], tuple[int, int]] = {}
    for t in range(T, 0, -1):
        cap, bound = caps[t - 1], rem[t]
        cost = [inst.storage.cost(k) for k in range(bound + 1)]
        newR, newB = {}, {}
        for s in range(rem[t - 1] + 1):
            best_key = None
            for p in grid.at(t):
                qmax = 0 if p is SKIP else max(0, cap + bound - s)
                bkey = None
                for q in range(qmax + 1):
                    pay = p * q if q else Fraction(0)
                    for x in range(min(s + q, cap) + 1):
                        s2 = s + q - x
                        if s2 > bound:
                            continue
                        u = prefix[t - 1][x] - pay - cost[s2] + WB[s2]
                        k = (u, q, x)
                        if bkey is None or k > bkey:
                            bkey, choice = k, (q, x, s2)
                q, x, s2 = choice
                reply[(t, s, p)] = (q, x)
                rev = (p * q if q else Fraction(0)) + WR[s2]
                rkey = (rev, -bkey[0], p)
                if best_key is None or rkey > best_key:
                    best_key = rkey
                    price_at[(t, s)] = p
            newR[s], newB[s] = best_key[0], -best_key[1]
        WR, WB = newR, newB

    prices, q_plan, x_plan, s = [], [], [], 0
    for t in range(1, T + 1):
        p = price_at[(t, s)]
        q, x = reply[(t, s, p)]
        prices.append(p)
        q_plan.append(q)
        x_plan.append(x)
        s += q - x
    return SpneResult(WR[0], tuple(prices), ConsumerPlan.from_flows(q_plan, x_plan), WB[0])


# --- multi-buyer game: states, profiles, simulation -----------------------


@dataclass(frozen=True)
class GameState:
    """Start of period ``t``: what each buyer holds and has already consumed."""

    t: int
    inventories: tuple[int, ...]
    satisfied: tuple[frozenset, ...]
    history: tuple[Price, ...] = field(default=(), compare=False)

    @classmethod
    def initial(cls, n_buyers: int) -> "GameState":
        return cls(1, (0,) * n_buyers, (frozenset(),) * n_buyers)

    def describe(self) -> dict:
        return {
            "t": self.t,
            "inventories": list(self.inventories),
            "satisfied": [sorted(s) for s in self.satisfied],
        }


Retailer = Callable[[GameState], Price]
Buyer = Callable[[GameState, Price], int]


@dataclass(frozen=True)
class StrategyProfile:
    retailer: Retailer
    buyers: tuple[Buyer, ...]
    name: str = ""


def _require_multi(inst: MarketInstance) -> None:
    if inst.is_single:
        raise SingleBuyerNotSupported("the multi-buyer game needs a multi-buyer instance")


def upcoming_demand(inst: MarketInstance, state: GameState, i: int) -> list[int]:
    """Buyer ``i``'s unsatisfied demand periods from ``state.t`` on, best first.

    Periods are ranked by value net of the cost of holding a unit until
    then (ties to the earlier period); held units serve the front of this
    list, so a unit bought for a valuable later period is not eaten early.
    """
    vals = inst.buyer_values(i)
    m = inst.storage.marginal(0)
    ahead = [
        tau
        for tau in range(state.t, inst.periods + 1)
        if vals[tau - 1] > 0 and tau not in state.satisfied[i]
    ]
    return sorted(ahead, key=lambda tau: (-(vals[tau - 1] - m * tau), tau))


def open_items(inst: MarketInstance, state: GameState, i: int) -> tuple[list[int], list[int]]:
    """Buyer ``i``'s unsatisfied demand periods: (already past, still ahead and uncovered)."""
    vals = inst.buyer_values(i)
    past = [tau for tau in range(1, state.t) if vals[tau - 1] > 0 and tau not in state.satisfied[i]]
    ahead = upcoming_demand(inst, state, i)[state.inventories[i]:]
    return past, sorted(ahead)


def purchase_options(
    inst: MarketInstance, state: GameState, i: int, price: Price, max_inventory: int | None = None
) -> range:
    if price is SKIP or state.t > inst.periods:
        return range(0, 1)
    vals = inst.buyer_values(i)
    ahead = sum(1 for tau in range(state.t, inst.periods + 1) if vals[tau - 1] > 0)
    inv = state.inventories[i]
    qmax = max(0, ahead - inv)
    if max_inventory is not None:
        eats = 1 if vals[state.t - 1] > 0 else 0
        qmax = min(qmax, max(0, max_inventory + eats - inv))
    return range(qmax + 1)


def step(
    inst: MarketInstance, state: GameState, price: Price, actions: Sequence[int]
) -> tuple[GameState, Fraction, tuple[Fraction, ...], tuple[int, ...]]:
    """Play one period. A buyer consumes now iff the current period is among
    those her held units are assigned to (see :func:`upcoming_demand`).

    Returns (next state, revenue, per-buyer stage utility, consumption).
    """
    t = state.t
    inv_next, sat_next, utils, eaten = [], [], [], []
    revenue = Fraction(0)
    for i, q in enumerate(actions):
        if q and price is SKIP:
            raise InfeasibleAction(f"buyer {i} bought {q} units at a skip period t={t}")
        if q < 0:
            raise InfeasibleAction(f"buyer {i} chose negative purchase {q}")
        v = inst.buyer_values(i)[t - 1]
        avail = state.inventories[i] + q
        x = 1 if (v > 0 and t in upcoming_demand(inst, state, i)[:avail]) else 0
        end = avail - x
        pay = price * q if q else Fraction(0)
        revenue += pay
        utils.append(v * x - pay - inst.storage.cost(end))
        inv_next.append(end)
        sat_next.append(state.satisfied[i] | {t} if x else state.satisfied[i])
        eaten.append(x)
    nxt = GameState(t + 1, tuple(inv_next), tuple(sat_next), state.history + (price,))
    return nxt, revenue, tuple(utils), tuple(eaten)


def _actions(inst: MarketInstance, profile: StrategyProfile, state: GameState, price: Price, check: bool = True):
    acts = []
    for i, b in enumerate(profile.buyers):
        q = b(state, price)
        if check and q not in purchase_options(inst, state, i, price):
            raise InfeasibleAction(f"buyer {i} chose {q} at t={state.t}, price {price}")
        acts.append(q)
    return tuple(acts)


@dataclass(frozen=True)
class SimulationResult:
    revenue: Fraction
    prices: tuple[Price, ...]
    sales: tuple[int, ...]
    utilities: tuple[Fraction, ...]
    outcome: MarketOutcome | None = None

    def __iter__(self):
        return iter((self.revenue, self.prices, self.outcome))


def simulate_profile(
    inst: MarketInstance, profile: StrategyProfile, start: GameState | None = None
) -> SimulationResult:
    """Play the profile forward; ``outcome`` is filled only for a full game."""
    _require_multi(inst)
    if len(profile.buyers) != inst.n_buyers:
        raise ParameterOutOfRange(f"profile has {len(profile.buyers)} buyers, instance {inst.n_buyers}")
    state = start or GameState.initial(inst.n_buyers)
    full = state.t == 1 and not any(state.inventories) and not any(state.satisfied)
    N = inst.n_buyers
    q_hist = [[] for _ in range(N)]
    x_hist = [[] for _ in range(N)]
    prices, sales = [], []
    revenue = Fraction(0)
    utils = [Fraction(0)] * N
    while state.t <= inst.periods:
        p = profile.retailer(state)
        acts = _actions(inst, profile, state, p)
        state, rev, stage, eaten = step(inst, state, p, acts)
        revenue += rev
        utils = [u + s for u, s in zip(utils, stage)]
        prices.append(p)
        sales.append(sum(acts))
        for i in range(N):
            q_hist[i].append(acts[i])
            x_hist[i].append(eaten[i])
    outcome = None
    if full:
        plans = [ConsumerPlan.from_flows(q_hist[i], x_hist[i]) for i in range(N)]
        outcome = _outcome(inst, PriceSchedule(tuple(prices)), plans)
    return SimulationResult(revenue, tuple(prices), tuple(sales), tuple(utils), outcome)


# --- built-in profiles ------------------------------------------------------


def pacman_profile(inst: MarketInstance) -> StrategyProfile:
    """Retailer prices at the highest value not yet bought; buyers get it while they can.

    The retailer looks at every unsatisfied, uncovered demand item, including
    ones whose period has already gone by. A buyer buys one unit for each
    upcoming uncovered demand period whose value covers the price plus
    the cost of holding the unit until then.
    """
    _require_multi(inst)

    def retailer(state: GameState) -> Price:
        best: Price = SKIP
        for i in range(inst.n_buyers):
            past, ahead = open_items(inst, state, i)
            for tau in past + ahead:
                v = inst.buyer_values(i)[tau - 1]
                if best is SKIP or v > best:
                    best = v
        return best

    def make_buyer(i: int) -> Buyer:
        def buyer(state: GameState, price: Price) -> int:
            if price is SKIP:
                return 0
            _, ahead = open_items(inst, state, i)
            m = inst.storage.marginal(0)
            return sum(1 for tau in ahead if inst.buyer_values(i)[tau - 1] >= price + m * (tau - state.t))

        return buyer

    return StrategyProfile(retailer, tuple(make_buyer(i) for i in range(inst.n_buyers)), "pacman")


def _table1_shape(inst: MarketInstance) -> None:
    _require_multi(inst)
    if inst.periods != 2 or inst.n_buyers != 2 or not inst.is_linear:
        raise ParameterOutOfRange("the table1 profiles need a two-buyer, two-period linear instance")


def _table1_buyers(inst: MarketInstance) -> tuple[Buyer, Buyer]:
    (a1, a2), (b1, b2) = inst.demand.values
    c = inst.storage.c

    def buyer1(state: GameState, price: Price) -> int:
        if price is SKIP:
            return 0
        if state.t == 1:
            if price <= a2 - c:
                return 2
            return 1 if price <= a1 else 0
        if state.inventories[0] >= 1:
            return 0
        return 1 if price <= a2 else 0

    def buyer2(state: GameState, price: Price) -> int:
        v = (b1, b2)[state.t - 1]
        if price is SKIP or v <= 0 or state.inventories[1] >= 1:
            return 0
        return 1 if price <= v else 0

    return buyer1, buyer2


def table1_threat_profile(inst: MarketInstance) -> StrategyProfile:
    """Low first price; the second price collapses only if buyer 1 stocked up."""
    _table1_shape(inst)
    (_, a2), (b1, b2) = inst.demand.values

    def retailer(state: GameState) -> Price:
        if state.t == 1:
            return b1
        return b2 if state.inventories[0] >= 1 else a2

    return StrategyProfile(retailer, _table1_buyers(inst), "table1-threat")


def table1_unconditional_profile(inst: MarketInstance) -> StrategyProfile:
    """Same buyers, but the retailer posts the low prices whatever happens."""
    _table1_shape(inst)
    (_, _), (b1, b2) = inst.demand.values

    def retailer(state: GameState) -> Price:
        return b1 if state.t == 1 else b2

    return StrategyProfile(retailer, _table1_buyers(inst), "table1-unconditional")


BUILTIN_PROFILES = {
    "pacman": pacman_profile,
    "table1-threat": table1_threat_profile,
    "table1-unconditional": table1_unconditional_profile,
}


def builtin_profile(name: str, inst: MarketInstance) -> StrategyProfile:
    key = name.removeprefix("builtin:")
    if key not in BUILTIN_PROFILES:
        raise ParameterOutOfRange(f"unknown profile {name!r}; known: {sorted(BUILTIN_PROFILES)}")
    return BUILTIN_PROFILES[key](inst)


def deviate(
    profile: StrategyProfile,
    state: GameState,
    *,
    price: Price | None = None,
    buyer: int | None = None,
    action: int | None = None,
) -> StrategyProfile:
    """Profile that plays ``price`` (and/or ``buyer`` plays ``action``) at ``state`` only."""

    def retailer(s: GameState) -> Price:
        if price is not None and s == state:
            return price
        return profile.retailer(s)

    buyers = list(profile.buyers)
    if buyer is not None:
        base = profile.buyers[buyer]

        def patched(s: GameState, p: Price) -> int:
            if s == state and (price is None or p == price):
                return action
            return base(s, p)

        buyers[buyer] = patched
    return StrategyProfile(retailer, tuple(buyers), profile.name + "+deviation")


# --- certification ------------------------------------------------------------


@dataclass(frozen=True)
class RetailerDeviation:
    state: GameState
    price: Price
    gain: Fraction


@dataclass(frozen=True)
class BuyerDeviation:
    buyer: int
    state: GameState
    price: Price
    action: int
    gain: Fraction


@dataclass(frozen=True)
class CertificationReport:
    certified: bool
    grid: PriceGrid
    worst_retailer: RetailerDeviation | None
    worst_buyer: BuyerDeviation | None
    states_examined: int
    on_path: SimulationResult | None = None

    def to_dict(self) -> dict:
        out = {
            "certified": self.certified,
            "states_examined": self.states_examined,
            "worst_retailer_deviation": None,
            "worst_buyer_deviation": None,
        }
        if self.worst_retailer:
            d = self.worst_retailer
            out["worst_retailer_deviation"] = {
                "state": d.state.describe(),
                "price": format_rational(d.price),
                "gain": format_rational(d.gain),
            }
        if self.worst_buyer:
            d = self.worst_buyer
            out["worst_buyer_deviation"] = {
                "buyer": d.buyer,
                "state": d.state.describe(),
                "price": format_rational(d.price),
                "action": d.action,
                "gain": format_rational(d.gain),
            }
        if self.on_path is not None:
            out["on_path"] = {
                "prices": [format_rational(p) for p in self.on_path.prices],
                "revenue": format_rational(self.on_path.revenue),
                "consumer_surplus": format_rational(sum(self.on_path.utilities, Fraction(0))),
            }
        return out


MAX_CERT_STATES = 200_000


def reachable_states(
    inst: MarketInstance, max_inventory: int = 2, max_states: int = MAX_CERT_STATES
) -> list[GameState]:
    """Every state reachable under some price sequence and some buyer actions."""
    _require_multi(inst)
    layer = {GameState.initial(inst.n_buyers)}
    out: list[GameState] = []
    while layer:
        ordered = sorted(layer, key=lambda s: (s.inventories, [sorted(x) for x in s.satisfied]))
        out.extend(ordered)
        if len(out) > max_states:
            raise StateSpaceTooLarge(f"more than {max_states} reachable states")
        nxt = set()
        for state in ordered:
            if state.t > inst.periods:
                continue
            # a positive price admits every feasible purchase; skip only admits 0
            options = [
                purchase_options(inst, state, i, Fraction(1), max_inventory) for i in range(inst.n_buyers)
            ]
            for acts in itertools.product(*options):
                nxt.add(step(inst, state, Fraction(1), acts)[0])
        layer = nxt
    return out


def certify_spne(
    inst: MarketInstance,
    profile: StrategyProfile,
    grid: PriceGrid | None = None,
    *,
    max_inventory: int = 2,
    max_states: int = MAX_CERT_STATES,
) -> CertificationReport:
    """One-shot deviation check of ``profile`` at every reachable state.

    The retailer may switch to any grid price; each buyer, at every
    (state, posted grid price) node, may switch to any feasible purchase
    count while everyone else keeps to the profile. Only strict gains
    refute the profile.
    """
    _require_multi(inst)
    grid = grid or build_price_grid(inst)
    states = reachable_states(inst, max_inventory, max_states)
    N = inst.n_buyers
    memo: dict[GameState, tuple[Fraction, tuple[Fraction, ...]]] = {}

    def value(state: GameState) -> tuple[Fraction, tuple[Fraction, ...]]:
        if state.t > inst.periods:
            return Fraction(0), (Fraction(0),) * N
        if state in memo:
            return memo[state]
        p = profile.retailer(state)
        res = after_price(state, p)
        memo[state] = res
        return res

    def play(state: GameState, p: Price, acts) -> tuple[Fraction, tuple[Fraction, ...]]:
        nxt, rev, stage, _ = step(inst, state, p, acts)
        cr, cu = value(nxt)
        return rev + cr, tuple(a + b for a, b in zip(stage, cu))

    def after_price(state: GameState, p: Price):
        return play(state, p, _actions(inst, profile, state, p))

    worst_r: RetailerDeviation | None = None
    worst_b: BuyerDeviation | None = None
    for state in states:
        if state.t > inst.periods:
            continue
        base_rev = value(state)[0]
        for p in grid.at(state.t):
            acts = _actions(inst, profile, state, p)
            rev, utils = play(state, p, acts)
            gain = rev - base_rev
            if worst_r is None or gain > worst_r.gain:
                worst_r = RetailerDeviation(state, p, gain)
            for i in range(N):
                for alt in purchase_options(inst, state, i, p, max_inventory):
                    if alt == acts[i]:
                        continue
                    dev = acts[:i] + (alt,) + acts[i + 1:]
                    g = play(state, p, dev)[1][i] - utils[i]
                    if worst_b is None or g > worst_b.gain:
                        worst_b = BuyerDeviation(i, state, p, alt, g)

    certified = (worst_r is None or worst_r.gain <= 0) and (worst_b is None or worst_b.gain <= 0)
    return CertificationReport(
        certified, grid, worst_r, worst_b, len(states), simulate_profile(inst, profile)
    )


# --- perfect-discrimination bound ----------------------------------------------


def harmonic_number(n: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def discrimination_upper_bound(inst: MarketInstance) -> tuple[Fraction, Fraction, bool]:
    """(sum of all demand values, H_l * best fixed-price revenue, first <= second)."""
    vals = inst.all_values()
    total = sum(vals, Fraction(0))
    bound = harmonic_number(len(vals)) * best_fixed_price(inst)[1]
    return total, bound, total <= bound
