"""Buyer best responses to a fixed price schedule, and plan auditing."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .errors import InventoryBoundExceeded, PeriodOutOfRange
from .model import (
    SKIP,
    LinearStorage,
    MarketInstance,
    Price,
    PriceSchedule,
    as_schedule,
    format_rational,
)

# Largest per-buyer inventory the concave DP will tabulate.
MAX_INVENTORY = 10_000


@dataclass(frozen=True)
class ConsumerPlan:
    """Purchases ``q``, consumption ``x`` and end-of-period storage ``S``."""

    q: tuple[int, ...]
    x: tuple[int, ...]
    S: tuple[int, ...]

    @classmethod
    def from_flows(cls, q: Sequence[int], x: Sequence[int]) -> "ConsumerPlan":
        level, S = 0, []
        for qt, xt in zip(q, x):
            level += qt - xt
            S.append(level)
        return cls(tuple(q), tuple(x), tuple(S))

    @property
    def total_storage(self) -> int:
        return sum(self.S)

    def to_dict(self) -> dict[str, Any]:
        return {"q": list(self.q), "x": list(self.x), "S": list(self.S)}


@dataclass(frozen=True)
class MarketOutcome:
    plans: tuple[ConsumerPlan, ...]
    revenue: Fraction
    consumer_surplus: Fraction
    total_storage: int
    storage_cost_paid: Fraction
    utilities: tuple[Fraction, ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {
            "revenue": format_rational(self.revenue),
            "consumer_surplus": format_rational(self.consumer_surplus),
            "total_storage": self.total_storage,
            "storage_cost_paid": format_rational(self.storage_cost_paid),
            "utilities": [format_rational(u) for u in self.utilities],
            "plans": [p.to_dict() for p in self.plans],
        }


@dataclass(frozen=True)
class AuditReport:
    utilities: tuple[Fraction, ...]
    revenue: Fraction
    feasible: bool
    violations: tuple[str, ...] = ()


def effective_price(schedule: PriceSchedule | Sequence[Any], c: Fraction, t: int) -> tuple[Price, int]:
    """Cheapest way to hold one unit at ``t``: min over s <= t of p_s + (t - s) c.

    Returns ``(price, source)``; among equally cheap sources the latest
    one wins, so the unit is stored as little as possible.
    """
    sched = schedule if isinstance(schedule, PriceSchedule) else PriceSchedule(tuple(schedule))
    if not 1 <= t <= len(sched):
        raise PeriodOutOfRange(f"period {t} outside 1..{len(sched)}")
    best: Price = SKIP
    source = t
    for s in range(t, 0, -1):
        p = sched.at(s)
        if p is SKIP:
            continue
        cand = p + (t - s) * c
        if cand < best:
            best, source = cand, s
    return best, source


def _unit_utility(inst: MarketInstance, buyer: int, t: int, x: int) -> Fraction:
    return sum(inst.unit_values(t, buyer)[:x], Fraction(0))


def _outcome(inst: MarketInstance, sched: PriceSchedule, plans: Sequence[ConsumerPlan]) -> MarketOutcome:
    report = audit_plan(inst, sched, plans)
    paid = Fraction(0)
    for plan in plans:
        paid += sum((inst.storage.cost(s) for s in plan.S), Fraction(0))
    return MarketOutcome(
        plans=tuple(plans),
        revenue=report.revenue,
        consumer_surplus=sum(report.utilities, Fraction(0)),
        total_storage=sum(p.total_storage for p in plans),
        storage_cost_paid=paid,
        utilities=report.utilities,
    )


def best_response_linear(
    inst: MarketInstance,
    schedule: PriceSchedule | Sequence[Any],
    *,
    buy_on_tie: bool = True,
) -> MarketOutcome:
    """Utility-maximizing plans under per-unit linear storage cost.

    With linear costs every demand item is an independent decision: the
    unit consumed at ``t`` is bought iff its value covers the effective
    price, at the latest source period attaining it.
    """
    if not isinstance(inst.storage, LinearStorage):
        raise TypeError("best_response_linear needs linear storage; use best_response_concave")
    sched = as_schedule(inst, schedule)
    c = inst.storage.c
    T = inst.periods
    eff = [effective_price(sched, c, t) for t in range(1, T + 1)]
    plans = []
    for b in range(inst.n_buyers):
        q = [0] * T
        x = [0] * T
        for t in range(1, T + 1):
            e, src = eff[t - 1]
            if e is SKIP:
                continue
            for v in inst.unit_values(t, b):
                if v > e or (buy_on_tie and v == e):
                    x[t - 1] += 1
                    q[src - 1] += 1
        plans.append(ConsumerPlan.from_flows(q, x))
    return _outcome(inst, sched, plans)


def _add(a: tuple, b: tuple) -> tuple:
    return tuple(u + v for u, v in zip(a, b))


def _buyer_dp(inst: MarketInstance, sched: PriceSchedule, b: int, buy_on_tie: bool) -> ConsumerPlan:
    T = inst.periods
    vals = [inst.unit_values(t, b) for t in range(1, T + 1)]
    caps = [len(v) for v in vals]
    prefix = []
    for v in vals:
        acc, row = Fraction(0), [Fraction(0)]
        for u in v:
            acc += u
            row.append(acc)
        prefix.append(row)
    # rem[t]: demand strictly after period t (1-based), bounds end-of-t inventory
    rem = [0] * (T + 1)
    for t in range(T - 1, -1, -1):
        rem[t] = rem[t + 1] + caps[t]
    if rem[0] > MAX_INVENTORY:
        raise InventoryBoundExceeded(f"buyer {b} demand {rem[0]} exceeds {MAX_INVENTORY}")
    sign = 1 if buy_on_tie else -1

    # value[s] at period t+1; key = (utility, consumption, -storage, lateness)
    nxt: dict[int, tuple] = {0: (Fraction(0), 0, 0, 0)}
    policy: list[dict[int, tuple[int, int]]] = [dict() for _ in range(T)]
    for t in range(T, 0, -1):
        p = sched.at(t)
        cur: dict[int, tuple] = {}
        cap, bound = caps[t - 1], rem[t]
        for s in range(rem[t - 1] + 1):
            best = None
            qmax = 0 if p is SKIP else max(0, cap + bound - s)
            for q in range(qmax + 1):
                pay = p * q if q else Fraction(0)
                for x in range(min(s + q, cap) + 1):
                    s2 = s + q - x
                    if s2 > bound:
                        continue
                    util = prefix[t - 1][x] - pay - inst.storage.cost(s2)
                    stage = (util, sign * x, -s2, t * q)
                    total = _add(stage, nxt[s2])
                    if best is None or total > best:
                        best = total
                        policy[t - 1][s] = (q, x)
            cur[s] = best
        nxt = cur

    q_plan, x_plan, s = [], [], 0
    for t in range(1, T + 1):
        q, x = policy[t - 1][s]
        s = s + q - x
        if s > rem[t]:
            raise InventoryBoundExceeded(f"inventory {s} above bound {rem[t]} at t={t}")
        q_plan.append(q)
        x_plan.append(x)
    return ConsumerPlan.from_flows(q_plan, x_plan)


def best_response_concave(
    inst: MarketInstance,
    schedule: PriceSchedule | Sequence[Any],
    *,
    buy_on_tie: bool = True,
) -> MarketOutcome:
    """Exact per-buyer optimum by dynamic programming over (period, inventory).

    Each buyer pays ``C(S_t)`` on her own inventory every period. Ties
    among utility-maximal plans go to more consumption (buy when
    indifferent), then less total storage, then later purchases. With a
    linear table the result coincides with :func:`best_response_linear`.
    """
    sched = as_schedule(inst, schedule)
    plans = [_buyer_dp(inst, sched, b, buy_on_tie) for b in range(inst.n_buyers)]
    return _outcome(inst, sched, plans)


def best_response(inst: MarketInstance, schedule, **kw) -> MarketOutcome:
    if isinstance(inst.storage, LinearStorage):
        return best_response_linear(inst, schedule, **kw)
    return best_response_concave(inst, schedule, **kw)


def audit_plan(
    inst: MarketInstance,
    schedule: PriceSchedule | Sequence[Any],
    plans: Sequence[ConsumerPlan],
) -> AuditReport:
    """Recompute each buyer's objective from scratch and flag infeasible plans."""
    sched = as_schedule(inst, schedule)
    T = inst.periods
    violations: list[str] = []
    if len(plans) != inst.n_buyers:
        violations.append(f"expected {inst.n_buyers} plans, got {len(plans)}")
    row_cap = len(inst.rows) if inst.is_single else 1
    utilities = []
    revenue = Fraction(0)
    for b, plan in enumerate(plans[: inst.n_buyers]):
        if not (len(plan.q) == len(plan.x) == len(plan.S) == T):
            violations.append(f"buyer {b}: plan length differs from T={T}")
            utilities.append(Fraction(0))
            continue
        util = Fraction(0)
        prev = 0
        for t in range(1, T + 1):
            q, x, S = plan.q[t - 1], plan.x[t - 1], plan.S[t - 1]
            p = sched.at(t)
            if q < 0 or x < 0:
                violations.append(f"buyer {b}, t={t}: negative purchase or consumption")
            if S != prev + q - x:
                violations.append(f"buyer {b}, t={t}: storage identity broken ({prev}+{q}-{x} != {S})")
            if S < 0:
                violations.append(f"buyer {b}, t={t}: negative storage {S}")
            if x > row_cap:
                violations.append(f"buyer {b}, t={t}: consumption {x} above demand cap {row_cap}")
            if q > 0 and p is SKIP:
                violations.append(f"buyer {b}, t={t}: purchase at a skip period")
            elif q > 0:
                util -= p * q
                revenue += p * q
            util += _unit_utility(inst, b, t, max(x, 0))
            util -= inst.storage.cost(max(S, 0))
            prev = S
        utilities.append(util)
    return AuditReport(tuple(utilities), revenue, not violations, tuple(violations))
