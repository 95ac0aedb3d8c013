"""Command-line front end: ``pricing-lab <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .consumer import best_response
from .contingent import (
    build_price_grid,
    builtin_profile,
    certify_spne,
    discrimination_upper_bound,
    simulate_profile,
    solve_spne_single_buyer,
)
from .errors import PricingError
from .generators import (
    ConcaveCx,
    Harmonic,
    LogGap,
    Random,
    Table1,
    gen_table1_single,
    generate,
)
from .model import (
    MarketInstance,
    dumps_instance,
    format_rational,
    load_instance,
    to_price,
    to_rational,
)
from .preannounced import best_fixed_price, solve_preannounced_bruteforce, solve_preannounced_dp
from .sweep import FAMILIES, parse_range, ratio_sweep, rows_to_csv

FAMILY_CHOICES = ("table1", "table1-single", "harmonic", "loggap", "concave-cx", "random")


def _rational_arg(text: str):
    try:
        return to_rational(text)
    except (PricingError, ValueError, TypeError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _prices_arg(text: str):
    try:
        return [to_price(p.strip()) for p in text.split(",")]
    except (PricingError, ValueError, TypeError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad price list: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pricing-lab", description="Storable-good pricing solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_instance(p: argparse.ArgumentParser) -> None:
        p.add_argument("--instance", required=True, help="instance JSON file")
        p.add_argument("--out", help="write JSON here instead of stdout")

    gen = sub.add_parser("generate", help="write an instance from a built-in family")
    gen.add_argument("--family", required=True, choices=FAMILY_CHOICES)
    gen.add_argument("--N", type=int, default=4, help="harmonic size / random buyers")
    gen.add_argument("--n", type=int, default=2, help="log-gap exponent")
    gen.add_argument("--eps", type=_rational_arg, default=None)
    gen.add_argument("--n1", type=int, default=5)
    gen.add_argument("--n2", type=int, default=5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--T", type=int, default=3)
    gen.add_argument("--kind", choices=("multi", "single"), default="multi")
    gen.add_argument("--storage", choices=("linear", "concave"), default="linear")
    gen.add_argument("--out", help="write JSON here instead of stdout")

    solve = sub.add_parser("solve", help="optimal pricing")
    solve_sub = solve.add_subparsers(dest="mechanism", required=True)
    pre = solve_sub.add_parser("pre", help="best preannounced schedule")
    with_instance(pre)
    pre.add_argument("--oracle", action="store_true", help="also run the brute-force check")
    cp = solve_sub.add_parser("cp", help="single-buyer contingent pricing on a grid")
    with_instance(cp)
    cp.add_argument("--grid-delta", type=_rational_arg, default=None)

    respond = sub.add_parser("respond", help="buyer best response to a schedule")
    with_instance(respond)
    respond.add_argument("--prices", type=_prices_arg, required=True, help="comma list, 'skip' allowed")

    sim = sub.add_parser("simulate", help="play a strategy profile forward")
    with_instance(sim)
    sim.add_argument("--profile", required=True, help="builtin:pacman, builtin:table1-threat, ...")

    cert = sub.add_parser("certify", help="check a profile for profitable one-shot deviations")
    with_instance(cert)
    cert.add_argument("--profile", required=True)
    cert.add_argument("--grid-delta", type=_rational_arg, default=None)
    cert.add_argument("--max-inventory", type=int, default=2)

    bounds = sub.add_parser("bounds", help="fixed-price revenue and discrimination bound")
    with_instance(bounds)

    sweep = sub.add_parser("sweep", help="revenue-gap table over a family")
    sweep.add_argument("--family", required=True, choices=FAMILIES)
    sweep.add_argument("--n", required=True, help="range like 2..6 or list like 4,8")
    sweep.add_argument("--csv", help="write CSV here; JSON rows go to stdout otherwise")
    sweep.add_argument("--no-timing", action="store_true", help="leave the ms column empty")
    sweep.add_argument("--threads", type=int, default=None)
    return parser


def _generate(args) -> MarketInstance:
    fam = args.family
    if fam == "table1":
        return generate(Table1())
    if fam == "table1-single":
        return gen_table1_single()
    if fam == "harmonic":
        return generate(Harmonic(args.N, args.eps or 0))
    if fam == "loggap":
        return generate(LogGap(args.n))
    if fam == "concave-cx":
        return generate(ConcaveCx(args.n1, args.n2, args.eps if args.eps is not None else to_rational("1/16")))
    return generate(Random(args.seed, args.T, args.N, kind=args.kind, storage=args.storage))


def _prices(prices) -> list[str]:
    return [format_rational(p) for p in prices]


def _dispatch(args) -> str:
    if args.command == "generate":
        return dumps_instance(_generate(args)).rstrip("\n")
    if args.command == "sweep":
        rows = ratio_sweep(args.family, parse_range(args.n), args.threads)
        if args.csv:
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                fh.write(rows_to_csv(rows, timing=not args.no_timing))
        return json.dumps([r.to_dict() for r in rows])

    inst = load_instance(args.instance)
    if args.command == "solve" and args.mechanism == "pre":
        sol = solve_preannounced_dp(inst)
        out = {"prices": _prices(sol.schedule), "revenue": format_rational(sol.revenue)}
        if args.oracle:
            _, brute = solve_preannounced_bruteforce(inst)
            out["oracle_revenue"] = format_rational(brute)
            out["oracle_agrees"] = brute == sol.revenue
        return json.dumps(out)
    if args.command == "solve":
        res = solve_spne_single_buyer(inst, build_price_grid(inst, args.grid_delta))
        return json.dumps(
            {
                "prices": _prices(res.prices),
                "revenue": format_rational(res.revenue),
                "buyer_utility": format_rational(res.buyer_utility),
                "plan": res.plan.to_dict(),
            }
        )
    if args.command == "respond":
        return json.dumps(best_response(inst, args.prices).to_dict())
    if args.command == "simulate":
        res = simulate_profile(inst, builtin_profile(args.profile, inst))
        return json.dumps(
            {
                "prices": _prices(res.prices),
                "sales": list(res.sales),
                "revenue": format_rational(res.revenue),
                "consumer_surplus": format_rational(res.outcome.consumer_surplus),
                "outcome": res.outcome.to_dict(),
            }
        )
    if args.command == "certify":
        report = certify_spne(
            inst,
            builtin_profile(args.profile, inst),
            build_price_grid(inst, args.grid_delta),
            max_inventory=args.max_inventory,
        )
        return json.dumps(report.to_dict())
    if args.command == "bounds":
        price, fixed = best_fixed_price(inst)
        total, bound, holds = discrimination_upper_bound(inst)
        return json.dumps(
            {
                "fixed_price": format_rational(price),
                "fixed_revenue": format_rational(fixed),
                "sum_values": format_rational(total),
                "bound": format_rational(bound),
                "holds": holds,
            }
        )
    raise AssertionError(f"unhandled command {args.command}")


def run_command(argv: Sequence[str] | None = None) -> int:
    """Run one command; returns 0 on success, 1 on a domain error, 2 on bad usage."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = _dispatch(args)
    except (PricingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
