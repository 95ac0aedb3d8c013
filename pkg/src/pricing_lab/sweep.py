"""Revenue-gap sweeps over the log-gap and harmonic families."""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .contingent import (
    build_price_grid,
    discrimination_upper_bound,
    pacman_profile,
    simulate_profile,
    solve_spne_single_buyer,
)
from .errors import ParameterOutOfRange
from .generators import gen_harmonic, gen_loggap
from .model import format_rational
from .preannounced import best_fixed_price, solve_preannounced_dp

CSV_HEADER = ("family", "param", "N", "T", "pa", "cp", "fixed", "ratio", "bound", "ms")
EXTRA_COLUMNS = ("ratio_approx", "bound_approx")
FAMILIES = ("loggap", "harmonic")


@dataclass(frozen=True)
class SweepRow:
    family: str
    param: int
    N: int
    T: int
    pa_revenue: Fraction
    cp_revenue: Fraction
    fixed_revenue: Fraction
    ratio: Fraction | None
    bound: Fraction
    sum_values: Fraction
    wall_time_ms: float

    def csv_fields(self, timing: bool = True) -> list[str]:
        ratio = format_rational(self.ratio) if self.ratio is not None else ""
        return [
            self.family,
            str(self.param),
            str(self.N),
            str(self.T),
            format_rational(self.pa_revenue),
            format_rational(self.cp_revenue),
            format_rational(self.fixed_revenue),
            ratio,
            format_rational(self.bound),
            f"{self.wall_time_ms:.1f}" if timing else "",
            f"{float(self.ratio):.6f}" if self.ratio is not None else "",
            f"{float(self.bound):.6f}",
        ]

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "param": self.param,
            "N": self.N,
            "T": self.T,
            "pa": format_rational(self.pa_revenue),
            "cp": format_rational(self.cp_revenue),
            "fixed": format_rational(self.fixed_revenue),
            "ratio": format_rational(self.ratio) if self.ratio is not None else None,
            "bound": format_rational(self.bound),
        }


def sweep_row(family: str, param: int) -> SweepRow:
    start = time.perf_counter()
    if family == "loggap":
        inst = gen_loggap(param)
        cp = simulate_profile(inst, pacman_profile(inst)).revenue
        n_agents = inst.n_buyers
    elif family == "harmonic":
        inst = gen_harmonic(param)
        grid = build_price_grid(inst, Fraction(1, param * param))
        cp = solve_spne_single_buyer(inst, grid).revenue
        n_agents = param
    else:
        raise ParameterOutOfRange(f"unknown family {family!r}; choose from {FAMILIES}")
    pa = solve_preannounced_dp(inst).revenue
    fixed = best_fixed_price(inst)[1]
    total, bound, _ = discrimination_upper_bound(inst)
    ms = (time.perf_counter() - start) * 1000
    ratio = cp / pa if pa > 0 else None
    return SweepRow(family, param, n_agents, inst.periods, pa, cp, fixed, ratio, bound, total, ms)


def thread_count() -> int:
    raw = os.environ.get("PRICING_LAB_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return min(4, os.cpu_count() or 1)


def ratio_sweep(family: str, params: Iterable[int], threads: int | None = None) -> list[SweepRow]:
    """One row per parameter, computed concurrently, returned in parameter order."""
    if family not in FAMILIES:
        raise ParameterOutOfRange(f"unknown family {family!r}; choose from {FAMILIES}")
    params = sorted(params)
    workers = threads or thread_count()
    if workers == 1 or len(params) <= 1:
        return [sweep_row(family, p) for p in params]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: sweep_row(family, p), params))


def rows_to_csv(rows: list[SweepRow], timing: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER + EXTRA_COLUMNS)
    for row in rows:
        writer.writerow(row.csv_fields(timing))
    return buf.getvalue()


def parse_range(text: str) -> list[int]:
    """Parse ``"2..6"``, ``"4,8,16"`` or a single integer."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise ParameterOutOfRange(f"bad parameter range {text!r}") from None
    if not out:
        raise ParameterOutOfRange(f"empty parameter range {text!r}")
    return sorted(set(out))
