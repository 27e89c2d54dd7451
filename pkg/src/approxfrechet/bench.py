"""Scaling benchmark for the approximate decision procedure."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .approxdecide import approx_decide
from .freespace import exact_frechet
from .generate import perturbed_copy, walk

ALPHA_POLICIES = ("n", "sqrt")
BENCH_FIELDS = ("n", "alpha", "wall_time_ms", "intervals_stored", "cost_ratio", "doubling_ratio")


@dataclass
class BenchRow:
    n: int
    alpha: float
    wall_time_ms: float
    intervals_stored: int
    cost_ratio: Optional[float]
    doubling_ratio: Optional[float]

    def as_csv(self) -> str:
        def fmt(x):
            return "" if x is None else f"{x:.6g}" if isinstance(x, float) else str(x)

        return ",".join(fmt(getattr(self, f)) for f in BENCH_FIELDS)


def alpha_for(n: int, policy: str) -> float:
    if policy == "n":
        return float(n)
    if policy == "sqrt":
        return math.sqrt(n)
    raise ValueError(f"unknown alpha policy {policy!r}; expected one of {ALPHA_POLICIES}")


def bench_threads() -> int:
    raw = os.environ.get("FRECHET_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_bench(
    sizes: Sequence[int],
    policy: str = "n",
    repetitions: int = 3,
    seed: int = 0,
    d: int = 2,
    rho: float = 0.5,
    oracle_max: int = 2000,
) -> list[BenchRow]:
    """Time ``approx_decide`` at ``delta = rho`` on a random walk against a perturbed copy.

    Reported time is the minimum over ``repetitions``. Cost ratios against the
    exact distance are computed for ``n <= oracle_max``, concurrently across sizes
    when ``FRECHET_THREADS`` allows.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    cases = []
    for k, n in enumerate(sizes):
        P = walk(n, d, seed=seed + k)
        cases.append((n, P, perturbed_copy(P, rho, seed=seed + k + 10_000)))

    rows: list[BenchRow] = []
    outcomes = []
    prev = None
    for n, P, Q in cases:
        alpha = alpha_for(n, policy)
        best, outcome = math.inf, None
        for _ in range(repetitions):
            start = time.perf_counter()
            outcome = approx_decide(P, Q, rho, alpha)
            best = min(best, time.perf_counter() - start)
        ms = best * 1e3
        outcomes.append(outcome)
        rows.append(
            BenchRow(n, alpha, ms, outcome.stats.intervals_stored, None, ms / prev if prev else None)
        )
        prev = ms

    # oracle runs only after timing so they never compete for the CPU
    with ThreadPoolExecutor(max_workers=bench_threads()) as pool:
        exact = [
            pool.submit(exact_frechet, P, Q) if n <= oracle_max and out.ok else None
            for (n, P, Q), out in zip(cases, outcomes)
        ]
        for row, out, fut in zip(rows, outcomes, exact):
            if fut is not None:
                fd = fut.result()
                row.cost_ratio = out.measured_cost / fd if fd > 0 else None
    return rows
