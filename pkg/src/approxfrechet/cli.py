"""Command line: ``approxfrechet {decide,compute,gen,bench}``.

Exit status is 0 for success/true, 1 for failure/false and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Optional, Sequence

from . import generate
from .approxdecide import approx_decide, clamp_alpha
from .bench import ALPHA_POLICIES, BENCH_FIELDS, run_bench
from .curveio import CurveFormatError, read_curve, write_curve
from .freespace import correspondence_cost, exact_decide, exact_frechet_with_correspondence
from .geometry import Chain
from .optimize import approx_frechet

EXIT_OK, EXIT_FALSE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int_list(text: str) -> list[int]:
    try:
        sizes = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None
    if not sizes or any(n < 2 for n in sizes):
        raise argparse.ArgumentTypeError("sizes must be integers >= 2")
    return sizes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="approxfrechet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def curve_pair(p):
        p.add_argument("P", help="curve file for the first chain")
        p.add_argument("Q", help="curve file for the second chain")
        p.add_argument("--alpha", type=float, help="approximation parameter (default: max(m, n))")
        p.add_argument("--timing", action="store_true", help="include wall_time_ms in stats")

    p = sub.add_parser("decide", help="decide whether the Fréchet distance is at most delta")
    curve_pair(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--exact", action="store_true", help="use the exact quadratic decision")

    p = sub.add_parser("compute", help="approximate (or exact) Fréchet distance and correspondence")
    curve_pair(p)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--exact", action="store_true", help="bisect the exact decision instead")
    p.add_argument("--tol", type=float, default=1e-10, help="relative tolerance with --exact")

    p = sub.add_parser("gen", help="write a synthetic curve file")
    p.add_argument("--kind", choices=generate.KINDS, required=True)
    p.add_argument("-n", type=int, default=100)
    p.add_argument("-d", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--amplitude", type=float, default=1.0, help="zigzag peak height")
    p.add_argument("--base", help="base curve file for perturbed-copy")
    p.add_argument("--rho", type=float, default=0.1, help="perturbation radius for perturbed-copy")
    p.add_argument("--out", help="output file (default: standard output)")

    p = sub.add_parser("bench", help="time approx_decide over doubling sizes (CSV)")
    p.add_argument("--bench-sizes", type=_positive_int_list, default=[2000, 4000, 8000])
    p.add_argument("--alpha-policy", choices=ALPHA_POLICIES, default="n")
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-d", type=int, default=2)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--oracle-max", type=int, default=2000, help="largest n for exact cost ratios")
    return parser


def _load(path: str) -> Chain:
    try:
        return read_curve(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except CurveFormatError as exc:
        raise UsageError(str(exc)) from None


def _load_pair(args) -> tuple[Chain, Chain]:
    P, Q = _load(args.P), _load(args.Q)
    if P.dim != Q.dim:
        raise UsageError(f"dimension mismatch: {args.P} has d={P.dim}, {args.Q} has d={Q.dim}")
    return P, Q


def _document(command, params, result, corr, cost, P, Q, stats, started, timing) -> dict:
    doc_stats = {"m": len(P), "n": len(Q), "d": P.dim, **stats}
    if timing:
        doc_stats["wall_time_ms"] = (time.perf_counter() - started) * 1e3
    return {
        "command": command,
        "params": params,
        "result": result,
        "cost": cost,
        "breakpoints": corr.tolist() if corr is not None else [],
        "stats": doc_stats,
    }


def cmd_decide(args) -> tuple[dict, int]:
    if not args.delta >= 0:
        raise UsageError("--delta must be non-negative")
    P, Q = _load_pair(args)
    started = time.perf_counter()
    if args.exact:
        ok, corr = exact_decide(P, Q, args.delta, want_correspondence=True)
        stats = {}
        params = {"delta": args.delta, "exact": True}
    else:
        alpha = clamp_alpha(args.alpha, max(len(P), len(Q)))
        out = approx_decide(P, Q, args.delta, alpha)
        ok, corr = out.ok, out.correspondence if out.ok else None
        stats = {"bad_vertices": out.stats.bad_vertices, "intervals_stored": out.stats.intervals_stored}
        params = {"delta": args.delta, "alpha": alpha}
    cost = correspondence_cost(P, Q, corr) if ok else None
    doc = _document(
        "decide", params, "success" if ok else "failure", corr, cost, P, Q, stats, started, args.timing
    )
    return doc, EXIT_OK if ok else EXIT_FALSE


def cmd_compute(args) -> tuple[dict, int]:
    P, Q = _load_pair(args)
    started = time.perf_counter()
    if args.exact:
        if not args.tol > 0:
            raise UsageError("--tol must be positive")
        value, corr = exact_frechet_with_correspondence(P, Q, args.tol)
        params = {"exact": True, "tol": args.tol}
        stats = {}
    else:
        if not 0 < args.eps <= 1:
            raise UsageError("--eps must lie in (0, 1]")
        res = approx_frechet(P, Q, args.alpha, args.eps)
        value, corr = res.value, res.correspondence
        params = {"alpha": res.alpha, "eps": args.eps}
        stats = {"branch": res.branch, "decisions": len(res.probes)}
    cost = correspondence_cost(P, Q, corr)
    doc = _document("compute", params, value, corr, cost, P, Q, stats, started, args.timing)
    return doc, EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "perturbed-copy":
        if args.base is None:
            raise UsageError("perturbed-copy needs --base")
        if args.rho < 0:
            raise UsageError("--rho must be non-negative")
        chain = generate.perturbed_copy(_load(args.base), args.rho, seed=args.seed)
    else:
        try:
            if args.kind == "walk":
                chain = generate.walk(args.n, args.d, seed=args.seed, scale=args.scale)
            elif args.kind == "zigzag":
                chain = generate.zigzag(args.n, args.d, amplitude=args.amplitude, scale=args.scale)
            else:
                chain = generate.circle(args.n, args.d, scale=args.scale)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    write_curve(chain, args.out if args.out else sys.stdout)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.repetitions < 1:
        raise UsageError("--repetitions must be at least 1")
    rows = run_bench(
        args.bench_sizes, args.alpha_policy, args.repetitions, args.seed, args.d, args.rho, args.oracle_max
    )
    print(",".join(BENCH_FIELDS))
    for row in rows:
        print(row.as_csv())
    return EXIT_OK


def _json_default(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    raise TypeError(f"not serializable: {type(x).__name__}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("decide", "compute"):
            handler = cmd_decide if args.command == "decide" else cmd_compute
            doc, code = handler(args)
            json.dump(doc, sys.stdout, indent=2, default=_json_default)
            sys.stdout.write("\n")
            return code
        if args.command == "gen":
            return cmd_gen(args)
        return cmd_bench(args)
    except UsageError as exc:
        print(f"approxfrechet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
