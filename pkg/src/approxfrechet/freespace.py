"""Exact free-space machinery and explicit Fréchet correspondences.

A correspondence is stored as a monotone polyline of breakpoints ``(s, t)`` in the
parameter rectangle ``[1, m] x [1, n]``; between breakpoints both curves move
affinely along the straight segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernels
from .geometry import (
    Chain,
    ParamRange,
    Segment,
    ball_edge_intervals,
    ball_segment_intersection,
    dist,
    point_at,
)

DEFAULT_REL_TOL = 1e-10


class ContractError(ValueError):
    """An input violates an operation's precondition."""


class Correspondence:
    """Monotone breakpoint polyline ``[(s0, t0), (s1, t1), ...]``."""

    __slots__ = ("breakpoints",)

    def __init__(self, breakpoints, *, check: bool = True):
        bp = np.array(breakpoints, dtype=float).reshape(-1, 2)
        if len(bp) == 0:
            raise ContractError("a correspondence needs at least one breakpoint")
        if len(bp) > 1:
            # drop repeated breakpoints
            keep = np.ones(len(bp), dtype=bool)
            keep[1:] = np.any(bp[1:] != bp[:-1], axis=1)
            bp = bp[keep]
        if check and not _monotone(bp):
            raise ContractError("correspondence breakpoints must be non-decreasing in s and t")
        bp.setflags(write=False)
        self.breakpoints = bp

    def __len__(self) -> int:
        return len(self.breakpoints)

    def __repr__(self) -> str:
        return f"Correspondence({len(self)} breakpoints, {tuple(self.start)} -> {tuple(self.end)})"

    @property
    def start(self) -> np.ndarray:
        return self.breakpoints[0]

    @property
    def end(self) -> np.ndarray:
        return self.breakpoints[-1]

    def is_monotone(self) -> bool:
        return _monotone(self.breakpoints)

    def is_full(self, m: int, n: int) -> bool:
        return (
            self.is_monotone()
            and tuple(self.start) == (1.0, 1.0)
            and tuple(self.end) == (float(m), float(n))
        )

    def reversed(self) -> "Correspondence":
        """Same matching with the roles of the two curves exchanged."""
        return Correspondence(self.breakpoints[:, ::-1], check=False)

    def tolist(self) -> list[list[float]]:
        return self.breakpoints.tolist()


def _monotone(bp: np.ndarray) -> bool:
    return bool(np.all(np.diff(bp, axis=0) >= 0))


def identity_correspondence(n: int) -> Correspondence:
    return Correspondence([(k, k) for k in range(1, n + 1)])


@dataclass(frozen=True)
class FreeCell:
    """Free intervals on the four sides of cell ``C_{i,j} = [i-1, i] x [j-1, j]``."""

    i: int
    j: int
    left: Optional[ParamRange]
    right: Optional[ParamRange]
    bottom: Optional[ParamRange]
    top: Optional[ParamRange]


def _shift(rng: Optional[ParamRange], base: float) -> Optional[ParamRange]:
    return None if rng is None else ParamRange(base + rng.lo, base + rng.hi)


def cell_free_intervals(P: Chain, Q: Chain, i: int, j: int, delta: float) -> FreeCell:
    m, n = len(P), len(Q)
    if not (2 <= i <= m and 2 <= j <= n):
        raise IndexError(f"cell ({i}, {j}) outside [2, {m}] x [2, {n}]")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    q_edge = Segment(Q.vertex(j - 1), Q.vertex(j))
    p_edge = Segment(P.vertex(i - 1), P.vertex(i))
    return FreeCell(
        i,
        j,
        left=_shift(ball_segment_intersection(P.vertex(i - 1), delta, q_edge), j - 1),
        right=_shift(ball_segment_intersection(P.vertex(i), delta, q_edge), j - 1),
        bottom=_shift(ball_segment_intersection(Q.vertex(j - 1), delta, p_edge), i - 1),
        top=_shift(ball_segment_intersection(Q.vertex(j), delta, p_edge), i - 1),
    )


def _clip_from(free: Optional[ParamRange], start: float) -> Optional[ParamRange]:
    if free is None:
        return None
    lo = max(free.lo, start)
    return ParamRange(lo, free.hi) if lo <= free.hi else None


def propagate_cell(
    cell: FreeCell,
    left_reach: Optional[ParamRange],
    bottom_reach: Optional[ParamRange],
) -> tuple[Optional[ParamRange], Optional[ParamRange]]:
    """Right and top reachable intervals of a cell from its left and bottom ones.

    Any free point that dominates a reachable entry point is reachable, because the
    free part of a cell is convex.
    """
    if bottom_reach is not None:
        right = cell.right
    elif left_reach is not None:
        right = _clip_from(cell.right, left_reach.lo)
    else:
        right = None
    if left_reach is not None:
        top = cell.top
    elif bottom_reach is not None:
        top = _clip_from(cell.top, bottom_reach.lo)
    else:
        top = None
    return right, top


def _degenerate(P: Chain, Q: Chain, delta: float):
    """Decision when one chain is a single point (a constant curve)."""
    m, n = len(P), len(Q)
    if m == 1:
        far = float(np.max(np.linalg.norm(Q.vertices - P.vertices[0], axis=1)))
        corr = Correspondence([(1, 1), (1, n)])
    else:
        far = float(np.max(np.linalg.norm(P.vertices - Q.vertices[0], axis=1)))
        corr = Correspondence([(1, 1), (m, 1)])
    return far <= delta, corr


def _check_dims(P: Chain, Q: Chain) -> None:
    if P.dim != Q.dim:
        raise ValueError(f"dimension mismatch: {P.dim} vs {Q.dim}")


def exact_decide(P: Chain, Q: Chain, delta: float, want_correspondence: bool = False):
    """Decide ``FD(P, Q) <= delta`` with the quadratic free-space sweep.

    With ``want_correspondence`` the result is ``(ok, corr)`` where ``corr`` is a full
    correspondence of cost at most ``delta`` (None when ``ok`` is false).
    """
    _check_dims(P, Q)
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if len(P) == 1 or len(Q) == 1:
        ok, corr = _degenerate(P, Q, delta)
        return (ok, corr if ok else None) if want_correspondence else ok
    vr, hr = _kernels.reach_tables(P.vertices, Q.vertices, float(delta))
    ok = bool(vr[-1, -1, 1] == 1.0 or hr[-1, -1, 1] == 1.0)
    if not want_correspondence:
        return ok
    return ok, (_backtrack(vr, hr) if ok else None)


def _backtrack(vr: np.ndarray, hr: np.ndarray) -> Correspondence:
    """Walk back from the top-right corner, entering each cell at its earliest reachable point.

    Works in 0-based parameters; a point on the right side of cell (i, j) is
    ``(i + 1, j + u)`` and on its top side ``(i + u, j + 1)``.
    """
    m = vr.shape[0]
    n = hr.shape[1]
    pts = [(float(m - 1), float(n - 1))]
    if vr[m - 1, n - 2, 1] == 1.0:
        side, i, j, u = "right", m - 2, n - 2, 1.0
    else:
        side, i, j, u = "top", m - 2, n - 2, 1.0
    while True:
        left_lo = vr[i, j, 0]
        bot_lo = hr[i, j, 0]
        if side == "right":
            use_left = not math.isnan(left_lo) and left_lo <= u
        else:
            use_left = not math.isnan(left_lo)
        if use_left:
            pts.append((float(i), j + left_lo))
            if i == 0:
                break
            side, i, u = "right", i - 1, left_lo
        else:
            pts.append((i + bot_lo, float(j)))
            if j == 0:
                break
            side, j, u = "top", j - 1, bot_lo
    pts.append((0.0, 0.0))
    bp = np.array(pts[::-1]) + 1.0
    return Correspondence(bp)


def exact_correspondence(P: Chain, Q: Chain, delta: float) -> Optional[Correspondence]:
    return exact_decide(P, Q, delta, want_correspondence=True)[1]


def segment_chain_decide(seg: Segment, chain: Chain, rng: ParamRange, delta: float) -> bool:
    """``FD(seg, chain[rng]) <= delta`` in one pass over the sub-chain vertices."""
    return segment_chain_match(seg, chain, rng, delta) is not None


def segment_chain_match(
    seg: Segment, chain: Chain, rng: ParamRange, delta: float, *, pinned: bool = False
) -> Optional[list[tuple[float, float]]]:
    """Leftmost monotone matching of the sub-chain vertices onto ``seg``.

    Returns ``[(u, t), ...]`` from ``(0, rng.lo)`` to ``(1, rng.hi)`` or None. With
    ``pinned`` the caller vouches that both end pairs are free.
    """
    t0, t1 = rng
    a = np.asarray(seg.a, dtype=float)
    b = np.asarray(seg.b, dtype=float)
    if not pinned:
        if dist(a, point_at(chain, t0)) > delta or dist(b, point_at(chain, t1)) > delta:
            return None
    ks = np.arange(int(math.floor(t0)) + 1, int(math.ceil(t1)), dtype=np.int64)
    if len(ks) == 0:
        return [(0.0, float(t0)), (1.0, float(t1))]
    centers = chain.vertices[ks - 1]
    shape = centers.shape
    lo, hi = ball_edge_intervals(centers, delta, np.broadcast_to(a, shape), np.broadcast_to(b, shape))
    if np.any(np.isnan(lo)):
        return None
    # leftmost crossing of each vertex line
    u = np.maximum.accumulate(lo)
    if np.any(u > hi):
        return None
    return [(0.0, float(t0)), *zip(u.tolist(), ks.astype(float).tolist()), (1.0, float(t1))]


def frechet_bracket(P: Chain, Q: Chain) -> tuple[float, float]:
    """Lower and upper bounds on FD from endpoint pairs and the farthest vertex pair."""
    lo = max(dist(P.vertices[0], Q.vertices[0]), dist(P.vertices[-1], Q.vertices[-1]))
    hi = float(np.max(cdist(P.vertices, Q.vertices)))
    return lo, max(lo, hi)


def exact_frechet(P: Chain, Q: Chain, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Continuous Fréchet distance to relative accuracy ``rel_tol`` by bisection."""
    return exact_frechet_bracket(P, Q, rel_tol)[0]


def exact_frechet_bracket(P: Chain, Q: Chain, rel_tol: float = DEFAULT_REL_TOL):
    """Bisection result ``(value, lo, hi)`` with ``exact_decide`` false at ``lo`` and true at ``hi``.

    ``lo == hi == value`` when the endpoint lower bound is already feasible.
    """
    _check_dims(P, Q)
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    lo, hi = frechet_bracket(P, Q)
    if exact_decide(P, Q, lo):
        return lo, lo, lo
    while not exact_decide(P, Q, hi):
        hi = max(hi * (1 + 1e-9), 1e-300)
    floor = 1e-12 * max(P.scale(), Q.scale(), 1e-300)
    while hi - lo > rel_tol * hi and hi - lo > floor:
        mid = 0.5 * (lo + hi)
        if exact_decide(P, Q, mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi), lo, hi


def exact_frechet_with_correspondence(P: Chain, Q: Chain, rel_tol: float = DEFAULT_REL_TOL):
    """``(value, corr)`` where ``corr`` is feasible at the upper end of the bisection bracket."""
    value, _, hi = exact_frechet_bracket(P, Q, rel_tol)
    ok, corr = exact_decide(P, Q, hi, want_correspondence=True)
    assert ok
    return value, corr


def refined_breakpoints(corr: Correspondence) -> np.ndarray:
    """Breakpoints plus every crossing of an integer parameter line."""
    bp = corr.breakpoints
    if len(bp) == 1:
        return bp.copy()
    s0, t0 = bp[:-1, 0], bp[:-1, 1]
    s1, t1 = bp[1:, 0], bp[1:, 1]
    ds, dt = s1 - s0, t1 - t0
    parts = [bp]
    for x0, x1, dx, other0, dother, axis in ((s0, s1, ds, t0, dt, 0), (t0, t1, dt, s0, ds, 1)):
        first = np.floor(x0) + 1
        count = np.maximum(np.ceil(x1) - first, 0).astype(np.int64)
        count[dx <= 0] = 0
        total = int(count.sum())
        if total == 0:
            continue
        seg = np.repeat(np.arange(len(count)), count)
        offs = np.arange(total) - np.repeat(np.cumsum(count) - count, count)
        k = first[seg] + offs
        lam = (k - x0[seg]) / dx[seg]
        other = other0[seg] + lam * dother[seg]
        pts = np.empty((total, 2))
        pts[:, axis] = k
        pts[:, 1 - axis] = other
        parts.append(pts)
    return np.vstack(parts)


def correspondence_cost(P: Chain, Q: Chain, corr: Correspondence) -> float:
    """Exact cost of a correspondence: the largest leash length over all matched pairs.

    Inside one cell both curves move affinely, so the distance is convex and the
    maximum sits at a refined breakpoint.
    """
    bp = corr.breakpoints
    if not corr.is_monotone():
        raise ContractError("correspondence is not monotone")
    m, n = len(P), len(Q)
    if bp[:, 0].min() < 1 or bp[:, 0].max() > m or bp[:, 1].min() < 1 or bp[:, 1].max() > n:
        raise ContractError("correspondence leaves the parameter rectangle")
    pts = refined_breakpoints(corr)
    diff = point_at(P, pts[:, 0]) - point_at(Q, pts[:, 1])
    return float(np.sqrt(np.max(np.einsum("ij,ij->i", diff, diff))))


def compose_correspondences(A: Correspondence, B: Correspondence) -> Correspondence:
    """Compose ``A`` (P to R) with ``B`` (R to Q) by sweeping the shared R parameter.

    Every output point is a matched triple, so the cost is at most cost(A) + cost(B).
    """
    a, b = A.breakpoints, B.breakpoints
    if a[0, 1] != b[0, 0] or a[-1, 1] != b[-1, 0]:
        raise ContractError("correspondences do not share the same middle-chain domain")
    ia, ib = 0, 0
    s, r, t = a[0, 0], a[0, 1], b[0, 1]
    out = [(s, t)]
    last_a, last_b = len(a) - 1, len(b) - 1
    while ia < last_a or ib < last_b:
        if ia < last_a and a[ia + 1, 1] == r:
            ia += 1
            s = a[ia, 0]
        elif ib < last_b and b[ib + 1, 0] == r:
            ib += 1
            t = b[ib, 1]
        else:
            r_next = min(a[ia + 1, 1], b[ib + 1, 0])
            if a[ia + 1, 1] == r_next:
                ia += 1
                s = a[ia, 0]
            else:
                s = max(s, _interp(a[ia, 1], a[ia + 1, 1], a[ia, 0], a[ia + 1, 0], r_next))
            if b[ib + 1, 0] == r_next:
                ib += 1
                t = b[ib, 1]
            else:
                t = max(t, _interp(b[ib, 0], b[ib + 1, 0], b[ib, 1], b[ib + 1, 1], r_next))
            r = r_next
        out.append((s, t))
    return Correspondence(out)


def _interp(x0, x1, y0, y1, x):
    return y0 + (x - x0) / (x1 - x0) * (y1 - y0)
