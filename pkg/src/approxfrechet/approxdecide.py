"""Approximate decision procedure for the continuous Fréchet distance.

Reachability is tracked only on cell edges pairing a dangerous vertex with a bad
edge. Stretches where one curve sits on good edges are crossed box by box with a
greedy matcher, so the work is driven by the number of bad vertices rather than
by the full ``m x n`` diagram.
"""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple, Optional, Union

import numpy as np

from . import _kernels
from .freespace import (
    ContractError,
    Correspondence,
    _degenerate,
    correspondence_cost,
    segment_chain_match,
)
from .geometry import (
    Box,
    Chain,
    ParamRange,
    Segment,
    as_chain,
    ball_edge_intervals,
    ball_segment_intersection,
    dist,
    edge_of,
    first_boundary_crossing,
    first_free_after,
    free_on_edges,
    last_free_before,
    point_at,
    tolerance,
    within_expanded_box,
)
from .grid import Classification, GridSpec, box_lo, classify, make_grid


class InvariantViolation(AssertionError):
    """A bookkeeping invariant of the decision procedure did not hold."""


class Orientation(IntEnum):
    VERTICAL = 0
    HORIZONTAL = 1


class IntervalKey(NamedTuple):
    """Cell edge ``{i} x [j-1, j]`` (vertical) or ``[i-1, i] x {j}`` (horizontal).

    Tuple order is the processing order: by ``(i, j)``, vertical first.
    """

    i: int
    j: int
    orient: Orientation

    @classmethod
    def vertical(cls, i: int, j: int) -> "IntervalKey":
        return cls(i, j, Orientation.VERTICAL)

    @classmethod
    def horizontal(cls, i: int, j: int) -> "IntervalKey":
        return cls(i, j, Orientation.HORIZONTAL)

    def coordinate(self, point) -> float:
        """The parameter of ``point`` that runs along this cell edge."""
        return point[1] if self.orient == Orientation.VERTICAL else point[0]

    def __repr__(self) -> str:
        tag = "V" if self.orient == Orientation.VERTICAL else "H"
        return f"{tag}({self.i}, {self.j})"


Point2 = tuple[float, float]


class ProvenanceRecord(NamedTuple):
    """How one designated range was reached.

    The monotone path ``path[:upto]`` runs from ``anchor`` (a point of the
    predecessor interval) to ``canonical``; every point of ``range`` dominates
    ``canonical`` and is reached from it by a straight segment inside one cell.
    """

    predecessor: Optional[IntervalKey]
    anchor: Point2
    path: list
    upto: int
    canonical: Point2
    range: ParamRange
    order: int

    def local_path(self) -> list[Point2]:
        return [*self.path[: self.upto], self.canonical]


@dataclass
class ApproxInterval:
    key: IntervalKey
    lo: float
    hi: float
    records: list[ProvenanceRecord] = field(default_factory=list)

    @property
    def range(self) -> ParamRange:
        return ParamRange(self.lo, self.hi)


class Designation(NamedTuple):
    """A range proposed for ``key``; ``key`` None stands for the single point ``(m, n)``."""

    key: Optional[IntervalKey]
    range: ParamRange
    path: list
    upto: int
    canonical: Point2


@dataclass
class DecisionStats:
    alpha: float
    bad_vertices: int = 0
    dangerous_vertices: int = 0
    intervals_stored: int = 0
    greedy_calls: int = 0
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class Success:
    correspondence: Correspondence
    measured_cost: float
    stats: DecisionStats

    ok = True

    def __bool__(self) -> bool:
        return True


@dataclass
class Failure:
    stats: DecisionStats

    ok = False

    def __bool__(self) -> bool:
        return False


DecisionOutcome = Union[Success, Failure]


def cost_bound(dim: int, alpha: float, delta: float) -> float:
    """Diameter of a box of side ``alpha * delta`` grown by ``delta`` on every side."""
    return math.sqrt(dim) * (alpha + 2.0) * delta


def clamp_alpha(alpha: Optional[float], size: int) -> float:
    lo, hi = math.sqrt(size), float(size)
    if alpha is None:
        return hi
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if alpha < lo or alpha > hi:
        clamped = min(max(alpha, lo), hi)
        warnings.warn(f"alpha={alpha:g} clamped to {clamped:g}", stacklevel=3)
        return clamped
    return float(alpha)


class _Frame:
    """View with the good-vertex curve as ``A`` and the other curve as ``B``."""

    __slots__ = ("a_is_p", "A", "B", "a_bad", "a_edge_bad", "b_edge_bad")

    def __init__(self, a_is_p: bool, P: Chain, Q: Chain, cls: Classification):
        self.a_is_p = a_is_p
        if a_is_p:
            self.A, self.B = P, Q
            self.a_bad, self.a_edge_bad, self.b_edge_bad = cls.p_bad, cls.p_edge_bad, cls.q_edge_bad
        else:
            self.A, self.B = Q, P
            self.a_bad, self.a_edge_bad, self.b_edge_bad = cls.q_bad, cls.q_edge_bad, cls.p_edge_bad

    def pt(self, a: float, b: float) -> Point2:
        return (float(a), float(b)) if self.a_is_p else (float(b), float(a))

    def vertex_edge_key(self, a_vertex: int, b_edge: int) -> IntervalKey:
        if self.a_is_p:
            return IntervalKey.vertical(a_vertex, b_edge)
        return IntervalKey.horizontal(b_edge, a_vertex)

    def edge_vertex_key(self, a_edge: int, b_vertex: int) -> IntervalKey:
        if self.a_is_p:
            return IntervalKey.horizontal(a_edge, b_vertex)
        return IntervalKey.vertical(b_vertex, a_edge)


class DecisionContext:
    """Inputs and derived grid data shared by the greedy matchers and the main loop."""

    def __init__(self, P: Chain, Q: Chain, delta: float, alpha: float):
        self.P, self.Q = P, Q
        self.m, self.n = len(P), len(Q)
        self.delta = float(delta)
        self.alpha = alpha
        self.tol = tolerance(P, Q)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            self.spec: Optional[GridSpec] = make_grid(P, Q, self.delta, alpha, self.tol)
        self.cls = classify(P, Q, self.spec, self.tol)
        self.frames = {True: _Frame(True, P, Q, self.cls), False: _Frame(False, P, Q, self.cls)}

    @classmethod
    def build(cls, P, Q, delta: float, alpha: Optional[float] = None) -> "DecisionContext":
        P, Q = as_chain(P), as_chain(Q)
        return cls(P, Q, delta, clamp_alpha(alpha, max(len(P), len(Q))))

    def box_around(self, point) -> Box:
        return Box(box_lo(point, self.spec), self.spec.side)


def greedy_mapping_p(ctx: DecisionContext, i: int, t: float) -> list[Designation]:
    """Follow both curves box by box from the good vertex ``p_i`` matched near ``Q(t)``."""
    return _greedy(ctx, ctx.frames[True], i, t)


def greedy_mapping_q(ctx: DecisionContext, j: int, s: float) -> list[Designation]:
    """Mirror of :func:`greedy_mapping_p` starting from the good vertex ``q_j``."""
    return _greedy(ctx, ctx.frames[False], j, s)


def _clip(lo: float, hi: float, lo_bound: float, hi_bound: float) -> Optional[ParamRange]:
    if math.isnan(lo):
        return None
    lo, hi = max(lo, lo_bound), min(hi, hi_bound)
    return ParamRange(lo, hi) if lo <= hi else None


def _greedy(ctx: DecisionContext, fr: _Frame, g: int, b: float) -> list[Designation]:
    delta, tol = ctx.delta, ctx.tol
    if ctx.spec is None or fr.a_bad[g - 1]:
        raise ContractError(f"greedy start vertex {g} is not good")
    if dist(fr.A.vertex(g), point_at(fr.B, b)) > delta + tol:
        raise ContractError("greedy start pair is not free")
    out: list[Designation] = []
    path: list[Point2] = [fr.pt(g, b)]
    while True:
        A, B = fr.A, fr.B
        nA, nB = len(A), len(B)
        box = ctx.box_around(A.vertex(g))
        sA = first_boundary_crossing(A, g, box, tol)
        sB = first_boundary_crossing(B, b, box, tol)
        a_end = sA is None or sA >= nA
        b_end = sB is None or sB >= nB
        if a_end or b_end:
            ok = True
            if a_end:
                ok = within_expanded_box(B, ParamRange(b, nB), box, delta, tol)
            if ok and b_end:
                ok = within_expanded_box(A, ParamRange(g, nA), box, delta, tol)
            if ok:
                end = (float(ctx.m), float(ctx.n))
                out.append(Designation(None, ParamRange(0.0, 0.0), path, len(path), end))
            return out

        ie = int(math.ceil(sA))
        je = int(math.ceil(sB))
        if not fr.a_edge_bad[ie - 2]:
            # A leaves the box along a good edge: match the stretch of B onto it
            tf = first_free_after(A.vertex(ie), delta, B, b)
            if tf is None:
                return out
            tc = last_free_before(A.vertex(ie - 1), delta, B, b, tf)
            if tc is None or not within_expanded_box(B, ParamRange(b, tc), box, delta, tol):
                return out
            seg = Segment(A.vertex(ie - 1), A.vertex(ie))
            match = segment_chain_match(seg, B, ParamRange(tc, tf), delta, pinned=True)
            if match is None:
                return out
            path.extend(fr.pt(ie - 1 + u, t) for u, t in match)
            path[-1] = fr.pt(ie, tf)
            g, b = ie, tf
            continue

        if not fr.b_edge_bad[je - 2]:
            # B leaves along a good edge; B may already be partway along it
            b0 = max(float(je - 1), b)
            start = point_at(B, b0)
            sf = first_free_after(B.vertex(je), delta, A, g)
            if sf is None:
                return out
            sc = last_free_before(start, delta, A, g, sf)
            if sc is None or not within_expanded_box(A, ParamRange(g, sc), box, delta, tol):
                return out
            seg = Segment(start, B.vertex(je))
            match = segment_chain_match(seg, A, ParamRange(sc, sf), delta, pinned=True)
            if match is None:
                return out
            path.extend(fr.pt(a, b0 + u * (je - b0)) for u, a in match)
            path[-1] = fr.pt(sf, je)
            fr = ctx.frames[not fr.a_is_p]
            g, b = je, sf
            continue

        upto = len(path)
        out.extend(_exit_family(fr, g, b, sA, sB, ie, je, delta, path, upto))
        out.extend(_exit_family_mirror(fr, g, b, sA, sB, ie, je, delta, path, upto))
        return out


def _exit_family(fr, g, b, sA, sB, ie, je, delta, path, upto) -> list[Designation]:
    """Cells pairing A's exit edge with B's edges that pass near A's exit point."""
    A, B = fr.A, fr.B
    e_from = edge_of(b, len(B))
    if e_from > je:
        return []
    near_lo, near_hi = free_on_edges(point_at(A, sA), delta, B, e_from, je)
    vert_lo, vert_hi = free_on_edges(A.vertex(ie), delta, B, e_from, je)
    ks = np.arange(e_from, je + 1)
    centers = B.vertices[ks - 1]
    shape = centers.shape
    a0, a1 = A.vertex(ie - 1), A.vertex(ie)
    edge_lo, edge_hi = ball_edge_intervals(
        centers, delta, np.broadcast_to(a0, shape), np.broadcast_to(a1, shape)
    )
    out = []
    for k, e in enumerate(ks.tolist()):
        entry = _clip(near_lo[k], near_hi[k], b, sB)
        if entry is None:
            continue
        tk = entry.lo
        canonical = fr.pt(sA, tk)
        rng = _clip(vert_lo[k], vert_hi[k], tk, e)
        if rng is not None:
            out.append(Designation(fr.vertex_edge_key(ie, e), rng, path, upto, canonical))
        rng = _clip(ie - 1 + edge_lo[k], ie - 1 + edge_hi[k], sA, ie)
        if rng is not None:
            out.append(Designation(fr.edge_vertex_key(ie, e), rng, path, upto, canonical))
    return out


def _exit_family_mirror(fr, g, b, sA, sB, ie, je, delta, path, upto) -> list[Designation]:
    """Cells pairing B's exit edge with A's edges that pass near B's exit point."""
    A, B = fr.A, fr.B
    e_from = g + 1
    near_lo, near_hi = free_on_edges(point_at(B, sB), delta, A, e_from, ie)
    vert_lo, vert_hi = free_on_edges(B.vertex(je), delta, A, e_from, ie)
    ks = np.arange(e_from, ie + 1)
    centers = A.vertices[ks - 1]
    shape = centers.shape
    b0, b1 = B.vertex(je - 1), B.vertex(je)
    edge_lo, edge_hi = ball_edge_intervals(
        centers, delta, np.broadcast_to(b0, shape), np.broadcast_to(b1, shape)
    )
    out = []
    for k, e in enumerate(ks.tolist()):
        entry = _clip(near_lo[k], near_hi[k], g, sA)
        if entry is None:
            continue
        sk = entry.lo
        canonical = fr.pt(sk, sB)
        rng = _clip(vert_lo[k], vert_hi[k], sk, e)
        if rng is not None:
            out.append(Designation(fr.edge_vertex_key(e, je), rng, path, upto, canonical))
        rng = _clip(je - 1 + edge_lo[k], je - 1 + edge_hi[k], sB, je)
        if rng is not None:
            out.append(Designation(fr.vertex_edge_key(e, je), rng, path, upto, canonical))
    return out


def _edge_free(center, delta: float, a, b, base: int, lo_bound: float, hi_bound: float):
    lo, hi = _kernels._ball_segment(center, delta, a, b)
    if lo != lo:
        return None
    lo, hi = max(base + lo, lo_bound), min(base + hi, hi_bound)
    return ParamRange(lo, hi) if lo <= hi else None


class _Store:
    """Approximate reachability intervals plus their provenance."""

    def __init__(self, strict: bool, cls: Optional[Classification] = None):
        self.cls = cls
        self.intervals: dict[IntervalKey, ApproxInterval] = {}
        self.final: list[ProvenanceRecord] = []
        self.heap: list[IntervalKey] = []
        self.current: Optional[IntervalKey] = None
        self.strict = strict
        self.diagnostics: list[str] = []
        self._order = 0

    def _problem(self, msg: str) -> None:
        if self.strict:
            raise InvariantViolation(msg)
        self.diagnostics.append(msg)

    def add(self, pred: Optional[IntervalKey], anchor: Point2, d: Designation) -> None:
        rec = ProvenanceRecord(pred, anchor, d.path, d.upto, d.canonical, d.range, self._order)
        self._order += 1
        if d.key is None:
            self.final.append(rec)
            return
        designate(self, d.key, d.range, rec)


def designate(store: _Store, key: IntervalKey, rng: ParamRange, record: ProvenanceRecord) -> ApproxInterval:
    """Union ``rng`` into the interval stored for ``key``."""
    if not (key.j - 1 <= rng.lo <= rng.hi <= key.j if key.orient == Orientation.VERTICAL
            else key.i - 1 <= rng.lo <= rng.hi <= key.i):
        raise ContractError(f"range {tuple(rng)} outside cell edge {key!r}")
    if store.current is not None and key <= store.current:
        store._problem(f"designation to {key!r} while processing {store.current!r}")
    if store.cls is not None and not _admissible(store.cls, key):
        store._problem(f"{key!r} does not pair a dangerous vertex with a bad edge")
    iv = store.intervals.get(key)
    if iv is None:
        iv = ApproxInterval(key, rng.lo, rng.hi)
        store.intervals[key] = iv
        heapq.heappush(store.heap, key)
    else:
        if iv.hi != rng.hi:
            store._problem(f"ranges on {key!r} end at {iv.hi!r} and {rng.hi!r}; taking the hull")
        iv.lo, iv.hi = min(iv.lo, rng.lo), max(iv.hi, rng.hi)
    iv.records.append(record)
    return iv


def _admissible(cls: Classification, key: IntervalKey) -> bool:
    if key.orient == Orientation.VERTICAL:
        return bool(cls.p_dangerous[key.i - 1] and cls.q_edge_bad[key.j - 2])
    return bool(cls.q_dangerous[key.j - 1] and cls.p_edge_bad[key.i - 2])


def approx_decide(P, Q, delta: float, alpha: Optional[float] = None, *, strict: bool = False) -> DecisionOutcome:
    """Report Success with a correspondence of cost at most ``sqrt(d) (alpha + 2) delta``, or Failure.

    Failure means ``FD(P, Q) > delta``. ``alpha`` is clamped to ``[sqrt(N), N]`` for
    ``N = max(m, n)`` and defaults to ``N``. With ``strict`` any bookkeeping
    invariant violation raises :class:`InvariantViolation` instead of being
    recorded in ``stats.diagnostics``.
    """
    P, Q = as_chain(P), as_chain(Q)
    if P.dim != Q.dim:
        raise ValueError(f"dimension mismatch: {P.dim} vs {Q.dim}")
    if not delta >= 0:
        raise ValueError("delta must be non-negative")
    m, n = len(P), len(Q)
    alpha = clamp_alpha(alpha, max(m, n))
    stats = DecisionStats(alpha=alpha)
    if m == 1 or n == 1:
        ok, corr = _degenerate(P, Q, delta)
        stats.bad_vertices = m + n
        return Success(corr, correspondence_cost(P, Q, corr), stats) if ok else Failure(stats)
    if dist(P.vertex(1), Q.vertex(1)) > delta:
        return Failure(stats)

    ctx = DecisionContext(P, Q, delta, alpha)
    stats.bad_vertices = ctx.cls.bad_count
    stats.dangerous_vertices = ctx.cls.dangerous_count
    store = _Store(strict, ctx.cls)
    origin = (1.0, 1.0)
    for d in _seeds(ctx):
        store.add(None, origin, d)

    while store.heap:
        key = heapq.heappop(store.heap)
        store.current = key
        iv = store.intervals[key]
        anchor, designations = _process(ctx, key, iv, stats)
        for d in designations:
            store.add(key, anchor, d)

    stats.intervals_stored = len(store.intervals)
    stats.diagnostics = store.diagnostics
    corr = reconstruct(store, m, n)
    if corr is None:
        return Failure(stats)
    return Success(corr, correspondence_cost(P, Q, corr), stats)


def _seeds(ctx: DecisionContext) -> list[Designation]:
    P, Q, delta = ctx.P, ctx.Q, ctx.delta
    origin = (1.0, 1.0)
    out = []
    rng = _edge_free(P.vertex(1), delta, Q.vertex(1), Q.vertex(2), 1, 1.0, 2.0)
    if rng is not None:
        out.append(Designation(IntervalKey.vertical(1, 2), ParamRange(1.0, rng.hi), [], 0, origin))
    rng = _edge_free(Q.vertex(1), delta, P.vertex(1), P.vertex(2), 1, 1.0, 2.0)
    if rng is not None:
        out.append(Designation(IntervalKey.horizontal(2, 1), ParamRange(1.0, rng.hi), [], 0, origin))
    return out


_V = Orientation.VERTICAL
_H = Orientation.HORIZONTAL


def _process(ctx: DecisionContext, key: IntervalKey, iv: ApproxInterval, stats: DecisionStats):
    """Extend reachability out of one stored interval; returns ``(anchor, designations)``."""
    pv, qv, delta = ctx.P.vertices, ctx.Q.vertices, ctx.delta
    lo = iv.lo
    out = []
    if key.orient == _V:
        i0, j = key.i, key.j
        if i0 == ctx.m:
            return None, out
        i = i0 + 1
        anchor = (float(i0), lo)
        if not ctx.cls.p_edge_bad[i - 2]:
            stats.greedy_calls += 1
            return anchor, greedy_mapping_p(ctx, i0, lo)
        rng = _edge_free(pv[i - 1], delta, qv[j - 2], qv[j - 1], j - 1, lo, j)
        if rng is not None:
            out.append(Designation(IntervalKey(i, j, _V), rng, _NO_PATH, 0, anchor))
        rng = _edge_free(qv[j - 1], delta, pv[i - 2], pv[i - 1], i - 1, i - 1, i)
        if rng is not None:
            out.append(Designation(IntervalKey(i, j, _H), rng, _NO_PATH, 0, anchor))
    else:
        i, j0 = key.i, key.j
        if j0 == ctx.n:
            return None, out
        j = j0 + 1
        anchor = (lo, float(j0))
        if not ctx.cls.q_edge_bad[j - 2]:
            stats.greedy_calls += 1
            return anchor, greedy_mapping_q(ctx, j0, lo)
        rng = _edge_free(pv[i - 1], delta, qv[j - 2], qv[j - 1], j - 1, j - 1, j)
        if rng is not None:
            out.append(Designation(IntervalKey(i, j, _V), rng, _NO_PATH, 0, anchor))
        rng = _edge_free(qv[j - 1], delta, pv[i - 2], pv[i - 1], i - 1, lo, i)
        if rng is not None:
            out.append(Designation(IntervalKey(i, j, _H), rng, _NO_PATH, 0, anchor))
    return anchor, out


_NO_PATH: list = []


def _pick(records, x: Optional[float], key: Optional[IntervalKey]) -> Optional[ProvenanceRecord]:
    best = None
    for r in records:
        if key is not None and not (r.range.lo <= x <= r.range.hi):
            continue
        if best is None or (r.anchor, r.order) < (best.anchor, best.order):
            best = r
    return best


def reconstruct(store: _Store, m: int, n: int) -> Optional[Correspondence]:
    """Walk provenance back from ``(m, n)``; None when ``(m, n)`` was never designated."""
    end = (float(m), float(n))
    candidates = list(store.final)
    for key, x in ((IntervalKey.vertical(m, n), float(n)), (IntervalKey.horizontal(m, n), float(m))):
        iv = store.intervals.get(key)
        if iv is not None:
            candidates.extend(r for r in iv.records if r.range.hi == x)
    rec = _pick(candidates, None, None)
    if rec is None:
        return None
    pieces = []
    point = end
    for _ in range(len(store.intervals) + 2):
        pieces.append([*rec.local_path(), point])
        if rec.predecessor is None:
            break
        point = rec.anchor
        key = rec.predecessor
        rec = _pick(store.intervals[key].records, key.coordinate(point), key)
        if rec is None:
            raise InvariantViolation(f"no record of {key!r} covers {point}")
    else:
        raise InvariantViolation("provenance chain does not terminate")
    pts = [rec.anchor]
    for piece in reversed(pieces):
        pts.extend(piece)
    return Correspondence(pts)
