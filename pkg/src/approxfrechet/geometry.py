"""Points, chains, boxes and the interval/crossing primitives used by every other module.

Chains are parameterized on ``[1, n]``: ``point_at(chain, k)`` is the k-th vertex for
integer ``k`` and the matching is linear in between.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

import numpy as np

from . import _kernels

REL_TOL = 1e-9

# Start size for the galloping scans along a chain.
_GALLOP = 32


class ParamRange(NamedTuple):
    lo: float
    hi: float


class Chain:
    """Polygonal chain with vertices stored as a read-only ``(n, d)`` float array."""

    __slots__ = ("vertices",)

    def __init__(self, points, *, dedupe: bool = True):
        v = np.array(points, dtype=float)
        if v.ndim == 1:
            v = v.reshape(-1, 1) if v.size else v.reshape(0, 1)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ValueError("a chain needs at least one vertex given as an (n, d) array")
        if v.shape[1] == 0:
            raise ValueError("points must have at least one coordinate")
        if not np.all(np.isfinite(v)):
            raise ValueError("chain coordinates must be finite")
        if dedupe and len(v) > 1:
            keep = np.ones(len(v), dtype=bool)
            keep[1:] = np.any(v[1:] != v[:-1], axis=1)
            v = v[keep]
        v.setflags(write=False)
        self.vertices = v

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def __repr__(self) -> str:
        return f"Chain(n={len(self)}, d={self.dim})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return self.vertices.shape == other.vertices.shape and bool(
            np.all(self.vertices == other.vertices)
        )

    __hash__ = None

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def vertex(self, k: int) -> np.ndarray:
        """Vertex ``k`` using the 1-based convention."""
        return self.vertices[k - 1]

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)

    def scale(self) -> float:
        return float(np.max(np.abs(self.vertices))) if self.vertices.size else 0.0


@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def point(self, u: float) -> np.ndarray:
        return (1.0 - u) * np.asarray(self.a, dtype=float) + u * np.asarray(self.b, dtype=float)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo_k, lo_k + side)`` in every dimension."""

    lo: np.ndarray
    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("box side must be positive")

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.lo, dtype=float) + self.side

    def distance(self, points) -> np.ndarray:
        """Euclidean distance from each point to the closed box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.asarray(self.lo, dtype=float)
        gap = np.maximum(np.maximum(lo - pts, pts - (lo + self.side)), 0.0)
        return np.sqrt(np.einsum("ij,ij->i", gap, gap))


def tolerance(*chains: Chain) -> float:
    """Absolute comparison tolerance ``1e-9 * max(1, coordinate magnitude)``."""
    scale = max((c.scale() for c in chains), default=0.0)
    return REL_TOL * max(1.0, scale)


def point_at(chain: Chain, s):
    """Point of ``chain`` at parameter ``s`` (scalar or array) in ``[1, n]``."""
    v = chain.vertices
    n = len(v)
    scalar = np.ndim(s) == 0
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 1) or np.any(s_arr > n) or np.any(np.isnan(s_arr)):
        raise ValueError(f"parameter outside chain domain [1, {n}]")
    if n == 1:
        out = np.repeat(v[:1], len(s_arr), axis=0)
    else:
        u = s_arr - 1.0
        idx = np.minimum(np.floor(u).astype(np.int64), n - 2)
        frac = (u - idx)[:, None]
        out = (1.0 - frac) * v[idx] + frac * v[idx + 1]
    return out[0] if scalar else out


def ball_segment_intersection(center, radius: float, seg: Segment) -> Optional[ParamRange]:
    """Sub-interval of ``[0, 1]`` where ``seg`` lies within ``radius`` of ``center``."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    lo, hi = _kernels._ball_segment(
        np.asarray(center, dtype=float),
        float(radius),
        np.asarray(seg.a, dtype=float),
        np.asarray(seg.b, dtype=float),
    )
    if math.isnan(lo):
        return None
    return ParamRange(lo, hi)


def ball_edge_intervals(center, radius: float, a: np.ndarray, b: np.ndarray):
    """Vectorized ball/segment intersection for segments ``a[k] -> b[k]``.

    ``center`` is one point or one point per segment. Returns ``(lo, hi)`` arrays in
    the local ``[0, 1]`` parameter; empty rows are NaN. Endpoint membership is decided
    by direct distance comparison so that two edges sharing a vertex agree on it.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.broadcast_to(np.asarray(center, dtype=float), a.shape)
    return _kernels.ball_segments(c, float(radius), a, b)


def free_on_edges(center, radius: float, chain: Chain, e_from: int, e_to: int):
    """Free parameters near ``center`` on chain edges ``e_from..e_to`` (1-based, edge e = [e-1, e]).

    Returns absolute parameters ``(lo, hi)``; NaN marks empty edges.
    """
    v = chain.vertices
    a = v[e_from - 2 : e_to - 1]
    b = v[e_from - 1 : e_to]
    lo, hi = ball_edge_intervals(center, radius, a, b)
    base = np.arange(e_from - 1, e_to, dtype=float)
    return base + lo, base + hi


def edge_of(s: float, n: int) -> int:
    """1-based index of the edge ``[e-1, e]`` holding parameter ``s``, preferring the later edge."""
    return min(max(int(math.floor(s)) + 1, 2), n)


def first_free_after(center, radius: float, chain: Chain, t: float) -> Optional[float]:
    """Smallest parameter ``>= t`` whose chain point is within ``radius`` of ``center``."""
    n = len(chain)
    e = edge_of(t, n)
    step = _GALLOP
    while e <= n:
        e_to = min(n, e + step - 1)
        lo, hi = free_on_edges(center, radius, chain, e, e_to)
        lo = np.maximum(lo, t)
        ok = lo <= hi
        if np.any(ok):
            return float(lo[np.argmax(ok)])
        e = e_to + 1
        step *= 2
    return None


def last_free_before(center, radius: float, chain: Chain, t_from: float, t_to: float) -> Optional[float]:
    """Largest parameter in ``[t_from, t_to]`` whose point is within ``radius`` of ``center``."""
    n = len(chain)
    e_lo = edge_of(t_from, n)
    e = max(min(int(math.ceil(t_to)), n), 2, e_lo)
    step = _GALLOP
    while e >= e_lo:
        e_from = max(e_lo, e - step + 1)
        lo, hi = free_on_edges(center, radius, chain, e_from, e)
        lo = np.maximum(lo, t_from)
        hi = np.minimum(hi, t_to)
        ok = lo <= hi
        if np.any(ok):
            k = len(ok) - 1 - int(np.argmax(ok[::-1]))
            return float(hi[k])
        e = e_from - 1
        step *= 2
    return None


def first_boundary_crossing(chain: Chain, s_start: float, box: Box, tol: float = 0.0) -> Optional[float]:
    """First parameter ``s >= s_start`` where the chain comes within ``tol`` of the box boundary.

    Returns None when the rest of the chain stays strictly inside.
    """
    v = chain.vertices
    n = len(v)
    lo = np.asarray(box.lo, dtype=float) + tol
    hi = np.asarray(box.lo, dtype=float) + box.side - tol
    x0 = point_at(chain, s_start)
    if np.any(x0 <= lo) or np.any(x0 >= hi):
        return float(s_start)
    if n == 1:
        return None
    # 0-based index of the first vertex after s_start
    k = min(int(math.floor(s_start - 1.0)) + 1, n - 1)
    step = _GALLOP
    while k < n:
        block = v[k : k + step]
        outside = np.any((block <= lo) | (block >= hi), axis=1)
        if np.any(outside):
            k_out = k + int(np.argmax(outside))
            break
        k += step
        step *= 2
    else:
        return None
    u_a = max(s_start - 1.0, float(k_out - 1))
    a = x0 if u_a > k_out - 1 else v[k_out - 1]
    b = v[k_out]
    lam = 1.0
    for d in range(len(lo)):
        if b[d] >= hi[d]:
            lam = min(lam, (hi[d] - a[d]) / (b[d] - a[d]))
        elif b[d] <= lo[d]:
            lam = min(lam, (lo[d] - a[d]) / (b[d] - a[d]))
    lam = min(max(lam, 0.0), 1.0)
    return 1.0 + u_a + lam * (k_out - u_a)


def within_expanded_box(chain: Chain, rng: ParamRange, box: Box, margin: float, tol: float = 0.0) -> bool:
    """True iff every point of ``chain[rng]`` lies within ``margin`` of the closed box.

    Distance to a convex set is convex along a segment, so the vertices and the two
    range endpoints decide it.
    """
    lo, hi = rng
    if lo > hi:
        raise ValueError("empty parameter range")
    inner = chain.vertices[int(math.floor(lo)) : int(math.ceil(hi)) - 1]
    pts = np.vstack([point_at(chain, lo)[None], inner, point_at(chain, hi)[None]])
    return bool(np.all(box.distance(pts) <= margin + tol))


def dist(p, q) -> float:
    d = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    return float(math.sqrt(float(np.dot(d, d))))


def as_chain(obj: Chain | Iterable) -> Chain:
    return obj if isinstance(obj, Chain) else Chain(obj)
