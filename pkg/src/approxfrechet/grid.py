"""Axis-aligned grid of boxes and the good/bad/dangerous classification of chain vertices."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import Chain, tolerance


@dataclass(frozen=True)
class GridSpec:
    """Grid with box side ``side``, per-dimension ``offsets`` and boundary ``margin``."""

    side: float
    offsets: np.ndarray
    margin: float

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("grid side must be positive")
        off = np.asarray(self.offsets, dtype=float)
        if np.any(off < 0) or np.any(off >= self.side):
            raise ValueError("offsets must lie in [0, side)")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        off.setflags(write=False)
        object.__setattr__(self, "offsets", off)

    @property
    def dim(self) -> int:
        return len(self.offsets)


def _boundary_distance(x: np.ndarray, offset, side: float) -> np.ndarray:
    """Distance of each coordinate to the nearest grid hyperplane of its dimension."""
    rho = np.mod(x - offset, side)
    return np.minimum(rho, side - rho)


def choose_offsets(vertices, L: float, margin: float, tol: float = 0.0) -> np.ndarray:
    """Per-dimension offsets from ``{0, 2 margin, 4 margin, ...}`` minimizing near-boundary vertices.

    A vertex is near a boundary when its coordinate is within ``margin + tol`` of a
    grid hyperplane. Ties go to the smallest candidate.
    """
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    if margin < 0:
        raise ValueError("margin must be non-negative")
    if margin == 0:
        return np.zeros(v.shape[1])
    if not L > 2 * margin:
        raise ValueError(f"grid side {L} must exceed twice the margin {margin} (alpha too small)")
    gap = 2.0 * margin
    K = int(math.ceil(L / gap))
    if (K - 1) * gap >= L:
        K -= 1
    offsets = np.zeros(v.shape[1])
    for d in range(v.shape[1]):
        rho = np.mod(v[:, d], L)
        k0 = np.floor(rho / gap).astype(np.int64)
        # only these candidates can sit within margin of a residue
        cand = np.stack([k0 - 1, k0, k0 + 1, np.zeros_like(k0), np.full_like(k0, K - 1)], axis=1)
        cand = np.clip(cand, 0, K - 1)
        near = _boundary_distance(rho[:, None], cand * gap, L) <= margin + tol
        for c in range(1, cand.shape[1]):
            near[:, c] &= np.all(cand[:, :c] != cand[:, c : c + 1], axis=1)
        counts = np.bincount(cand[near], minlength=K)
        offsets[d] = int(np.argmin(counts)) * gap
    return offsets


def make_grid(P: Chain, Q: Chain, delta: float, alpha: float, tol: float | None = None) -> GridSpec | None:
    """Grid of side ``alpha * delta`` with offsets chosen from both chains.

    Returns None when the margin leaves no room for good vertices (``delta == 0`` or
    ``alpha <= 6``), in which case every vertex is bad.
    """
    if tol is None:
        tol = tolerance(P, Q)
    L = alpha * delta
    margin = 3.0 * delta
    if delta <= 0 or not L > 2 * margin:
        return None
    if alpha < 13:
        warnings.warn(f"alpha={alpha:g} < 13: few candidate offsets, many vertices may be bad", stacklevel=2)
    pts = np.vstack([P.vertices, Q.vertices])
    return GridSpec(L, choose_offsets(pts, L, margin, tol), margin)


@dataclass(frozen=True)
class Classification:
    """Good/bad/dangerous flags for both chains.

    Edge arrays are indexed by ``e - 2`` for the 1-based edge ``[e-1, e]``.
    """

    p_bad: np.ndarray
    q_bad: np.ndarray
    p_edge_bad: np.ndarray
    q_edge_bad: np.ndarray
    p_dangerous: np.ndarray
    q_dangerous: np.ndarray

    @property
    def p_dangerous_indices(self) -> np.ndarray:
        return np.flatnonzero(self.p_dangerous) + 1

    @property
    def q_dangerous_indices(self) -> np.ndarray:
        return np.flatnonzero(self.q_dangerous) + 1

    @property
    def bad_count(self) -> int:
        return int(self.p_bad.sum() + self.q_bad.sum())

    @property
    def bad_edge_count(self) -> int:
        return int(self.p_edge_bad.sum() + self.q_edge_bad.sum())

    @property
    def dangerous_count(self) -> int:
        return int(self.p_dangerous.sum() + self.q_dangerous.sum())

    def p_edge_good(self, e: int) -> bool:
        return not self.p_edge_bad[e - 2]

    def q_edge_good(self, e: int) -> bool:
        return not self.q_edge_bad[e - 2]


def _bad_flags(chain: Chain, spec: GridSpec | None, tol: float) -> np.ndarray:
    n = len(chain)
    if spec is None:
        bad = np.ones(n, dtype=bool)
    else:
        near = _boundary_distance(chain.vertices, spec.offsets, spec.side) <= spec.margin + tol
        bad = np.any(near, axis=1)
    bad[0] = bad[-1] = True
    return bad


def _edge_and_danger(bad: np.ndarray):
    edge_bad = bad[:-1] | bad[1:]
    dangerous = np.zeros_like(bad)
    dangerous[:-1] |= edge_bad
    dangerous[1:] |= edge_bad
    return edge_bad, dangerous


def classify(P: Chain, Q: Chain, spec: GridSpec | None, tol: float = 0.0) -> Classification:
    """Flag vertices within ``margin + tol`` of a grid hyperplane as bad; chain endpoints are always bad.

    ``spec`` None means no usable grid: everything is bad.
    """
    p_bad = _bad_flags(P, spec, tol)
    q_bad = _bad_flags(Q, spec, tol)
    pe, pd = _edge_and_danger(p_bad)
    qe, qd = _edge_and_danger(q_bad)
    for arr in (p_bad, q_bad, pe, qe, pd, qd):
        arr.setflags(write=False)
    return Classification(p_bad, q_bad, pe, qe, pd, qd)


def box_of(p, spec: GridSpec) -> tuple[int, ...]:
    """Integer box coordinates; points on a boundary belong to the higher box."""
    idx = np.floor((np.asarray(p, dtype=float) - spec.offsets) / spec.side).astype(np.int64)
    return tuple(int(k) for k in idx)


def box_lo(p, spec: GridSpec) -> np.ndarray:
    """Lower corner of the box holding ``p``."""
    idx = np.floor((np.asarray(p, dtype=float) - spec.offsets) / spec.side)
    return spec.offsets + idx * spec.side
