"""Turn the approximate decision procedure into an approximation of the Fréchet distance."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from .approxdecide import DecisionOutcome, approx_decide, clamp_alpha, cost_bound
from .freespace import (
    Correspondence,
    compose_correspondences,
    correspondence_cost,
    exact_frechet_with_correspondence,
)
from .geometry import Chain, as_chain, dist

_DEDUP_REL = 1e-12


def candidate_distances(P: Chain, Q: Chain) -> np.ndarray:
    """Sorted distinct pairwise distances between the distinct vertex points of both chains."""
    pts = np.unique(np.vstack([as_chain(P).vertices, as_chain(Q).vertices]), axis=0)
    if len(pts) < 2:
        return np.empty(0)
    z = np.sort(pdist(pts))
    z = z[z > 0]
    if len(z) == 0:
        return z
    keep = np.ones(len(z), dtype=bool)
    keep[1:] = np.diff(z) > _DEDUP_REL * z[1:]
    return z[keep]


@dataclass(frozen=True)
class SimplificationResult:
    simplified: Chain
    marks: tuple[int, ...]


def nu_simplify(R: Chain, nu: float) -> SimplificationResult:
    """Greedy simplification: keep the first vertex at distance ``>= nu`` from the last kept one.

    The final vertex is not forced into the output.
    """
    if not nu > 0:
        raise ValueError("nu must be positive")
    v = as_chain(R).vertices
    marks = [0]
    current = v[0]
    for k in range(1, len(v)):
        if dist(v[k], current) >= nu:
            marks.append(k)
            current = v[k]
    return SimplificationResult(Chain(v[marks], dedupe=False), tuple(k + 1 for k in marks))


def simplification_correspondence(R: Chain, result: SimplificationResult, nu: float) -> Correspondence:
    """Witness of ``FD(R, simplified) <= nu``.

    The simplified chain waits at each kept vertex while ``R`` walks up to the
    vertex before the next kept one, then both traverse one edge together.
    """
    R = as_chain(R)
    marks = result.marks
    if len(marks) != len(result.simplified) or marks[0] != 1 or marks[-1] > len(R):
        raise ValueError("simplification result does not belong to this chain")
    if not np.array_equal(R.vertices[np.asarray(marks) - 1], result.simplified.vertices):
        raise ValueError("simplification result does not belong to this chain")
    bp = [(1.0, 1.0)]
    for k in range(1, len(marks)):
        bp.append((float(marks[k] - 1), float(k)))
        bp.append((float(marks[k]), float(k + 1)))
    bp.append((float(len(R)), float(len(marks))))
    return Correspondence(bp)


@dataclass
class ApproxResult:
    value: float
    correspondence: Correspondence
    branch: str
    alpha: float
    eps: float
    lower: Optional[float] = None
    upper: Optional[float] = None
    probes: list[tuple[float, bool, Optional[float]]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


class _Prober:
    """Memoized decision calls that remember the cheapest correspondence seen."""

    def __init__(self, P: Chain, Q: Chain, alpha: float):
        self.P, self.Q, self.alpha = P, Q, alpha
        self.cache: dict[float, DecisionOutcome] = {}
        self.best: Optional[tuple[float, Correspondence]] = None
        self.log: list[tuple[float, bool, Optional[float]]] = []

    def __call__(self, delta: float) -> bool:
        delta = float(delta)
        out = self.cache.get(delta)
        if out is None:
            out = approx_decide(self.P, self.Q, delta, self.alpha)
            self.cache[delta] = out
            cost = out.measured_cost if out.ok else None
            self.log.append((delta, out.ok, cost))
            if out.ok:
                self.offer(out.measured_cost, out.correspondence)
        return out.ok

    def offer(self, cost: float, corr: Correspondence) -> None:
        if self.best is None or cost < self.best[0]:
            self.best = (cost, corr)


def _search(values, probe, lo: int, hi: int) -> tuple[int, int]:
    """Adjacent ``(fail, success)`` indices given ``values[lo]`` fails and ``values[hi]`` succeeds.

    Index ``-1`` may stand for a value already known to fail.
    """
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(values[mid]):
            hi = mid
        else:
            lo = mid
    return lo, hi


def _descend(b: float, floor: float, ratio: float, probe) -> None:
    """Shrink a succeeding ``b`` along ``b / ratio^k`` (never below ``floor``) to a failure."""
    last_ok, k = 0, 1
    while True:
        x = max(b / ratio**k, floor)
        if not probe(x):
            break
        last_ok = k
        if x == floor:
            return
        k *= 2
    lo, hi = last_ok, k
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(max(b / ratio**mid, floor)):
            lo = mid
        else:
            hi = mid


def approx_frechet(P, Q, alpha: Optional[float] = None, eps: float = 1.0) -> ApproxResult:
    """Correspondence whose cost is within ``(1 + eps) sqrt(d) (alpha + 2)`` of the optimum.

    The reported value is always the measured cost of the returned correspondence.
    """
    P, Q = as_chain(P), as_chain(Q)
    if P.dim != Q.dim:
        raise ValueError(f"dimension mismatch: {P.dim} vs {Q.dim}")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    alpha = clamp_alpha(alpha, max(len(P), len(Q)))
    ratio = cost_bound(P.dim, alpha, 1.0)
    probe = _Prober(P, Q, alpha)
    diagnostics: list[str] = []

    def finish(branch: str, a=None, b=None) -> ApproxResult:
        cost, corr = probe.best
        return ApproxResult(cost, corr, branch, alpha, eps, a, b, probe.log, diagnostics)

    if probe(0.0):
        return finish("zero")

    Z = candidate_distances(P, Q)
    if not probe(Z[-1]):
        # cannot happen for a complete decision procedure; keep a valid answer anyway
        diagnostics.append(f"decision failed at the largest vertex distance {Z[-1]!r}")
        value, corr = exact_frechet_with_correspondence(P, Q)
        probe.offer(correspondence_cost(P, Q, corr), corr)
        return finish("exact-fallback")
    lo, hi = _search(Z, probe, -1, len(Z) - 1)
    b = float(Z[hi])
    if lo < 0:
        endpoints = max(dist(P.vertices[0], Q.vertices[0]), dist(P.vertices[-1], Q.vertices[-1]))
        if b > endpoints:
            _descend(b, endpoints, 1.0 + eps, probe)
        return finish("smallest-candidate", None, b)
    a = float(Z[lo])

    top = 12.0 * a / eps
    if probe(top):
        ladder = [a * (1.0 + eps) ** k for k in range(math.ceil(12.0 / eps) + 1)]
        ladder = [x for x in ladder if x < top] + [top]
        _search(ladder, probe, 0, len(ladder) - 1)
        return finish("lower-ladder", a, b)

    bottom = b / (2.0 * (1.0 + eps / 2.0) * (1.0 + math.sqrt(P.dim)) * ratio)
    if not probe(bottom):
        steps = math.ceil(2.0 * (1.0 + eps / 2.0) * (1.0 + math.sqrt(P.dim)) * ratio)
        ladder = [b / (1.0 + eps) ** k for k in range(steps + 1)]
        ladder = [bottom] + sorted(x for x in ladder if x > bottom)
        _search(ladder, probe, 0, len(ladder) - 1)
        return finish("upper-ladder", a, b)

    corr = _simplified_branch(P, Q, a, diagnostics)
    probe.offer(correspondence_cost(P, Q, corr), corr)
    return finish("simplified", a, b)


def _simplified_branch(P: Chain, Q: Chain, a: float, diagnostics: list[str]) -> Correspondence:
    """Exact correspondence between ``3a``-simplifications, lifted back to ``P`` and ``Q``."""
    nu = 3.0 * a
    sp, sq = nu_simplify(P, nu), nu_simplify(Q, nu)
    value, inner = exact_frechet_with_correspondence(sp.simplified, sq.simplified)
    shortest = min(
        (float(np.min(c.edge_lengths())) for c in (sp.simplified, sq.simplified) if len(c) > 1),
        default=math.inf,
    )
    if shortest < (1.0 + math.sqrt(P.dim)) * value:
        msg = f"simplified edges ({shortest:.6g}) shorter than (1 + sqrt(d)) x distance ({value:.6g})"
        diagnostics.append(msg)
        warnings.warn(msg, stacklevel=3)
    lift_p = simplification_correspondence(P, sp, nu)
    lift_q = simplification_correspondence(Q, sq, nu)
    return compose_correspondences(lift_p, compose_correspondences(inner, lift_q.reversed()))
