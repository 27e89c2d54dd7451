"""Seeded synthetic curves for tests and benchmarks."""

from __future__ import annotations

import numpy as np

from .geometry import Chain, as_chain

KINDS = ("walk", "zigzag", "circle", "perturbed-copy")


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _check(n: int, d: int) -> None:
    if n < 2:
        raise ValueError("a generated curve needs n >= 2")
    if d < 1:
        raise ValueError("dimension must be at least 1")


def walk(n: int, d: int = 2, seed=None, scale: float = 1.0) -> Chain:
    """Gaussian random walk starting at the origin."""
    _check(n, d)
    steps = _rng(seed).normal(scale=scale, size=(n - 1, d))
    return Chain(np.vstack([np.zeros((1, d)), np.cumsum(steps, axis=0)]))


def zigzag(n: int, d: int = 2, amplitude: float = 1.0, scale: float = 1.0) -> Chain:
    """Sawtooth along the first axis with peaks at height ``amplitude`` on the second.

    Its Fréchet distance to the straight ``baseline`` is ``amplitude``.
    """
    _check(n, d)
    if d < 2:
        raise ValueError("zigzag needs d >= 2")
    v = np.zeros((n, d))
    v[:, 0] = np.linspace(0.0, scale, n)
    v[1::2, 1] = amplitude
    return Chain(v)


def baseline(chain: Chain) -> Chain:
    """Segment from the first vertex to the projection of the last onto the first axis."""
    v = as_chain(chain).vertices
    end = np.zeros(v.shape[1])
    end[0] = v[-1, 0]
    return Chain([v[0], end])


def circle(n: int, d: int = 2, scale: float = 1.0) -> Chain:
    """``n`` vertices evenly spaced on a circle of radius ``scale`` in the first two axes."""
    _check(n, d)
    if d < 2:
        raise ValueError("circle needs d >= 2")
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    v = np.zeros((n, d))
    v[:, 0] = scale * np.cos(theta)
    v[:, 1] = scale * np.sin(theta)
    return Chain(v)


def perturbed_copy(base, rho: float, seed=None) -> Chain:
    """Move every vertex uniformly within a ball of radius ``rho``.

    Matching vertex to vertex keeps every pair within ``rho``, so the Fréchet
    distance to ``base`` is at most ``rho``.
    """
    if rho < 0:
        raise ValueError("rho must be non-negative")
    v = as_chain(base).vertices
    n, d = v.shape
    rng = _rng(seed)
    direction = rng.normal(size=(n, d))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    direction = np.where(norms > 0, direction / np.where(norms > 0, norms, 1.0), 0.0)
    radius = rho * rng.uniform(size=(n, 1)) ** (1.0 / d)
    return Chain(v + radius * direction)
