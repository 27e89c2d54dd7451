"""Seeded instance families shared by the acceptance and decision tests."""

import numpy as np

from approxfrechet.geometry import Chain

from .oracles import random_chain, tracking_pair

KINDS = ("noise", "resample", "other", "independent")


def instances(seed, count, n_min=5, n_max=200, dims=(1, 2, 3)):
    """Pairs of chains cycling through tracking, resampled, loosely related and unrelated walks.

    Walk steps vary in scale so that long edges crossing several grid boxes occur.
    """
    rng = np.random.default_rng(seed)
    for it in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        d = int(rng.choice(dims))
        kind = KINDS[it % len(KINDS)]
        if kind == "independent":
            P = random_chain(rng, n, d)
            Q = random_chain(rng, int(rng.integers(n_min, n_max + 1)), d)
        else:
            step = float(rng.choice([1.0, 10.0, 30.0]))
            P, Q = tracking_pair(rng, n, d, kind, step=step)
        yield Chain(P), Chain(Q)
