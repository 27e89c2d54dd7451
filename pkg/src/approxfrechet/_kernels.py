"""Compiled inner loops for the quadratic free-space sweep."""

import math

import numpy as np
from numba import njit


_ENDPOINT_SLACK = 1e-12


@njit(cache=True)
def _ball_segment(c, r, a, b):
    d = c.shape[0]
    A = 0.0
    da2 = 0.0
    db2 = 0.0
    dot = 0.0
    for k in range(d):
        ab = b[k] - a[k]
        ac = c[k] - a[k]
        bc = c[k] - b[k]
        A += ab * ab
        da2 += ac * ac
        db2 += bc * bc
        dot += ac * ab
    r2 = r * r
    lo = math.inf
    hi = -math.inf
    if A > 0.0:
        u0 = dot / A
        h2 = 0.0
        for k in range(d):
            f = (c[k] - a[k]) - u0 * (b[k] - a[k])
            h2 += f * f
        if h2 <= r2 + 1e-14 * (da2 + r2):
            w = math.sqrt(max(r2 - h2, 0.0) / A)
            lo = max(u0 - w, 0.0)
            hi = min(u0 + w, 1.0)
    # endpoints depend only on (c, vertex, r), so adjacent edges agree on a shared vertex;
    # the wider slack makes any interior interval that reaches an endpoint imply it
    if da2 <= r2 + _ENDPOINT_SLACK * (da2 + r2):
        lo = 0.0
        hi = max(hi, 0.0)
    if db2 <= r2 + _ENDPOINT_SLACK * (db2 + r2):
        hi = 1.0
        lo = min(lo, 1.0)
    if lo > hi:
        return math.nan, math.nan
    return lo, hi


@njit(cache=True)
def ball_segments(c, r, a, b):
    """Row-wise ``_ball_segment`` for centers ``c[k]`` and segments ``a[k] -> b[k]``."""
    k = a.shape[0]
    lo = np.empty(k)
    hi = np.empty(k)
    for row in range(k):
        lo[row], hi[row] = _ball_segment(c[row], r, a[row], b[row])
    return lo, hi


@njit(cache=True, nogil=True)
def reach_tables(P, Q, delta):
    """Alt-Godau reachability sweep.

    ``vr[i, j]`` is the reachable part of {p_i} x edge(q_j, q_j+1) and ``hr[i, j]`` of
    edge(p_i, p_i+1) x {q_j} (0-based, local [0, 1] parameters, NaN when empty).
    """
    m = P.shape[0]
    n = Q.shape[0]
    vr = np.full((m, n - 1, 2), np.nan)
    hr = np.full((m - 1, n, 2), np.nan)
    r = delta
    # left boundary s = 0
    ok = True
    for j in range(n - 1):
        lo, hi = _ball_segment(P[0], r, Q[j], Q[j + 1])
        if ok and not math.isnan(lo) and lo == 0.0:
            vr[0, j, 0] = 0.0
            vr[0, j, 1] = hi
            ok = hi == 1.0
        else:
            ok = False
    ok = True
    for i in range(m - 1):
        lo, hi = _ball_segment(Q[0], r, P[i], P[i + 1])
        if ok and not math.isnan(lo) and lo == 0.0:
            hr[i, 0, 0] = 0.0
            hr[i, 0, 1] = hi
            ok = hi == 1.0
        else:
            ok = False
    for i in range(m - 1):
        for j in range(n - 1):
            left_lo = vr[i, j, 0]
            bot_lo = hr[i, j, 0]
            has_left = not math.isnan(left_lo)
            has_bot = not math.isnan(bot_lo)
            if not has_left and not has_bot:
                continue
            rlo, rhi = _ball_segment(P[i + 1], r, Q[j], Q[j + 1])
            if not math.isnan(rlo):
                if has_bot:
                    vr[i + 1, j, 0] = rlo
                    vr[i + 1, j, 1] = rhi
                elif max(rlo, left_lo) <= rhi:
                    vr[i + 1, j, 0] = max(rlo, left_lo)
                    vr[i + 1, j, 1] = rhi
            tlo, thi = _ball_segment(Q[j + 1], r, P[i], P[i + 1])
            if not math.isnan(tlo):
                if has_left:
                    hr[i, j + 1, 0] = tlo
                    hr[i, j + 1, 1] = thi
                elif max(tlo, bot_lo) <= thi:
                    hr[i, j + 1, 0] = max(tlo, bot_lo)
                    hr[i, j + 1, 1] = thi
    return vr, hr
