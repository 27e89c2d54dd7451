import math

import numpy as np
import pytest

import approxfrechet.approxdecide as ad
from approxfrechet.approxdecide import (
    DecisionContext,
    Failure,
    IntervalKey,
    InvariantViolation,
    ProvenanceRecord,
    Success,
    approx_decide,
    cost_bound,
    designate,
    greedy_mapping_p,
    greedy_mapping_q,
    reconstruct,
)
from approxfrechet.freespace import ContractError, correspondence_cost, exact_decide, exact_frechet
from approxfrechet.geometry import Chain, ParamRange, point_at

from .corpus import instances
from .oracles import free_params_on_edge


def staircase(k, step=1.0):
    pts, x, y = [], 0.0, 0.0
    for i in range(k):
        pts.append((x, y))
        if i % 2 == 0:
            x += step
        else:
            y += step
    return np.array(pts)


def record(rng, order=0):
    return ProvenanceRecord(None, (1.0, 1.0), [], 0, (1.0, 1.0), rng, order)


def tracking_corpus(seed, count, n_max=120):
    return instances(seed, count, n_max=n_max)


# -- outcomes -----------------------------------------------------------------------------


def test_identical_chains_succeed_at_zero():
    P = Chain(staircase(15))
    out = approx_decide(P, P, 0.0)
    assert isinstance(out, Success) and out.ok
    assert out.measured_cost == 0.0
    assert out.correspondence.is_full(15, 15)


def test_far_starts_fail():
    out = approx_decide(Chain([(0, 0), (1, 0)]), Chain([(10, 0), (11, 0)]), 1.0)
    assert isinstance(out, Failure) and not out.ok


def test_rejects_negative_delta_and_dimension_mismatch():
    P = Chain([(0, 0), (1, 0)])
    with pytest.raises(ValueError):
        approx_decide(P, P, -0.5)
    with pytest.raises(ValueError):
        approx_decide(P, Chain([(0, 0, 0), (1, 0, 0)]), 1.0)


def test_alpha_is_clamped_with_warning():
    P = Chain(staircase(16))
    with pytest.warns(UserWarning, match="clamped"):
        out = approx_decide(P, P, 0.1, alpha=1.0)
    assert out.stats.alpha == 4.0
    assert approx_decide(P, P, 0.1).stats.alpha == 16.0


def test_constant_chain_decision():
    P, Q = Chain([(0, 0)]), Chain([(3, 4), (0, 1)])
    assert approx_decide(P, Q, 5.0).ok
    assert not approx_decide(P, Q, 4.9).ok


def test_cost_bound_formula():
    assert cost_bound(4, 10.0, 0.5) == pytest.approx(2 * 12 * 0.5)


# -- designate ---------------------------------------------------------------------------------


def test_designate_merges_shared_upper_endpoint():
    store = ad._Store(strict=True)
    key = IntervalKey.vertical(2, 2)
    designate(store, key, ParamRange(1.2, 1.6), record(ParamRange(1.2, 1.6)))
    iv = designate(store, key, ParamRange(1.1, 1.6), record(ParamRange(1.1, 1.6), 1))
    assert iv.range == (1.1, 1.6)
    assert len(iv.records) == 2


def test_designate_onto_empty_store():
    store = ad._Store(strict=True)
    iv = designate(store, IntervalKey.horizontal(3, 1), ParamRange(2.25, 2.5), record(ParamRange(2.25, 2.5)))
    assert iv.range == (2.25, 2.5)


def test_designate_hull_fallback():
    key = IntervalKey.vertical(2, 2)
    strict = ad._Store(strict=True)
    designate(strict, key, ParamRange(1.2, 1.6), record(ParamRange(1.2, 1.6)))
    with pytest.raises(InvariantViolation):
        designate(strict, key, ParamRange(1.1, 1.5), record(ParamRange(1.1, 1.5)))
    lenient = ad._Store(strict=False)
    designate(lenient, key, ParamRange(1.2, 1.6), record(ParamRange(1.2, 1.6)))
    iv = designate(lenient, key, ParamRange(1.1, 1.5), record(ParamRange(1.1, 1.5)))
    assert iv.range == (1.1, 1.6)
    assert len(lenient.diagnostics) == 1


def test_designate_rejects_range_off_edge():
    with pytest.raises(ContractError):
        designate(ad._Store(True), IntervalKey.vertical(2, 3), ParamRange(1.5, 2.5), record(ParamRange(1.5, 2.5)))


def test_designate_lexicographic_progress_asserted():
    store = ad._Store(strict=True)
    store.current = IntervalKey.horizontal(3, 3)
    with pytest.raises(InvariantViolation):
        designate(store, IntervalKey.vertical(3, 3), ParamRange(2.5, 3.0), record(ParamRange(2.5, 3.0)))


def test_interval_key_order_vertical_first():
    keys = [IntervalKey.horizontal(2, 3), IntervalKey.vertical(2, 3), IntervalKey.vertical(2, 2)]
    assert sorted(keys) == [IntervalKey.vertical(2, 2), IntervalKey.vertical(2, 3), IntervalKey.horizontal(2, 3)]
    assert repr(keys[0]) == "H(2, 3)"


# -- greedy mapping ------------------------------------------------------------------------------


def test_greedy_everything_in_one_box_reaches_end():
    rng = np.random.default_rng(0)
    P = Chain(rng.uniform(0, 1, size=(20, 2)))
    ctx = DecisionContext.build(P, P, 0.2, 20)
    assert not ctx.cls.p_bad[1]
    out = greedy_mapping_p(ctx, 2, 2.0)
    assert [d.key for d in out] == [None]
    assert out[0].canonical == (20.0, 20.0)


def test_greedy_good_exit_edge_advances_box_by_box(monkeypatch):
    k, delta = 30, 0.05
    P = Chain(staircase(k))
    Q = Chain(staircase(k) + [0.0, delta])
    assert exact_decide(P, Q, delta)
    ctx = DecisionContext.build(P, Q, delta, k)
    assert not ctx.cls.p_bad[1:-1].any()
    matched = []
    real = ad.segment_chain_match

    def spy(seg, chain, rng, *args, **kwargs):
        res = real(seg, chain, rng, *args, **kwargs)
        matched.append((seg, rng, res))
        return res

    monkeypatch.setattr(ad, "segment_chain_match", spy)
    out = greedy_mapping_p(ctx, 2, 2.0)
    assert len(matched) > 5
    for seg, (tc, tf), res in matched:
        assert res is not None
        # the matched stretch of Q starts near the edge's first vertex and ends near its last
        assert np.linalg.norm(point_at(Q, tc) - seg.a) <= delta * (1 + 1e-9)
        assert np.linalg.norm(point_at(Q, tf) - seg.b) <= delta * (1 + 1e-9)
    assert [d.key for d in out] == [None]
    path = out[0].path[: out[0].upto] + [out[0].canonical]
    assert np.all(np.diff(np.array(path), axis=0) >= 0)


def test_greedy_q_mirrors_p():
    k, delta = 30, 0.05
    P = Chain(staircase(k))
    Q = Chain(staircase(k) + [0.0, delta])
    ctx_pq = DecisionContext.build(P, Q, delta, k)
    ctx_qp = DecisionContext.build(Q, P, delta, k)
    a = greedy_mapping_p(ctx_pq, 2, 2.0)
    b = greedy_mapping_q(ctx_qp, 2, 2.0)
    assert [d.key for d in a] == [d.key for d in b] == [None]
    pa = a[0].path[: a[0].upto]
    pb = b[0].path[: b[0].upto]
    assert np.allclose(np.array(pa), np.array(pb)[:, ::-1])


def test_greedy_preconditions():
    P = Chain(staircase(20))
    ctx = DecisionContext.build(P, P, 0.05, 20)
    with pytest.raises(ContractError):
        greedy_mapping_p(ctx, 1, 1.0)
    with pytest.raises(ContractError):
        greedy_mapping_p(ctx, 2, 5.0)


def brute_free(center, delta, chain, e):
    """Sampled free parameters of ``chain`` edge ``e`` around ``center``."""
    return e - 1 + free_params_on_edge(center, delta, chain.vertex(e - 1), chain.vertex(e), samples=40001)


def check_designation(ctx, d):
    P, Q, delta = ctx.P, ctx.Q, ctx.delta
    key, (lo, hi) = d.key, d.range
    if key.orient == ad.Orientation.VERTICAL:
        assert ctx.cls.p_dangerous[key.i - 1] and ctx.cls.q_edge_bad[key.j - 2]
        free = brute_free(P.vertex(key.i), delta, Q, key.j)
    else:
        assert ctx.cls.q_dangerous[key.j - 1] and ctx.cls.p_edge_bad[key.i - 2]
        free = brute_free(Q.vertex(key.j), delta, P, key.i)
    step = 1 / 40000
    assert len(free) > 0 or hi - lo <= 2 * step
    if len(free):
        # ranges are "free from some point to the end of the free interval"
        assert lo >= free.min() - 2 * step
        assert abs(hi - free.max()) <= 2 * step


def test_greedy_bad_exit_ranges_match_brute_force(monkeypatch):
    seen = []
    real_p, real_q = ad.greedy_mapping_p, ad.greedy_mapping_q

    def spy(real):
        def wrapped(ctx, *args):
            out = real(ctx, *args)
            seen.extend((ctx, d) for d in out if d.key is not None)
            return out

        return wrapped

    monkeypatch.setattr(ad, "greedy_mapping_p", spy(real_p))
    monkeypatch.setattr(ad, "greedy_mapping_q", spy(real_q))
    for P, Q in tracking_corpus(21, 30, n_max=60):
        fd = exact_frechet(P, Q)
        approx_decide(P, Q, fd * 1.5, max(len(P), len(Q)), strict=True)
    assert len(seen) > 50
    for ctx, d in seen:
        check_designation(ctx, d)


# -- main loop on a corpus --------------------------------------------------------------------------


@pytest.mark.parametrize("seed", [1, 2])
def test_strict_corpus_sound_and_complete(seed):
    for P, Q in tracking_corpus(seed, 40):
        fd = exact_frechet(P, Q)
        N = max(len(P), len(Q))
        for alpha in (math.sqrt(N), float(N)):
            for delta in (fd * (1 + 1e-6), 0.5 * fd, 2.0 * fd):
                out = approx_decide(P, Q, delta, alpha, strict=True)
                if delta >= fd:
                    assert out.ok
                if out.ok:
                    corr = out.correspondence
                    assert corr.is_full(len(P), len(Q))
                    assert out.measured_cost == correspondence_cost(P, Q, corr)
                    assert out.measured_cost <= cost_bound(P.dim, out.stats.alpha, delta) * (1 + 1e-9)
                else:
                    assert not exact_decide(P, Q, delta)


def test_sparsity_bound():
    for P, Q in tracking_corpus(7, 30):
        fd = exact_frechet(P, Q)
        for alpha in (math.sqrt(max(len(P), len(Q))), float(max(len(P), len(Q)))):
            out = approx_decide(P, Q, fd * 1.01, alpha)
            cls = DecisionContext.build(P, Q, fd * 1.01, alpha).cls
            bound = (cls.p_dangerous.sum() + 1) * (cls.q_edge_bad.sum() + 1) + (
                cls.q_dangerous.sum() + 1
            ) * (cls.p_edge_bad.sum() + 1)
            assert out.stats.intervals_stored <= bound


def test_reconstruct_identical_chains_is_diagonal():
    P = Chain(np.cumsum(np.random.default_rng(4).normal(size=(25, 2)), axis=0))
    out = approx_decide(P, P, 0.0)
    bp = out.correspondence.breakpoints
    assert out.measured_cost == 0.0
    assert np.allclose(bp[:, 0], bp[:, 1])


def test_identical_chains_positive_delta_within_bound():
    # in-box paths are rectilinear, so only the bound (not zero) is promised for delta > 0
    P = Chain(np.cumsum(np.random.default_rng(4).normal(size=(25, 2)), axis=0))
    for delta in (0.01, 0.3, 3.0):
        out = approx_decide(P, P, delta)
        assert out.ok
        assert out.measured_cost <= cost_bound(2, out.stats.alpha, delta) * (1 + 1e-9)


def test_reconstruct_without_final_designation():
    store = ad._Store(strict=True)
    designate(store, IntervalKey.vertical(1, 2), ParamRange(1.0, 1.5), record(ParamRange(1.0, 1.5)))
    assert reconstruct(store, 3, 3) is None


def test_reconstruct_broken_chain_raises():
    store = ad._Store(strict=True)
    pred = IntervalKey.vertical(1, 2)
    designate(store, pred, ParamRange(1.0, 1.5), record(ParamRange(1.0, 1.5)))
    # claims to come from a point of pred that pred does not contain
    bad = ProvenanceRecord(pred, (1.0, 1.9), [], 0, (1.0, 1.9), ParamRange(1.0, 2.0), 1)
    designate(store, IntervalKey.vertical(2, 2), ParamRange(1.0, 2.0), bad)
    with pytest.raises(InvariantViolation):
        reconstruct(store, 2, 2)


def test_decisions_are_deterministic():
    P, Q = next(tracking_corpus(9, 1))
    fd = exact_frechet(P, Q)
    a = approx_decide(P, Q, fd * 1.2)
    b = approx_decide(P, Q, fd * 1.2)
    assert np.array_equal(a.correspondence.breakpoints, b.correspondence.breakpoints)
