import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apfkit.apf import CurveSample
from apfkit.envelope import (bounding_curves, combine_envelopes, extreme_ranks,
                             rank_envelope_test)
from apfkit.errors import BadRank, GridMismatch, LengthMismatch

from conftest import constant_curves


def naive_ranks(values):
    # Direct reading of the definition: largest l whose band contains the curve.
    n = len(values)
    s = np.sort(values, axis=0)
    out = []
    for row in values:
        best = 1
        for l in range(1, max(1, (n - 1) // 2) + 1):
            if np.all(s[l - 1] <= row) and np.all(row <= s[n - l]):
                best = l
        out.append(best)
    return np.array(out)


def test_bounding_curves_l1_is_min_max(rng):
    vals = rng.random((7, 9))
    curves = [CurveSample((0, 1), v) for v in vals]
    lo, hi = bounding_curves(curves, 1)
    assert np.array_equal(lo.values, vals.min(axis=0))
    assert np.array_equal(hi.values, vals.max(axis=0))


def test_bounding_curves_constants():
    lo, hi = bounding_curves(constant_curves([1, 2, 3, 4, 5]), 2)
    assert np.all(lo.values == 2) and np.all(hi.values == 4)


def test_bounding_curves_identical():
    curves = constant_curves([3] * 7)
    for l in (1, 2, 3):
        lo, hi = bounding_curves(curves, l)
        assert np.all(lo.values == 3) and np.all(hi.values == 3)


def test_bounding_curves_errors():
    with pytest.raises(BadRank):
        bounding_curves(constant_curves([1, 2, 3, 4, 5]), 3)
    with pytest.raises(GridMismatch):
        bounding_curves([CurveSample((0, 1), np.zeros(3)), CurveSample((0, 2), np.zeros(3))], 1)


def test_extreme_ranks_examples():
    assert extreme_ranks(constant_curves([1, 2, 3, 4, 5])).tolist() == [1, 2, 2, 2, 1]
    assert extreme_ranks(constant_curves([0] * 9)).tolist() == [4] * 9


def test_crossing_curve_has_rank_one():
    base = constant_curves([1, 2, 3, 4, 5], n_grid=4)
    zigzag = CurveSample((0, 1), [10, 3, 3, -10])
    assert extreme_ranks([zigzag, *base])[0] == 1


def test_extreme_ranks_match_definition(rng):
    for _ in range(20):
        vals = np.round(rng.random((int(rng.integers(2, 12)), 6)), 1)
        curves = [CurveSample((0, 1), v) for v in vals]
        assert np.array_equal(extreme_ranks(curves), naive_ranks(vals))


def test_all_identical_accepts():
    curves = constant_curves([1.0] * 20)
    res = rank_envelope_test(curves[0], curves[1:], alpha=0.05)
    assert not res.reject
    assert res.statistic_strict == 0.0
    assert res.l_alpha == 9


def test_far_observation_rejects(rng):
    sims = constant_curves(rng.uniform(0, 5, 99))
    obs = constant_curves([10])[0]
    res = rank_envelope_test(obs, sims, alpha=0.05)
    assert res.ranks[0] == 1
    assert res.statistic_strict == 0.0
    assert res.l_alpha == 3
    assert res.reject
    assert np.all(obs.values > res.upper.values)


def test_decision_matches_envelope_exit(rng):
    for _ in range(200):
        vals = rng.normal(size=(40, 15)).cumsum(axis=1)
        curves = [CurveSample((0, 1), v) for v in vals]
        res = rank_envelope_test(curves[0], curves[1:], alpha=0.1)
        outside = np.any(curves[0].values < res.lower.values) or np.any(
            curves[0].values > res.upper.values)
        assert res.reject == outside
        assert res.reject == (res.statistic <= 0.1)
        assert 1 <= res.l_alpha <= 39 // 2
        assert np.all(res.lower.values <= res.upper.values)


def test_small_alpha_falls_back_to_l_one(rng):
    curves = [CurveSample((0, 1), v) for v in rng.random((5, 4))]
    res = rank_envelope_test(curves[0], curves[1:], alpha=1e-6)
    assert res.l_alpha == 1 and not res.reject


def test_level_under_exchangeability():
    # 500 replications of 20 IID random-walk curves: rejection <= alpha + 2 SE.
    rng = np.random.default_rng(7)
    alpha, reps = 0.1, 500
    rejections = 0
    for _ in range(reps):
        vals = rng.normal(size=(20, 10)).cumsum(axis=1)
        curves = [CurveSample((0, 1), v) for v in vals]
        rejections += rank_envelope_test(curves[0], curves[1:], alpha).reject
    se = np.sqrt(alpha * (1 - alpha) / reps)
    assert rejections / reps <= alpha + 2 * se


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 15), st.integers(2, 8), st.integers(0, 2 ** 32 - 1))
def test_ranks_invariant_under_increasing_map(r, n, seed):
    vals = np.random.default_rng(seed).integers(-5, 6, size=(r, n)).astype(float)
    curves = [CurveSample((0, 1), v) for v in vals]
    mapped = [CurveSample((0, 1), np.exp(v) + v ** 3) for v in vals]
    assert np.array_equal(extreme_ranks(curves), extreme_ranks(mapped))


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 15), st.integers(2, 8), st.integers(0, 2 ** 32 - 1))
def test_bands_are_nested(r, n, seed):
    vals = np.random.default_rng(seed).normal(size=(r, n))
    curves = [CurveSample((0, 1), v) for v in vals]
    top = max(1, (r - 1) // 2)
    for l in range(1, top):
        lo, hi = bounding_curves(curves, l)
        lo2, hi2 = bounding_curves(curves, l + 1)
        assert np.all(lo2.values >= lo.values) and np.all(hi2.values <= hi.values)


def test_combine_single_list_equals_test(rng):
    vals = rng.normal(size=(30, 12)).cumsum(axis=1)
    curves = [CurveSample((0, 1), v) for v in vals]
    a = rank_envelope_test(curves[0], curves[1:])
    b = combine_envelopes([(curves[0], curves[1:])])
    assert a.reject == b.reject and a.l_alpha == b.l_alpha
    assert np.array_equal(a.ranks, b.ranks)
    assert np.array_equal(a.lower.values, b.lower[0].values)


def test_combine_duplicate_copies(rng):
    for _ in range(30):
        vals = rng.normal(size=(30, 12)).cumsum(axis=1)
        vals[0] *= rng.uniform(0.5, 2.5)
        curves = [CurveSample((0, 1), v) for v in vals]
        one = rank_envelope_test(curves[0], curves[1:])
        two = combine_envelopes([(curves[0], curves[1:]), (curves[0], curves[1:])])
        assert one.reject == two.reject
        assert np.array_equal(one.ranks, two.ranks)


def test_combine_two_statistics_splits_bands(rng):
    a = [CurveSample((0, 1), v) for v in rng.random((20, 5))]
    b = [CurveSample((0, 2), v) for v in rng.random((20, 7))]
    res = combine_envelopes([(a[0], a[1:]), (b[0], b[1:])])
    assert res.lower[0].n_grid == 5 and res.lower[1].window == (0.0, 2.0)


def test_combine_length_mismatch(rng):
    a = [CurveSample((0, 1), v) for v in rng.random((20, 5))]
    with pytest.raises(LengthMismatch):
        combine_envelopes([(a[0], a[1:]), (a[0], a[2:])])
