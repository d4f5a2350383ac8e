import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apfkit.apf import CurveSample, trapezoid_weights
from apfkit.errors import APFError, BadK
from apfkit.fda import classify, functional_boxplot, kmeans_curves, lloyd, mbd, trimmed_mean

from conftest import constant_curves


def naive_mbd(vals, width):
    r, n = vals.shape
    out = []
    for h in range(r):
        total = 0.0
        for i, j in itertools.combinations(range(r), 2):
            lo = np.minimum(vals[i], vals[j])
            hi = np.maximum(vals[i], vals[j])
            total += np.count_nonzero((lo <= vals[h]) & (vals[h] <= hi)) / n * width
        out.append(total / math.comb(r, 2))
    return np.array(out)


def test_mbd_identical_curves_full_window():
    curves = constant_curves([2.0] * 5, window=(0.0, 0.5))
    assert np.allclose(mbd(curves), 0.5)


def test_mbd_three_constants():
    assert np.allclose(mbd(constant_curves([1, 2, 3])), [2 / 3, 1, 2 / 3])


def test_mbd_four_constants():
    assert np.allclose(mbd(constant_curves([1, 2, 3, 4])), [1 / 2, 5 / 6, 5 / 6, 1 / 2])


def test_mbd_matches_pair_enumeration(rng):
    for _ in range(20):
        vals = np.round(rng.normal(size=(int(rng.integers(2, 9)), 7)), 1)
        curves = [CurveSample((0, 2), v) for v in vals]
        assert np.allclose(mbd(curves), naive_mbd(vals, 2.0))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 10), st.integers(2, 8), st.integers(0, 2 ** 32 - 1))
def test_mbd_range_and_permutation(r, n, seed):
    g = np.random.default_rng(seed)
    vals = g.integers(0, 4, size=(r, n)).astype(float)
    curves = [CurveSample((0, 3), v) for v in vals]
    d = mbd(curves)
    assert np.all(d >= 0) and np.all(d <= 3 + 1e-12)
    perm = g.permutation(r)
    assert np.allclose(mbd([curves[i] for i in perm]), d[perm])


def test_boxplot_identical_curves():
    res = functional_boxplot(constant_curves([1.0] * 6))
    assert res.outlier_indices == []
    assert np.array_equal(res.central_lower.values, res.central_upper.values)


def test_boxplot_flags_far_curve():
    res = functional_boxplot(constant_curves([1, 2, 3, 4, 5, 100]))
    # Deepest three are 2, 3, 4: band [2, 4], fences [-1, 7].
    assert np.allclose(res.central_lower.values, 2) and np.allclose(res.central_upper.values, 4)
    assert np.allclose(res.fence_lower.values, -1) and np.allclose(res.fence_upper.values, 7)
    assert res.outlier_indices == [5]
    assert res.central_index in (2, 3)


def test_boxplot_needs_four_curves():
    with pytest.raises(APFError):
        functional_boxplot(constant_curves([1, 2, 3]))


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 12), st.integers(2, 6), st.integers(0, 2 ** 32 - 1))
def test_boxplot_invariants(r, n, seed):
    vals = np.random.default_rng(seed).standard_cauchy(size=(r, n))
    curves = [CurveSample((0, 1), v) for v in vals]
    res = functional_boxplot(curves)
    assert np.all(res.fence_lower.values <= res.central_lower.values)
    assert np.all(res.central_upper.values <= res.fence_upper.values)
    flagged = [i for i in range(r) if np.any(vals[i] < res.fence_lower.values)
               or np.any(vals[i] > res.fence_upper.values)]
    assert res.outlier_indices == flagged
    assert functional_boxplot(curves, inflation=math.inf).outlier_indices == []


def test_trimmed_mean_examples(rng):
    vals = rng.random((6, 5))
    curves = [CurveSample((0, 1), v) for v in vals]
    assert np.allclose(trimmed_mean(curves, 0.0).values, vals.mean(axis=0))
    assert np.allclose(trimmed_mean(constant_curves([1, 2, 3]), 1 / 3).values, 1.5)
    assert trimmed_mean(curves[:1], 0.5) == curves[0]


def test_kmeans_k1_and_split(rng):
    levels = np.concatenate([rng.normal(0, 0.1, 10), rng.normal(10, 0.1, 10)])
    curves = constant_curves(levels)
    assert set(kmeans_curves(curves, 1).tolist()) == {0}
    for seed in range(5):
        labels = kmeans_curves(curves, 2, seed=seed, n_init=1)
        assert len(set(labels[:10])) == 1 and len(set(labels[10:])) == 1
        assert labels[0] != labels[10]


def test_kmeans_bad_k():
    with pytest.raises(BadK):
        kmeans_curves(constant_curves([1, 2, 3]), 3)
    with pytest.raises(BadK):
        kmeans_curves(constant_curves([1, 2, 3]), 0)


def test_kmeans_deterministic(rng):
    curves = [CurveSample((0, 1), v) for v in rng.random((30, 8))]
    assert np.array_equal(kmeans_curves(curves, 3, seed=4), kmeans_curves(curves, 3, seed=4))


def test_lloyd_objective_non_increasing(rng):
    for seed in range(20):
        vals = rng.normal(size=(40, 12)).cumsum(axis=1)
        _, _, obj = lloyd(vals, trapezoid_weights(12, 0.1), 4, np.random.default_rng(seed))
        assert all(b <= a + 1e-9 for a, b in zip(obj, obj[1:]))


def test_restarts_never_worse_than_single_start(rng):
    vals = rng.normal(size=(40, 12)).cumsum(axis=1)
    curves = [CurveSample((0, 1), v) for v in vals]
    w = trapezoid_weights(12, 1 / 11)

    def objective(labels):
        return sum(((vals[labels == j] - vals[labels == j].mean(axis=0)) ** 2 @ w).sum()
                   for j in set(labels.tolist()))

    best = objective(kmeans_curves(curves, 4, seed=1, n_init=10))
    first = np.random.SeedSequence(1).spawn(10)[0]
    single, _, _ = lloyd(vals, w, 4, np.random.default_rng(first))
    assert best <= objective(single) + 1e-9


def test_classify_examples():
    groups = [constant_curves([0.0]), constant_curves([10.0])]
    assert classify(constant_curves([2.0])[0], groups, 0.0) == 0
    groups = [constant_curves([0.0, 0.1, 0.2, 9.0]), constant_curves([10.0, 10.1])]
    mean0 = trimmed_mean(groups[0], 0.2)
    assert classify(mean0, groups, 0.2) == 0
    # Equidistant query goes to the smaller index.
    assert classify(constant_curves([5.0])[0], [constant_curves([0.0]), constant_curves([10.0])], 0) == 0


@settings(max_examples=40, deadline=None)
@given(st.floats(-50, 50), st.integers(0, 2 ** 32 - 1))
def test_classify_translation_invariant(shift, seed):
    g = np.random.default_rng(seed)
    groups = [[CurveSample((0, 1), v) for v in g.normal(m, 1, size=(5, 6))] for m in (0, 1.5, 3)]
    query = CurveSample((0, 1), g.normal(1.5, 1, 6))
    moved = [[CurveSample((0, 1), c.values + shift) for c in grp] for grp in groups]
    mq = CurveSample((0, 1), query.values + shift)
    base = classify(query, groups, 0.2)
    # Exact float translation can flip a near-tie; only assert on clear margins.
    means = [trimmed_mean(grp, 0.2).values for grp in groups]
    w = trapezoid_weights(6, 0.2)
    d = sorted(float(((m - query.values) ** 2) @ w) for m in means)
    if d[1] - d[0] > 1e-6:
        assert classify(mq, moved, 0.2) == base
