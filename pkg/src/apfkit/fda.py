"""Functional-data tools for samples of curves: depth, boxplots, trimming,
clustering and nearest-trimmed-mean classification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .apf import CurveSample, like, stack, trapezoid_weights
from .errors import APFError, BadK


def _mbd(values: np.ndarray, width: float) -> np.ndarray:
    r, n = values.shape
    if r < 2:
        raise APFError("band depth needs at least two curves")
    below = rankdata(values, method="min", axis=0) - 1
    above = r - rankdata(values, method="max", axis=0)
    # Pairs whose band misses A_h at a grid point lie entirely above or below it.
    total = r * (r - 1) / 2
    inside = total - below * (below - 1) / 2 - above * (above - 1) / 2
    return inside.sum(axis=1) / (n * total) * width


def mbd(curves: Sequence[CurveSample]) -> np.ndarray:
    """Modified band depth of each curve.

    For every pair ``i < j`` (pairs containing the curve itself included) the
    length of the set where the curve lies between ``A_i`` and ``A_j`` is
    measured by counting grid points; the depth is the average over pairs and
    so lies in ``[0, T2 - T1]``.
    """
    vals = stack(curves)
    t1, t2 = curves[0].window
    return _mbd(vals, t2 - t1)


def _depth_order(depths: np.ndarray) -> np.ndarray:
    # Deepest first, equal depths in index order.
    return np.argsort(-depths, kind="stable")


@dataclass(frozen=True, eq=False)
class BoxplotResult:
    depths: np.ndarray
    central_index: int
    central_lower: CurveSample
    central_upper: CurveSample
    fence_lower: CurveSample
    fence_upper: CurveSample
    outlier_indices: list[int]


def functional_boxplot(curves: Sequence[CurveSample], inflation: float = 1.5) -> BoxplotResult:
    """Functional boxplot with the fence outlier rule.

    The central band spans the ``ceil(r/2)`` deepest curves (by MBD).  Fences
    sit ``inflation`` times the pointwise band range beyond it; a curve
    crossing either fence anywhere is an outlier.
    """
    vals = stack(curves)
    r = len(vals)
    if r < 4:
        raise APFError("a functional boxplot needs at least four curves")
    if not inflation >= 0:
        raise APFError("inflation must be non-negative")
    t1, t2 = curves[0].window
    depths = _mbd(vals, t2 - t1)
    central = vals[_depth_order(depths)[: math.ceil(r / 2)]]
    lo, hi = central.min(axis=0), central.max(axis=0)
    spread = hi - lo
    if math.isinf(inflation):
        f_lo = np.full_like(lo, -np.inf)
        f_hi = np.full_like(hi, np.inf)
    else:
        f_lo = lo - inflation * spread
        f_hi = hi + inflation * spread
    out = np.nonzero(np.any((vals < f_lo) | (vals > f_hi), axis=1))[0]
    tmpl = curves[0]
    return BoxplotResult(depths, int(np.argmax(depths)), like(tmpl, lo), like(tmpl, hi),
                         like(tmpl, f_lo), like(tmpl, f_hi), [int(i) for i in out])


def _n_kept(r: int, alpha: float) -> int:
    # Guard the ceiling against products such as 0.8 * 50 landing one ulp high.
    return max(1, math.ceil((1 - alpha) * r - 1e-9))


def trimmed_mean(curves: Sequence[CurveSample], alpha: float) -> CurveSample:
    """Pointwise mean of the ``ceil((1 - alpha) r)`` deepest curves."""
    if not 0 <= alpha < 1:
        raise APFError("alpha must lie in [0, 1)")
    vals = stack(curves)
    r = len(vals)
    if r == 1:
        return like(curves[0], vals[0])
    t1, t2 = curves[0].window
    keep = _depth_order(_mbd(vals, t2 - t1))[: _n_kept(r, alpha)]
    return like(curves[0], vals[keep].mean(axis=0))


def lloyd(values: np.ndarray, weights: np.ndarray, K: int, rng: np.random.Generator,
          max_iter: int = 100):
    """Lloyd iterations under the weighted L2 distance.

    Returns ``(labels, centres, objectives)`` where ``objectives`` records the
    within-cluster sum of squared distances after every assignment step.
    """
    r = len(values)
    if not 1 <= K < r:
        raise BadK(f"K must satisfy 1 <= K < r = {r}, got {K}")
    centres = values[rng.choice(r, size=K, replace=False)].copy()
    labels = None
    objectives = []
    for _ in range(max_iter):
        diff = values[:, None, :] - centres[None, :, :]
        d2 = (diff ** 2) @ weights
        new = np.argmin(d2, axis=1)
        objectives.append(float(d2[np.arange(r), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(K):
            members = labels == j
            if members.any():
                centres[j] = values[members].mean(axis=0)
            else:
                far = int(np.argmax(d2[np.arange(r), labels]))
                centres[j] = values[far]
                labels[far] = j
    return labels, centres, objectives


def kmeans_curves(curves: Sequence[CurveSample], K: int, seed: int = 0,
                  max_iter: int = 100, n_init: int = 10) -> np.ndarray:
    """K-means labels (``0..K-1``) of the curves under the L2 distance.

    Lloyd's algorithm is restarted ``n_init`` times from independent random
    centres; the run with the smallest within-cluster sum of squares wins
    (earliest run on ties).
    """
    vals = stack(curves)
    if n_init < 1:
        raise BadK("n_init must be positive")
    w = trapezoid_weights(vals.shape[1], curves[0].spacing)
    best, best_obj = None, np.inf
    for rng in (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_init)):
        labels, _, objectives = lloyd(vals, w, K, rng, max_iter)
        if objectives[-1] < best_obj:
            best, best_obj = labels, objectives[-1]
    return best


def classify(curve: CurveSample, groups: Sequence[Sequence[CurveSample]], alpha: float) -> int:
    """Index of the group whose ``alpha``-trimmed mean is L2-closest to ``curve``."""
    if not groups or any(len(g) == 0 for g in groups):
        raise APFError("every group needs at least one curve")
    means = stack([curve] + [trimmed_mean(g, alpha) for g in groups])
    w = trapezoid_weights(means.shape[1], curve.spacing)
    d2 = ((means[1:] - means[0]) ** 2) @ w
    return int(np.argmin(d2))
