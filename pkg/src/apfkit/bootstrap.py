"""Bootstrap inference for samples of curves and for single diagrams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .apf import APF, CurveSample, like, stack, trapezoid_weights
from .errors import APFError, WindowOutOfRange
from .geometry import alpha_filtration, as_points, delaunay
from .persistence import DETERMINISTIC, PersistenceDiagram, bottleneck, ph_pointcloud


def quantile_hat(thetas, alpha: float) -> float:
    """Smallest ``q >= 0`` whose empirical exceedance fraction is at most ``alpha``."""
    t = np.sort(np.asarray(thetas, dtype=float).reshape(-1))
    B = len(t)
    if B == 0:
        raise APFError("need at least one bootstrap value")
    if not 0 < alpha < 1:
        raise APFError("alpha must lie in (0, 1)")
    # At q = t[j] exactly B - 1 - j values exceed q (for distinct values); ties
    # only lower the count, so the infimum is the order statistic below.
    allowed = math.floor(alpha * B + 1e-9)
    j = B - 1 - allowed
    return max(0.0, float(t[j])) if j >= 0 else 0.0


def _resample_counts(rng: np.random.Generator, B: int, r: int, split: int | None = None):
    draws = rng.integers(0, r, size=(B, r))
    rows = np.repeat(np.arange(B), r)
    if split is None:
        counts = np.zeros((B, r))
        np.add.at(counts, (rows, draws.ravel()), 1.0)
        return counts
    first = np.zeros((B, r))
    second = np.zeros((B, r))
    left = np.zeros((B, r), dtype=bool)
    left[:, :split] = True
    np.add.at(first, (rows[left.ravel()], draws[left]), 1.0)
    np.add.at(second, (rows[~left.ravel()], draws[~left]), 1.0)
    return first, second


@dataclass(frozen=True, eq=False)
class BandResult:
    mean: CurveSample
    half_width: float
    lower: CurveSample
    upper: CurveSample
    q_hat: float
    thetas: np.ndarray


def mean_band(curves: Sequence[CurveSample], alpha: float = 0.05, B: int = 1000,
              seed: int = 0) -> BandResult:
    """Constant-width bootstrap confidence band for the mean curve.

    Each resample draws ``r`` curves with replacement; the bootstrap value is
    ``sqrt(r)`` times the sup distance between the sample mean and the
    resample mean.  The band is the mean plus or minus ``q_hat / sqrt(r)``.
    """
    vals = stack(curves)
    r = len(vals)
    if r < 2:
        raise APFError("a mean band needs at least two curves")
    if B < 1:
        raise APFError("B must be positive")
    mean = vals.mean(axis=0)
    counts = _resample_counts(np.random.default_rng(seed), B, r)
    boot = counts @ vals / r
    thetas = math.sqrt(r) * np.abs(boot - mean).max(axis=1)
    q = quantile_hat(thetas, alpha)
    h = q / math.sqrt(r)
    t = curves[0]
    return BandResult(like(t, mean), h, like(t, mean - h), like(t, mean + h), q, thetas)


class Statistic(str, Enum):
    KS = "ks"
    L1 = "l1"


@dataclass(frozen=True)
class TwoSampleResult:
    statistic: float
    q_hat: float
    p_hat: float
    reject: bool


def _restrict(curve: CurveSample, interval) -> np.ndarray:
    t1, t2 = curve.window
    if interval is None:
        return np.ones(curve.n_grid, dtype=bool)
    a, b = float(interval[0]), float(interval[1])
    tol = 1e-9 * (t2 - t1)
    if not (a < b and t1 - tol <= a and b <= t2 + tol):
        raise WindowOutOfRange(f"interval [{a}, {b}] is not inside the curve window [{t1}, {t2}]")
    g = curve.grid
    mask = (g >= a - tol) & (g <= b + tol)
    if mask.sum() < 2:
        raise WindowOutOfRange("interval covers fewer than two grid points")
    return mask


def two_sample(curves_a: Sequence[CurveSample], curves_b: Sequence[CurveSample],
               statistic: Statistic | str = Statistic.KS, alpha: float = 0.05,
               B: int = 1000, seed: int = 0, interval=None) -> TwoSampleResult:
    """Bootstrap two-sample test for equality of the curve distributions.

    ``KS`` is ``sqrt(r1 r2 / r)`` times the sup distance between the group means
    over ``interval``.  ``L1`` is the unscaled integral of the absolute mean
    difference, while its bootstrap values carry the ``sqrt(r1 r2 / r)``
    factor; see the README for the consequences.  Resamples are drawn from the
    pooled sample, the first ``r1`` draws forming the first group.
    """
    statistic = Statistic(statistic)
    r1, r2 = len(curves_a), len(curves_b)
    if r1 < 2 or r2 < 2:
        raise APFError("each group needs at least two curves")
    vals = stack([*curves_a, *curves_b])
    mask = _restrict(curves_a[0], interval)
    vals = vals[:, mask]
    r = r1 + r2
    scale = math.sqrt(r1 * r2 / r)
    w = trapezoid_weights(vals.shape[1], curves_a[0].spacing)

    def measure(diff):
        if statistic is Statistic.KS:
            return np.abs(diff).max(axis=-1)
        return np.abs(diff) @ w

    observed = measure(vals[:r1].mean(axis=0) - vals[r1:].mean(axis=0))
    if statistic is Statistic.KS:
        observed *= scale
    first, second = _resample_counts(np.random.default_rng(seed), B, r, split=r1)
    thetas = scale * measure(first @ vals / r1 - second @ vals / r2)
    q = quantile_hat(thetas, alpha)
    observed = float(observed)
    return TwoSampleResult(observed, q, float(np.mean(thetas > observed)), observed > q)


def pd_confidence_band(dgm: PersistenceDiagram, c: float) -> tuple[APF, APF]:
    """Lower and upper APFs over all diagrams within bottleneck radius ``c``.

    Each point with lifetime above ``2c`` may move anywhere in the square of
    half-side ``c`` around it (births stay non-negative).  The upper APF puts
    the largest attainable lifetime at the smallest attainable meanage, the
    lower APF the smallest lifetime at the largest meanage.  Points with
    lifetime at most ``2c`` are treated as noise and dropped.
    """
    if not c >= 0:
        raise APFError("c must be non-negative")
    b, d, mult = dgm.birth, dgm.death, dgm.mult
    keep = (d - b) > 2 * c
    b, d, mult = b[keep], d[keep], mult[keep]
    b_lo = np.maximum(b - c, 0.0)
    upper = APF.from_jumps((b_lo + d - c) / 2, (d + c - b_lo) * mult)
    lower = APF.from_jumps((b + d) / 2 + c, np.maximum(d - b - 2 * c, 0.0) * mult)
    return lower, upper


def _diagram(points: np.ndarray, k: int) -> PersistenceDiagram:
    return ph_pointcloud(alpha_filtration(delaunay(points)), k, DETERMINISTIC)


def bottleneck_radius(points, k: int, B: int = 200, alpha: float = 0.05,
                      seed: int = 0) -> float:
    """Bootstrap estimate of a bottleneck confidence radius for the diagram.

    Points are resampled with replacement; repeated draws are jittered by
    ``1e-9`` times the diameter of the cloud so that the triangulation stays
    defined.
    """
    pts = as_points(points)
    n = len(pts)
    if B < 1:
        raise APFError("B must be positive")
    base = _diagram(pts, k)
    span = np.ptp(pts, axis=0)
    jitter = 1e-9 * float(np.hypot(*span))
    rng = np.random.default_rng(seed)
    dists = np.empty(B)
    for i in range(B):
        idx = rng.integers(0, n, size=n)
        offsets = rng.uniform(-jitter, jitter, size=(n, 2))
        _, first = np.unique(idx, return_index=True)
        offsets[first] = 0.0
        dists[i] = bottleneck(base, _diagram(pts[idx] + offsets, k))
    return quantile_hat(dists, alpha)
