"""Extreme rank ordering and global rank envelope tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .apf import CurveSample, like, stack
from .errors import APFError, BadRank, LengthMismatch

#: Grid size for envelope tests.  Every extra grid point gives a curve one
#: more chance to be extreme, so fine grids drive many null ranks down to 1.
ENVELOPE_N_GRID = 100


@dataclass(frozen=True, eq=False)
class EnvelopeResult:
    """Outcome of an extreme rank envelope test.

    ``statistic`` is the conservative rank p-value
    ``#{i : R_i <= R_0} / (r + 1)`` and the test rejects exactly when it is at
    most ``alpha``; this is the same event as the observed curve leaving the
    ``l_alpha`` envelope.  ``statistic_strict`` counts only ``R_i < R_0``.

    For combined tests ``lower`` and ``upper`` are tuples with one band per
    statistic.
    """

    l_alpha: int
    lower: CurveSample | tuple[CurveSample, ...]
    upper: CurveSample | tuple[CurveSample, ...]
    ranks: np.ndarray
    statistic: float
    statistic_strict: float
    alpha: float
    reject: bool
    no_valid_l: bool = False


def _max_rank(n_curves: int) -> int:
    # l runs over 1..floor(r/2) for r + 1 curves; keep l = 1 available for r = 1.
    return max(1, (n_curves - 1) // 2)


def _bounding(values: np.ndarray, l: int) -> tuple[np.ndarray, np.ndarray]:
    s = np.sort(values, axis=0)
    return s[l - 1], s[-l]


def bounding_curves(curves: Sequence[CurveSample], l: int) -> tuple[CurveSample, CurveSample]:
    """Pointwise ``l``-th smallest and ``l``-th largest values."""
    vals = stack(curves)
    if not 1 <= l <= _max_rank(len(curves)):
        raise BadRank(f"l must lie in 1..{_max_rank(len(curves))}, got {l}")
    lo, hi = _bounding(vals, l)
    return like(curves[0], lo), like(curves[0], hi)


def _extreme_ranks(values: np.ndarray) -> np.ndarray:
    n = values.shape[0]
    if n < 2:
        raise APFError("extreme ranks need at least two curves")
    # A_i lies inside the l-th band at a grid point iff at least l curves are
    # <= A_i there and at least l curves are >= A_i there.
    n_le = rankdata(values, method="max", axis=0)
    n_ge = n + 1 - rankdata(values, method="min", axis=0)
    depth = np.minimum(n_le, n_ge).min(axis=1)
    return np.minimum(depth, _max_rank(n)).astype(np.int64)


def extreme_ranks(curves: Sequence[CurveSample]) -> np.ndarray:
    """Extreme rank ``R_i`` of every curve with respect to the whole set."""
    return _extreme_ranks(stack(curves))


def _test(values: np.ndarray, alpha: float):
    if not 0 < alpha < 1:
        raise APFError("alpha must lie in (0, 1)")
    ranks = _extreme_ranks(values)
    n = len(ranks)
    L = _max_rank(n)
    counts = np.array([np.count_nonzero(ranks < l) for l in range(1, L + 1)])
    ok = np.nonzero(counts / n <= alpha)[0]
    no_valid_l = len(ok) == 0
    l_alpha = int(ok.max()) + 1 if len(ok) else 1
    r0 = ranks[0]
    statistic = np.count_nonzero(ranks <= r0) / n
    strict = np.count_nonzero(ranks < r0) / n
    lo, hi = _bounding(values, l_alpha)
    reject = bool(r0 < l_alpha)
    return l_alpha, lo, hi, ranks, statistic, strict, reject, no_valid_l


def rank_envelope_test(observed: CurveSample, simulated: Sequence[CurveSample],
                       alpha: float = 0.05) -> EnvelopeResult:
    """Conservative global extreme rank envelope test.

    ``observed`` is ``A_0``; ``simulated`` holds ``A_1..A_r`` drawn under the
    null model.  At least ``2/alpha - 1`` simulations are advisable.
    """
    values = stack([observed, *simulated])
    l_alpha, lo, hi, ranks, stat, strict, reject, nv = _test(values, alpha)
    return EnvelopeResult(l_alpha, like(observed, lo), like(observed, hi), ranks,
                          stat, strict, alpha, reject, nv)


def combine_envelopes(curve_lists: Sequence[tuple[CurveSample, Sequence[CurveSample]]],
                      alpha: float = 0.05) -> EnvelopeResult:
    """Joint test over several summary statistics.

    Each entry is ``(observed, simulated)`` for one statistic; for every
    subject the curves are concatenated into one long vector and the rank
    envelope test is applied to the result.
    """
    if not curve_lists:
        raise APFError("nothing to combine")
    r = len(curve_lists[0][1])
    blocks = []
    for observed, simulated in curve_lists:
        if len(simulated) != r:
            raise LengthMismatch("every statistic needs the same number of simulations")
        blocks.append(stack([observed, *simulated]))
    values = np.hstack(blocks)
    l_alpha, lo, hi, ranks, stat, strict, reject, nv = _test(values, alpha)
    lowers, uppers, start = [], [], 0
    for (observed, _), block in zip(curve_lists, blocks):
        stop = start + block.shape[1]
        lowers.append(like(observed, lo[start:stop]))
        uppers.append(like(observed, hi[start:stop]))
        start = stop
    return EnvelopeResult(l_alpha, tuple(lowers), tuple(uppers), ranks, stat, strict,
                          alpha, reject, nv)
