"""Accumulated persistence functions and their grid discretization."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import APFError, GridMismatch
from .persistence import PersistenceDiagram

#: Grid density used when none is given (2500 equidistant evaluation points).
DEFAULT_N_GRID = 2500


@dataclass(frozen=True, eq=False)
class RRPD:
    """Rotated and rescaled diagram.

    The originating births and deaths are kept so that converting back to a
    diagram is exact; meanage and lifetime are derived from them.
    """

    birth: np.ndarray
    death: np.ndarray
    mult: np.ndarray

    @classmethod
    def from_meanage_lifetime(cls, meanage, lifetime, mult=None) -> "RRPD":
        m = np.asarray(meanage, dtype=float).reshape(-1)
        l = np.asarray(lifetime, dtype=float).reshape(-1)
        c = np.ones(len(m), dtype=np.int64) if mult is None else np.asarray(mult, dtype=np.int64)
        if np.any(l <= 0) or np.any(m < l / 2) or np.any(c < 1):
            raise APFError("RRPD needs lifetime > 0, meanage >= lifetime/2, mult >= 1")
        return cls(m - l / 2, m + l / 2, c)

    @property
    def meanage(self) -> np.ndarray:
        return (self.birth + self.death) / 2

    @property
    def lifetime(self) -> np.ndarray:
        return self.death - self.birth

    def __len__(self):
        return len(self.birth)

    def to_diagram(self, dim: int) -> PersistenceDiagram:
        return PersistenceDiagram.from_pairs(dim, zip(self.birth, self.death, self.mult))


def to_rrpd(dgm: PersistenceDiagram) -> RRPD:
    """``(b, d, c) -> ((b + d)/2, d - b, c)``."""
    return RRPD(dgm.birth.copy(), dgm.death.copy(), dgm.mult.copy())


@dataclass(frozen=True, eq=False)
class APF:
    """Right-continuous step function ``m -> sum of sizes of jumps at <= m``.

    ``locations`` are strictly increasing; coincident meanages are merged.
    """

    locations: np.ndarray
    sizes: np.ndarray

    @property
    def total(self) -> float:
        return float(self.sizes.sum())

    def __call__(self, m):
        return apf_eval(self, m)

    @classmethod
    def from_jumps(cls, locations, sizes) -> "APF":
        loc = np.asarray(locations, dtype=float).reshape(-1)
        size = np.asarray(sizes, dtype=float).reshape(-1)
        if len(loc) == 0:
            return cls(np.empty(0), np.empty(0))
        uniq, inv = np.unique(loc, return_inverse=True)
        merged = np.zeros(len(uniq))
        np.add.at(merged, inv.ravel(), size)
        return cls(uniq, merged)


def apf_from_rrpd(rrpd: RRPD, allocated_time: float | None = None) -> APF:
    """Jumps of size ``c * l`` at each meanage ``m``.

    With ``allocated_time=T`` features with ``m + l/2 > T`` (those still alive
    when the filtration is stopped at ``T``) are left out.
    """
    m = rrpd.meanage
    size = rrpd.mult * rrpd.lifetime
    if allocated_time is not None:
        if allocated_time <= 0:
            raise APFError("allocated time must be positive")
        keep = m + rrpd.lifetime / 2 <= allocated_time
        m, size = m[keep], size[keep]
    return APF.from_jumps(m, size)


def apf_from_diagram(dgm: PersistenceDiagram, allocated_time: float | None = None) -> APF:
    return apf_from_rrpd(to_rrpd(dgm), allocated_time)


def apf_eval(apf: APF, m):
    """Evaluate at scalar or array ``m``; includes jumps located exactly at ``m``."""
    cum = np.concatenate([[0.0], np.cumsum(apf.sizes)])
    idx = np.searchsorted(apf.locations, m, side="right")
    out = cum[idx]
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class CurveSample:
    """Values of a function on ``n_grid`` equidistant points spanning ``window``."""

    window: tuple[float, float]
    values: np.ndarray

    def __post_init__(self):
        t1, t2 = (float(t) for t in self.window)
        object.__setattr__(self, "window", (t1, t2))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).reshape(-1))
        if not t1 < t2:
            raise APFError(f"window must satisfy T1 < T2, got {self.window}")
        if len(self.values) < 2:
            raise APFError("a curve sample needs at least two grid points")

    @property
    def n_grid(self) -> int:
        return len(self.values)

    @property
    def grid(self) -> np.ndarray:
        return grid(self.window, self.n_grid)

    @property
    def spacing(self) -> float:
        return (self.window[1] - self.window[0]) / (self.n_grid - 1)

    def same_grid(self, other: "CurveSample") -> bool:
        return tuple(self.window) == tuple(other.window) and self.n_grid == other.n_grid

    def __eq__(self, other):
        if not isinstance(other, CurveSample):
            return NotImplemented
        return self.same_grid(other) and np.array_equal(self.values, other.values)


def grid(window, n_grid: int) -> np.ndarray:
    return np.linspace(window[0], window[1], n_grid)


def discretize(apf: APF, window, n_grid: int = DEFAULT_N_GRID) -> CurveSample:
    t1, t2 = float(window[0]), float(window[1])
    if n_grid < 2:
        raise APFError("n_grid must be at least 2")
    if not t1 < t2:
        raise APFError(f"window must satisfy T1 < T2, got {window}")
    return CurveSample((t1, t2), np.asarray(apf_eval(apf, grid((t1, t2), n_grid)), dtype=float))


class Norm(str, Enum):
    SUP = "sup"
    L1 = "l1"
    L2 = "l2"


def trapezoid_weights(n_grid: int, spacing: float) -> np.ndarray:
    w = np.full(n_grid, spacing)
    w[0] = w[-1] = spacing / 2
    return w


def curve_distance(a: CurveSample, b: CurveSample, norm: Norm | str = Norm.SUP) -> float:
    """Sup, L1 or L2 distance on the shared grid (trapezoidal rule for integrals)."""
    if not a.same_grid(b):
        raise GridMismatch()
    norm = Norm(norm)
    diff = np.abs(a.values - b.values)
    if norm is Norm.SUP:
        return float(diff.max())
    w = trapezoid_weights(a.n_grid, a.spacing)
    if norm is Norm.L1:
        return float(w @ diff)
    return float(np.sqrt(w @ diff ** 2))


def stack(curves: Sequence[CurveSample]) -> np.ndarray:
    """``(r, n_grid)`` array of curve values; all curves must share one grid."""
    if len(curves) == 0:
        raise APFError("need at least one curve")
    first = curves[0]
    for c in curves[1:]:
        if not first.same_grid(c):
            raise GridMismatch()
    return np.vstack([c.values for c in curves])


def like(template: CurveSample, values) -> CurveSample:
    """A curve on the same grid as ``template``."""
    return CurveSample(template.window, np.asarray(values, dtype=float))
