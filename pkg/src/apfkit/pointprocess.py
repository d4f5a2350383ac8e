"""Seeded simulators for planar point patterns.

Every generator takes a ``seed`` (anything accepted by
``numpy.random.default_rng``, including a ``Generator``) and returns an
``(n, 2)`` array.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import APFError

#: Matérn cluster defaults: parent intensity and disc radius.
CLUSTER_KAPPA = 20.0
CLUSTER_RADIUS = 0.05


@dataclass(frozen=True)
class Window:
    x0: float = 0.0
    x1: float = 1.0
    y0: float = 0.0
    y1: float = 1.0

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise APFError("window must have positive area")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        return ((pts[:, 0] >= self.x0) & (pts[:, 0] <= self.x1)
                & (pts[:, 1] >= self.y0) & (pts[:, 1] <= self.y1))

    def uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random((n, 2))
        return np.column_stack([self.x0 + (self.x1 - self.x0) * u[:, 0],
                                self.y0 + (self.y1 - self.y0) * u[:, 1]])


UNIT_SQUARE = Window()


@dataclass(frozen=True)
class CircleSpec:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise APFError("circle radius must be positive")


def truncated_normal_noise(rng: np.random.Generator, n: int, sigma: float) -> np.ndarray:
    """Bivariate N(0, sigma^2 I) offsets conditioned on the square [-10 sigma, 10 sigma]^2."""
    if sigma == 0:
        return np.zeros((n, 2))
    out = rng.normal(0.0, sigma, size=(n, 2))
    bad = np.any(np.abs(out) > 10 * sigma, axis=1)
    while bad.any():
        out[bad] = rng.normal(0.0, sigma, size=(int(bad.sum()), 2))
        bad = np.any(np.abs(out) > 10 * sigma, axis=1)
    return out


def sample_on_circles(n: int, circles: Sequence[CircleSpec], sigma: float = 0.0,
                      seed=None) -> np.ndarray:
    """``n`` IID points uniform on the union of circles, plus truncated normal noise.

    A point picks its circle with probability proportional to circumference.
    """
    if n < 0 or sigma < 0:
        raise APFError("n and sigma must be non-negative")
    if not circles:
        raise APFError("need at least one circle")
    rng = np.random.default_rng(seed)
    radii = np.array([c.radius for c in circles], dtype=float)
    centres = np.array([c.center for c in circles], dtype=float)
    which = rng.choice(len(circles), size=n, p=radii / radii.sum())
    theta = rng.uniform(0.0, 2 * np.pi, size=n)
    pts = centres[which] + radii[which, None] * np.column_stack([np.cos(theta), np.sin(theta)])
    return pts + truncated_normal_noise(rng, n, sigma)


def poisson(rho: float, window: Window = UNIT_SQUARE, seed=None) -> np.ndarray:
    """Homogeneous Poisson process with ``rho`` expected points per unit area."""
    if not rho > 0:
        raise APFError("rho must be positive")
    rng = np.random.default_rng(seed)
    return window.uniform(rng, rng.poisson(rho * window.area))


def matern_cluster(kappa: float, R: float, mu: float, window: Window = UNIT_SQUARE,
                   seed=None) -> np.ndarray:
    """Matérn cluster process; only offspring falling in ``window`` are kept.

    Parents are simulated on the window dilated by ``R`` so that clusters
    centred just outside still contribute.
    """
    if not (kappa > 0 and R > 0 and mu >= 0):
        raise APFError("kappa and R must be positive, mu non-negative")
    rng = np.random.default_rng(seed)
    big = Window(window.x0 - R, window.x1 + R, window.y0 - R, window.y1 + R)
    parents = big.uniform(rng, rng.poisson(kappa * big.area))
    sizes = rng.poisson(mu, size=len(parents))
    total = int(sizes.sum())
    # Uniform in the disc: radius R * sqrt(U).
    rad = R * np.sqrt(rng.random(total))
    ang = rng.uniform(0.0, 2 * np.pi, size=total)
    pts = np.repeat(parents, sizes, axis=0) + rad[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])
    return pts[window.contains(pts)] if total else np.empty((0, 2))


#: Cell counts of the Baddeley-Silverman process and their probabilities.
BS_COUNTS = np.array([0, 1, 10])
BS_PROBS = np.array([1 / 10, 8 / 9, 1 / 90])


def baddeley_silverman(window: Window = UNIT_SQUARE, seed=None, cell: float = 1.0) -> np.ndarray:
    """Baddeley-Silverman cell process on a grid of ``cell x cell`` squares.

    Each cell independently receives 0, 1 or 10 uniform points, so counts
    have mean and variance 1 per cell; ``cell = 0.1`` on the unit square gives
    100 expected points.  Cells overhanging the window are clipped.
    """
    rng = np.random.default_rng(seed)
    xs = np.arange(window.x0, window.x1, cell)
    ys = np.arange(window.y0, window.y1, cell)
    corners = np.array([(x, y) for y in ys for x in xs]).reshape(-1, 2)
    counts = rng.choice(BS_COUNTS, size=len(corners), p=BS_PROBS)
    pts = np.repeat(corners, counts, axis=0) + cell * rng.random((int(counts.sum()), 2))
    return pts[window.contains(pts)]


def matern_hardcore(beta: float, h: float, window: Window = UNIT_SQUARE, seed=None) -> np.ndarray:
    """Matérn type II hard-core process.

    Proposals form a Poisson(beta) process with IID uniform marks; a proposal
    survives when no proposal with a smaller mark lies within distance ``h``.
    """
    if not (beta > 0 and h > 0):
        raise APFError("beta and h must be positive")
    rng = np.random.default_rng(seed)
    pts = window.uniform(rng, rng.poisson(beta * window.area))
    marks = rng.random(len(pts))
    if len(pts) < 2:
        return pts
    keep = np.ones(len(pts), dtype=bool)
    for i, j in cKDTree(pts).query_pairs(h, output_type="ndarray"):
        if marks[i] < marks[j]:
            keep[j] = False
        else:
            keep[i] = False
    return pts[keep]


def default_cluster(rho: float, window: Window = UNIT_SQUARE, seed=None,
                    kappa: float = CLUSTER_KAPPA, R: float = CLUSTER_RADIUS) -> np.ndarray:
    """Matérn cluster with ``rho`` expected points per unit area."""
    return matern_cluster(kappa, R, rho / kappa, window, seed)
