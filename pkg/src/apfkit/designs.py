"""Named point-pattern designs and the points-to-curve pipeline used by the
simulation studies, the CLI and the acceptance tests."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .apf import DEFAULT_N_GRID, CurveSample, apf_from_diagram, discretize
from .errors import AllCollinear
from .geometry import alpha_filtration, delaunay
from .persistence import DETERMINISTIC, PersistenceDiagram, TieBreak, ph_pointcloud
from .pointprocess import (CircleSpec, UNIT_SQUARE, baddeley_silverman, default_cluster,
                           matern_hardcore, poisson, sample_on_circles, truncated_normal_noise)


def circles(*specs) -> list[CircleSpec]:
    return [CircleSpec((float(x), float(y)), float(r)) for x, y, r in specs]


#: Three radius-0.5 circles of the introductory toy example.
THREE_CIRCLES = circles((-1, -1, 0.5), (1, -1, 0.5), (0, 1, 0.5))
#: Same centres with radius 0.25 (mean-band study).
THREE_SMALL_CIRCLES = circles((-1, -1, 0.25), (1, -1, 0.25), (0, 1, 0.25))
#: Two circles of different size (diagram confidence-band study).
TWO_LOOPS = circles((-1.5, 0, 1), (1.5, 0, 0.8))

UNIT_CIRCLE = circles((0, 0, 1))


def circle_design(shape: list[CircleSpec], sigma: float, n: int = 100):
    def draw(rng):
        return sample_on_circles(n, shape, sigma, rng)
    return draw


def gaussian_mixture(n: int = 100, sigma: float = 0.2, shift=(1.5, 0.5)):
    """Half of the points from N2(sigma), the rest shifted by ``shift``."""
    def draw(rng):
        pts = truncated_normal_noise(rng, n, sigma)
        moved = rng.random(n) >= 0.5
        pts[moved] += np.asarray(shift, dtype=float)
        return pts
    return draw


#: Outlier study: inliers on the unit circle, three outlier families.
OUTLIER_DESIGNS: dict[str, Callable] = {
    "unit_circle": circle_design(UNIT_CIRCLE, 0.1),
    "gaussian_mixture": gaussian_mixture(),
    "two_circles": circle_design(circles((-1, -1, 1), (1, 1, 0.5)), 0.1),
    "circle_0.7": circle_design(circles((0, 0, 0.7)), 0.1),
}

#: Clustering study groups.
CLUSTER_DESIGNS: dict[str, Callable] = {
    "unit_circle": circle_design(UNIT_CIRCLE, 0.1),
    "two_small_circles": circle_design(circles((-1, -1, 0.5), (1, 1, 0.5)), 0.1),
    "circle_0.8": circle_design(circles((0, 0, 0.8)), 0.1),
}

#: Classification study: each group's inlier and outlier laws.
CLASSIFY_DESIGNS: dict[str, Callable] = {
    "unit_circle": circle_design(UNIT_CIRCLE, 0.1),
    "unit_circle_plus": circle_design(circles((0, 0, 1), (1.5, 1.5, 0.5)), 0.1),
    "circle_0.8": circle_design(circles((0, 0, 0.8)), 0.1),
    "circle_0.8_plus": circle_design(circles((0, 0, 0.8), (1.5, 1.5, 0.5)), 0.1),
}

#: Two-sample study: noisy circles of radius 1 and 0.95.
TWO_SAMPLE_DESIGNS: dict[str, Callable] = {
    "circle_1": circle_design(UNIT_CIRCLE, 0.2),
    "circle_0.95": circle_design(circles((0, 0, 0.95)), 0.2),
}

def spatial_model(name: str, rho: float = 100.0):
    """Sampler ``rng -> points`` for a model on the unit square with about ``rho`` points."""
    if name == "csr":
        return lambda rng: poisson(rho, UNIT_SQUARE, rng)
    if name == "baddeley_silverman":
        cell = float(1 / np.sqrt(rho))
        return lambda rng: baddeley_silverman(UNIT_SQUARE, rng, cell=cell)
    if name == "matern_cluster":
        return lambda rng: default_cluster(rho, UNIT_SQUARE, rng)
    if name == "matern_cluster_wide":
        return lambda rng: default_cluster(rho, UNIT_SQUARE, rng, R=0.5)
    if name == "matern_hardcore":
        # Proposal intensity chosen so that about rho points survive.
        return lambda rng: matern_hardcore(2.0 * rho, 0.5 / np.sqrt(rho), UNIT_SQUARE, rng)
    raise KeyError(f"unknown spatial model {name!r}")


SPATIAL_MODELS = ("csr", "baddeley_silverman", "matern_cluster", "matern_cluster_wide",
                  "matern_hardcore")


def diagram_of(points, k: int, tiebreak: TieBreak = DETERMINISTIC) -> PersistenceDiagram:
    """Diagram of dimension ``k`` of the alpha filtration of ``points``.

    Fewer than two points give an empty diagram.  Collinear points have no
    triangles; their components merge along the line at half the gaps.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        return PersistenceDiagram.empty(k)
    try:
        filt = alpha_filtration(delaunay(pts))
    except AllCollinear:
        if k == 1:
            return PersistenceDiagram.empty(1)
        s = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
        gaps = np.hypot(*(s[1:] - s[:-1]).T) / 2
        return PersistenceDiagram.from_pairs(0, [(0.0, g) for g in gaps])
    return ph_pointcloud(filt, k, tiebreak)


def curve_of(points, k: int, window, n_grid: int = DEFAULT_N_GRID) -> CurveSample:
    """Points to discretized APF of dimension ``k``."""
    return discretize(apf_from_diagram(diagram_of(points, k)), window, n_grid)


def curves_of(points, ks, window, n_grid: int = DEFAULT_N_GRID) -> dict[int, CurveSample]:
    """Discretized APFs for several dimensions from one triangulation."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    try:
        filt = alpha_filtration(delaunay(pts)) if len(pts) >= 3 else None
    except AllCollinear:
        filt = None
    if filt is None:
        return {k: curve_of(pts, k, window, n_grid) for k in ks}
    return {k: discretize(apf_from_diagram(ph_pointcloud(filt, k)), window, n_grid) for k in ks}
