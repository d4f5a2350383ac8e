"""Delaunay triangulation and alpha-complex filtration of planar point sets."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import AllCollinear, DuplicatePoints, GeometryError
from .predicates import incircle_sos, orient2d


@dataclass(frozen=True, eq=False)
class Triangulation:
    """A planar triangulation.

    ``triangles`` holds counterclockwise vertex triples, ``edges`` the sorted
    vertex pairs of every edge (``i < j``), in lexicographic order.
    """

    points: np.ndarray
    triangles: np.ndarray
    edges: np.ndarray

    @property
    def n_points(self) -> int:
        return len(self.points)

    @cached_property
    def hull_edges(self) -> np.ndarray:
        """Edges incident to exactly one triangle (all edges if there are none)."""
        if len(self.triangles) == 0:
            return self.edges
        t = self.triangles
        e = np.sort(np.concatenate([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]]), axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        return uniq[counts == 1]


def as_points(points) -> np.ndarray:
    """Validate and convert an ``(n, 2)`` array-like of coordinates."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or (len(pts) and pts.shape[1] != 2):
        if pts.size == 0:
            return pts.reshape(0, 2)
        raise GeometryError(f"expected an (n, 2) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise GeometryError("point coordinates must be finite")
    return pts


def _check_duplicates(pts: np.ndarray) -> np.ndarray:
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    s = pts[order]
    same = np.all(s[1:] == s[:-1], axis=1)
    if same.any():
        k = int(np.argmax(same))
        i, j = sorted((int(order[k]), int(order[k + 1])))
        raise DuplicatePoints(i, j)
    return order


def delaunay(points) -> Triangulation:
    """Delaunay triangulation with exact predicates.

    Points are swept in lexicographic order; each new point is joined to the
    hull edges it sees and the new edges are legalized by Lawson flips.
    Cocircular configurations are resolved by the index-keyed symbolic
    perturbation of :func:`incircle_sos`, which makes the output unique.

    Raises
    ------
    DuplicatePoints
        If two input points coincide.
    AllCollinear
        If three or more points are given and all are collinear.
    """
    pts = as_points(points)
    n = len(pts)
    if n < 3:
        if n == 2:
            _check_duplicates(pts)
            edges = np.array([[0, 1]], dtype=np.int64)
        else:
            edges = np.empty((0, 2), dtype=np.int64)
        return Triangulation(pts, np.empty((0, 3), dtype=np.int64), edges)

    order = [int(i) for i in _check_duplicates(pts)]
    P = [(float(x), float(y)) for x, y in pts]
    tris = _sweep(P, order)
    tri_arr = np.array(tris, dtype=np.int64).reshape(-1, 3)
    e = np.sort(np.concatenate([tri_arr[:, [0, 1]], tri_arr[:, [1, 2]], tri_arr[:, [2, 0]]]), axis=1)
    edges = np.unique(e, axis=0)
    return Triangulation(pts, tri_arr, edges)


def _sweep(P, order):
    tris = []        # triangle id -> (a, b, c) counterclockwise
    edge_tri = {}    # directed edge (u, v) -> id of the triangle containing u->v
    free = []

    def add(a, b, c):
        if free:
            t = free.pop()
            tris[t] = (a, b, c)
        else:
            t = len(tris)
            tris.append((a, b, c))
        edge_tri[(a, b)] = t
        edge_tri[(b, c)] = t
        edge_tri[(c, a)] = t
        return t

    def legalize(stack):
        while stack:
            u, v = stack.pop()
            t1 = edge_tri.get((u, v))
            t2 = edge_tri.get((v, u))
            if t1 is None or t2 is None:
                continue
            w = _third(tris[t1], u, v)
            x = _third(tris[t2], v, u)
            if incircle_sos(P, u, v, w, x) <= 0:
                continue
            for a, b in ((u, v), (v, w), (w, u), (v, u), (u, x), (x, v)):
                del edge_tri[(a, b)]
            free.append(t1)
            free.append(t2)
            add(u, x, w)
            add(x, v, w)
            stack.extend(((u, x), (x, v), (v, w), (w, u)))

    # Initial run of collinear points followed by the first point off their line.
    p0, p1 = order[0], order[1]
    k = 2
    while k < len(order):
        pk = order[k]
        if orient2d(*P[p0], *P[p1], *P[pk]) != 0:
            break
        k += 1
    else:
        raise AllCollinear()
    apex = order[k]
    chain = order[:k]
    if orient2d(*P[p0], *P[p1], *P[apex]) > 0:
        for a, b in zip(chain, chain[1:]):
            add(a, b, apex)
        hull = chain + [apex]
    else:
        for a, b in zip(chain, chain[1:]):
            add(b, a, apex)
        hull = [chain[0], apex] + chain[:0:-1]
    stack = [(q, apex) for q in chain[1:-1]]
    legalize(stack)

    last = apex
    for p in order[k + 1:]:
        px, py = P[p]
        h = len(hull)
        pos = hull.index(last)

        def visible(j):
            a = hull[j % h]
            b = hull[(j + 1) % h]
            return orient2d(*P[a], *P[b], px, py) < 0

        hi = pos
        while visible(hi):
            hi += 1
        lo = pos - 1
        while visible(lo):
            lo -= 1
        # Visible hull edges have indices lo+1 .. hi-1 (mod h).
        if hi - lo - 1 <= 0:
            raise GeometryError("sweep invariant violated: no visible hull edge")
        stack = []
        for j in range(lo + 1, hi):
            a = hull[j % h]
            b = hull[(j + 1) % h]
            add(b, a, p)
            stack.append((a, b))
        first = (lo + 1) % h
        keep = [hull[(hi + i) % h] for i in range(h - (hi - lo - 1) + 1)]
        # keep runs from hull[hi] around to hull[lo+1]; p closes the gap.
        assert keep[-1] == hull[first]
        hull = keep + [p]
        legalize(stack)
        last = p

    dead = set(free)
    return [t for i, t in enumerate(tris) if i not in dead]


def _third(tri, u, v):
    a, b, c = tri
    if a != u and a != v:
        return a
    if b != u and b != v:
        return b
    return c


@dataclass(frozen=True, eq=False)
class Filtration:
    """Simplices of a 2-complex with their entry values.

    Vertices are ``0..n_vertices-1``.  ``triangle_edges[t]`` lists the edge ids
    forming the boundary of triangle ``t``.
    """

    vertex_values: np.ndarray
    edges: np.ndarray
    edge_values: np.ndarray
    triangles: np.ndarray
    triangle_values: np.ndarray
    triangle_edges: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_values)

    @cached_property
    def simplices(self) -> list[tuple[int, tuple[int, ...], float]]:
        """All simplices as ``(dim, vertices, value)``; vertices, edges, triangles."""
        out = [(0, (i,), float(v)) for i, v in enumerate(self.vertex_values)]
        out += [(1, (int(a), int(b)), float(v)) for (a, b), v in zip(self.edges, self.edge_values)]
        out += [(2, tuple(int(x) for x in t), float(v))
                for t, v in zip(self.triangles, self.triangle_values)]
        return out

    @cached_property
    def order(self) -> np.ndarray:
        """Permutation of :attr:`simplices` sorted by (value, dim, index)."""
        vals = np.concatenate([self.vertex_values, self.edge_values, self.triangle_values])
        dims = np.concatenate([np.zeros(self.n_vertices), np.ones(len(self.edges)),
                               np.full(len(self.triangles), 2)])
        return np.lexsort((np.arange(len(vals)), dims, vals))


def _triangle_edge_ids(triangles: np.ndarray, edges: np.ndarray, n: int) -> np.ndarray:
    keys = edges[:, 0] * n + edges[:, 1]
    t = triangles
    sides = np.stack([np.sort(t[:, [1, 2]], axis=1),
                      np.sort(t[:, [2, 0]], axis=1),
                      np.sort(t[:, [0, 1]], axis=1)], axis=1)
    skeys = sides[..., 0] * n + sides[..., 1]
    return np.searchsorted(keys, skeys)


def _local_scale(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    # Largest coordinate offset per triangle; dividing by it keeps products of
    # tiny (even subnormal) offsets from underflowing.
    s = np.abs(np.concatenate([b - a, c - a], axis=1)).max(axis=1)
    return np.where(s > 0, s, 1.0)


def circumradius(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Circumradii of triangles given by corner arrays of shape ``(m, 2)``."""
    s = _local_scale(a, b, c)[:, None]
    u = (b - a) / s
    v = (c - a) / s
    w = (c - b) / s
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    with np.errstate(divide="ignore", over="ignore"):
        r = (np.hypot(u[:, 0], u[:, 1]) * np.hypot(v[:, 0], v[:, 1])
             * np.hypot(w[:, 0], w[:, 1])) / (2.0 * np.abs(cross))
    return r * s[:, 0]


def alpha_filtration(tri: Triangulation) -> Filtration:
    """Alpha-complex filtration values on a Delaunay triangulation.

    Vertices enter at 0 and triangles at their circumradius.  A Gabriel edge
    (empty diametral disc) enters at half its length; any other edge enters
    with the smaller circumradius of its incident triangles.  Triangle values
    are lifted to the maximum of their edge values so that faces never enter
    after cofaces, which guards against one-ulp rounding at right angles.
    """
    pts = tri.points
    n = len(pts)
    edges = tri.edges
    e_len = np.hypot(*(pts[edges[:, 1]] - pts[edges[:, 0]]).T) if len(edges) else np.empty(0)
    edge_vals = e_len / 2.0
    t = tri.triangles
    if len(t) == 0:
        return Filtration(np.zeros(n), edges, edge_vals, t, np.empty(0),
                          np.empty((0, 3), dtype=np.int64))

    A, B, C = pts[t[:, 0]], pts[t[:, 1]], pts[t[:, 2]]
    R = circumradius(A, B, C)
    tedges = _triangle_edge_ids(t, edges, n)

    # Opposite apex of each side: side k of triangle (a, b, c) is opposite corner k.
    scale = _local_scale(A, B, C)[:, None]
    corners = (np.zeros_like(A), (B - A) / scale, (C - A) / scale)
    ends = ((corners[1], corners[2]), (corners[2], corners[0]), (corners[0], corners[1]))
    non_gabriel = np.zeros(len(edges), dtype=bool)
    min_r = np.full(len(edges), np.inf)
    for k in range(3):
        p = corners[k]
        e0, e1 = ends[k]
        dot = np.einsum("ij,ij->i", e0 - p, e1 - p)
        np.logical_or.at(non_gabriel, tedges[:, k], dot < 0)
        np.minimum.at(min_r, tedges[:, k], R)
    edge_vals = np.where(non_gabriel, min_r, edge_vals)
    tri_vals = np.maximum(R, edge_vals[tedges].max(axis=1))
    return Filtration(np.zeros(n), edges, edge_vals, t, tri_vals, tedges)
