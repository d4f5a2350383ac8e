"""Persistence diagrams of alpha filtrations and height-filtered graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import APFError
from .geometry import Filtration


@dataclass(frozen=True)
class Seeded:
    """Break elder-rule ties uniformly at random from ``seed``."""

    seed: int


class _Deterministic:
    def __repr__(self):
        return "DETERMINISTIC"


#: Elder-rule ties keep the component whose oldest vertex has the smallest index.
DETERMINISTIC = _Deterministic()

TieBreak = Union[_Deterministic, Seeded]


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Finite persistence diagram of homology dimension ``dim``.

    Points are stored sorted by ``(birth, death)`` with exact duplicates merged
    into a multiplicity.  Zero-persistence pairs and infinite classes are never
    stored.
    """

    dim: int
    birth: np.ndarray
    death: np.ndarray
    mult: np.ndarray

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable) -> "PersistenceDiagram":
        """Build from ``(b, d)`` or ``(b, d, c)`` tuples, dropping ``b >= d``."""
        rows = []
        for p in pairs:
            b, d = float(p[0]), float(p[1])
            c = int(p[2]) if len(p) > 2 else 1
            if c < 1:
                raise APFError(f"multiplicity must be positive, got {c}")
            if not (np.isfinite(b) and np.isfinite(d)) or b < 0:
                raise APFError(f"invalid diagram point ({b}, {d})")
            if b < d:
                rows.append((b, d, c))
        if not rows:
            return cls.empty(dim)
        arr = np.array([(b, d) for b, d, _ in rows])
        c = np.array([c for _, _, c in rows], dtype=np.int64)
        uniq, inv = np.unique(arr, axis=0, return_inverse=True)
        mult = np.zeros(len(uniq), dtype=np.int64)
        np.add.at(mult, inv.ravel(), c)
        return cls(dim, uniq[:, 0].copy(), uniq[:, 1].copy(), mult)

    @classmethod
    def empty(cls, dim: int) -> "PersistenceDiagram":
        return cls(dim, np.empty(0), np.empty(0), np.empty(0, dtype=np.int64))

    def __len__(self):
        return len(self.birth)

    @property
    def total_multiplicity(self) -> int:
        return int(self.mult.sum())

    @property
    def lifetime(self) -> np.ndarray:
        return self.death - self.birth

    def points(self) -> list[tuple[float, float, int]]:
        return [(float(b), float(d), int(c)) for b, d, c in zip(self.birth, self.death, self.mult)]

    def expanded(self) -> np.ndarray:
        """``(sum(mult), 2)`` array with each point repeated by its multiplicity."""
        return np.repeat(np.column_stack([self.birth, self.death]), self.mult, axis=0)

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        return (self.dim == other.dim and np.array_equal(self.birth, other.birth)
                and np.array_equal(self.death, other.death)
                and np.array_equal(self.mult, other.mult))

    def __repr__(self):
        return f"PersistenceDiagram(dim={self.dim}, points={self.points()})"


@dataclass
class HeightGraph:
    """Graph whose vertices carry a height; filtered by sub-level sets.

    ``ids`` are arbitrary hashable labels, ``edges`` index into them by
    position.
    """

    heights: np.ndarray
    edges: np.ndarray
    ids: list = field(default_factory=list)
    coords: np.ndarray | None = None

    def __post_init__(self):
        self.heights = np.asarray(self.heights, dtype=float).reshape(-1)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if not self.ids:
            self.ids = list(range(len(self.heights)))
        if not np.all(np.isfinite(self.heights)):
            raise APFError("vertex heights must be finite")
        if len(self.edges) and (self.edges.min() < 0 or self.edges.max() >= len(self.heights)):
            raise APFError("edge endpoint out of range")


def _rng_for(tiebreak: TieBreak):
    if isinstance(tiebreak, Seeded):
        return np.random.default_rng(tiebreak.seed)
    if tiebreak is DETERMINISTIC or tiebreak is None:
        return None
    raise TypeError(f"unknown tie-break policy {tiebreak!r}")


def _elder_rule_pairs(vertex_values, edges, edge_values, tiebreak) -> list[tuple[float, float]]:
    """0-dimensional pairs by union-find over edges in filtration order."""
    rng = _rng_for(tiebreak)
    n = len(vertex_values)
    parent = list(range(n))
    birth = [float(v) for v in vertex_values]
    order = np.lexsort((np.arange(len(edges)), edge_values))
    eu = edges[order, 0].tolist()
    ev = edges[order, 1].tolist()
    vals = edge_values[order].tolist()
    pairs = []

    def find(i):
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    for u, v, t in zip(eu, ev, vals):
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        # Roots are always the oldest vertex of their component.
        bu, bv = birth[ru], birth[rv]
        if bu < bv or (bu == bv and (ru < rv if rng is None else rng.random() < 0.5)):
            old, young = ru, rv
        else:
            old, young = rv, ru
        pairs.append((birth[young], t))
        parent[young] = old
    return pairs


def _column_reduction(columns):
    """Reduce Z/2 boundary columns given as int bitsets; returns {pivot: col_index}."""
    pivots = {}
    low_of = {}
    for j, col in columns:
        while col:
            p = col.bit_length() - 1
            other = pivots.get(p)
            if other is None:
                pivots[p] = col
                low_of[p] = j
                break
            col ^= other
    return low_of


def reduce_boundary(filt: Filtration, clearing: bool = True) -> dict[int, list[tuple[int, int]]]:
    """Persistence pairs of the whole filtration by boundary-matrix reduction.

    Pairs are returned per dimension of the creating simplex as
    ``(birth_position, death_position)`` in the filtration order.  With
    ``clearing`` the columns are reduced from the top dimension down, and any
    column whose simplex was already found as a pivot is skipped (it must
    reduce to zero).  Without it this is the textbook left-to-right reduction.
    """
    simplices = filt.simplices
    order = filt.order
    pos = np.empty(len(order), dtype=np.int64)
    pos[order] = np.arange(len(order))
    nv, ne = filt.n_vertices, len(filt.edges)

    def boundary(idx):
        dim, verts, _ = simplices[idx]
        if dim == 0:
            return 0
        if dim == 1:
            a, b = verts
            return (1 << int(pos[a])) | (1 << int(pos[b]))
        e = filt.triangle_edges[idx - nv - ne]
        return (1 << int(pos[nv + e[0]])) | (1 << int(pos[nv + e[1]])) | (1 << int(pos[nv + e[2]]))

    dims = [simplices[i][0] for i in order]
    pairs = {0: [], 1: []}
    if clearing:
        cleared = set()
        for d in (2, 1):
            cols = [(j, boundary(int(order[j]))) for j in range(len(order))
                    if dims[j] == d and j not in cleared]
            low_of = _column_reduction(cols)
            for p, j in low_of.items():
                pairs[d - 1].append((p, j))
                cleared.add(p)
    else:
        cols = [(j, boundary(int(order[j]))) for j in range(len(order))]
        low_of = _column_reduction(cols)
        for p, j in low_of.items():
            pairs[dims[j] - 1].append((p, j))
    for d in pairs:
        pairs[d].sort()
    return pairs


def position_values(filt: Filtration) -> np.ndarray:
    """Entry value of the simplex at each filtration position."""
    vals = np.concatenate([filt.vertex_values, filt.edge_values, filt.triangle_values])
    return vals[filt.order]


def _loop_pairs(filt: Filtration) -> list[tuple[float, float]]:
    """1-dimensional pairs: reduce only the triangle columns (first twist pass)."""
    if len(filt.triangles) == 0:
        return []
    ne = len(filt.edges)
    e_order = np.lexsort((np.arange(ne), filt.edge_values))
    e_rank = np.empty(ne, dtype=np.int64)
    e_rank[e_order] = np.arange(ne)
    t_order = np.lexsort((np.arange(len(filt.triangles)), filt.triangle_values))
    te = e_rank[filt.triangle_edges[t_order]].tolist()
    cols = [(j, (1 << a) | (1 << b) | (1 << c)) for j, (a, b, c) in enumerate(te)]
    low_of = _column_reduction(cols)
    ev = filt.edge_values[e_order]
    tv = filt.triangle_values[t_order]
    return [(float(ev[p]), float(tv[j])) for p, j in low_of.items()]


def ph_pointcloud(filt: Filtration, k: int, tiebreak: TieBreak = DETERMINISTIC) -> PersistenceDiagram:
    """Persistence diagram of dimension ``k`` (0 or 1) of an alpha filtration.

    Components are tracked with union-find under the elder rule; loops come
    from reducing the triangle boundary columns over Z/2.  The immortal
    component is left out.
    """
    if k == 0:
        pairs = _elder_rule_pairs(filt.vertex_values, filt.edges, filt.edge_values, tiebreak)
    elif k == 1:
        pairs = _loop_pairs(filt)
    else:
        raise ValueError(f"homology dimension must be 0 or 1, got {k}")
    return PersistenceDiagram.from_pairs(k, pairs)


def ph_sublevel(graph: HeightGraph, tiebreak: TieBreak = DETERMINISTIC) -> PersistenceDiagram:
    """0-dimensional sub-level persistence of a height-filtered graph.

    A vertex enters at its height and an edge at the larger height of its
    endpoints.  Components that never merge into an older one (one per
    connected component of the graph) are infinite and dropped.
    """
    h = graph.heights
    e = graph.edges
    ev = np.maximum(h[e[:, 0]], h[e[:, 1]]) if len(e) else np.empty(0)
    return PersistenceDiagram.from_pairs(0, _elder_rule_pairs(h, e, ev, tiebreak))


def diagrams(points, tiebreak: TieBreak = DETERMINISTIC) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    """Convenience: ``(PD_0, PD_1)`` of the alpha filtration of a point set."""
    from .geometry import alpha_filtration, delaunay

    filt = alpha_filtration(delaunay(points))
    return ph_pointcloud(filt, 0, tiebreak), ph_pointcloud(filt, 1, tiebreak)


def bottleneck(dgm1: PersistenceDiagram, dgm2: PersistenceDiagram) -> float:
    """Bottleneck distance with the L-infinity ground metric.

    Points may be matched to each other or to the diagonal.  The optimum is
    one of the finitely many candidate costs; the smallest feasible one is
    found by binary search, testing each radius for a perfect matching.
    """
    if dgm1.dim != dgm2.dim:
        raise APFError("bottleneck distance needs diagrams of the same dimension")
    A = dgm1.expanded()
    B = dgm2.expanded()
    n, m = len(A), len(B)
    if n == 0 and m == 0:
        return 0.0
    la = (A[:, 1] - A[:, 0]) / 2.0
    lb = (B[:, 1] - B[:, 0]) / 2.0
    if n == 0:
        return float(lb.max())
    if m == 0:
        return float(la.max())
    D = np.maximum(np.abs(A[:, None, 0] - B[None, :, 0]), np.abs(A[:, None, 1] - B[None, :, 1]))
    cand = np.unique(np.concatenate([D.ravel(), la, lb]))
    # Any radius below the largest "best option" of a single point is infeasible.
    lower = max(np.minimum(D.min(axis=1), la).max(), np.minimum(D.min(axis=0), lb).max())
    # Sending everything to the diagonal is always feasible.
    upper = max(la.max(), lb.max())
    cand = cand[(cand >= lower) & (cand <= upper)]

    def feasible(eps):
        top = np.hstack([D <= eps, np.diag(la <= eps)])
        bottom = np.hstack([np.diag(lb <= eps), np.ones((m, n), dtype=bool)])
        g = csr_matrix(np.vstack([top, bottom]))
        match = maximum_bipartite_matching(g, perm_type="column")
        return bool(np.all(match >= 0))

    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])
