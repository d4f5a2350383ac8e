"""Exact-sign planar predicates.

Each predicate first evaluates its determinant in double precision together
with a forward error bound (Shewchuk's stage-A bounds).  Only when the sign
cannot be certified from the float result is the determinant recomputed
exactly.  Every finite double is a dyadic rational, so scaling all inputs by a
common power of two turns them into integers without changing the sign of a
homogeneous determinant; the fallback then runs in Python integers.
"""

from __future__ import annotations

_EPS = 2.0 ** -53
_CCW_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS
_ICC_ERRBOUND = (10.0 + 96.0 * _EPS) * _EPS


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def orient2d(ax, ay, bx, by, cx, cy) -> int:
    """Sign of the orientation of the triangle ``a, b, c``.

    Returns +1 for a counterclockwise turn, -1 for clockwise and 0 when the
    three points are exactly collinear.
    """
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    errbound = _CCW_ERRBOUND * (abs(detleft) + abs(detright))
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    return _orient2d_exact(ax, ay, bx, by, cx, cy)


def _as_integers(*values) -> list[int]:
    ratios = [float(v).as_integer_ratio() for v in values]
    den = max(d for _, d in ratios)
    return [n * (den // d) for n, d in ratios]


def _orient2d_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = _as_integers(ax, ay, bx, by, cx, cy)
    return _sign((ax - cx) * (by - cy) - (ay - cy) * (bx - cx))


def incircle(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    """Sign of the in-circle determinant.

    Positive when ``d`` lies strictly inside the circle through ``a, b, c``
    (given in counterclockwise order), negative when outside and zero when the
    four points are cocircular.
    """
    adx = ax - dx
    ady = ay - dy
    bdx = bx - dx
    bdy = by - dy
    cdx = cx - dx
    cdy = cy - dy

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    alift = adx * adx + ady * ady

    cdxady = cdx * ady
    adxcdy = adx * cdy
    blift = bdx * bdx + bdy * bdy

    adxbdy = adx * bdy
    bdxady = bdx * ady
    clift = cdx * cdx + cdy * cdy

    det = (alift * (bdxcdy - cdxbdy)
           + blift * (cdxady - adxcdy)
           + clift * (adxbdy - bdxady))
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * alift
                 + (abs(cdxady) + abs(adxcdy)) * blift
                 + (abs(adxbdy) + abs(bdxady)) * clift)
    errbound = _ICC_ERRBOUND * permanent
    if det > errbound:
        return 1
    if -det > errbound:
        return -1
    return _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy)


def _incircle_exact(ax, ay, bx, by, cx, cy, dx, dy) -> int:
    ax, ay, bx, by, cx, cy, dx, dy = _as_integers(ax, ay, bx, by, cx, cy, dx, dy)
    adx, ady = ax - dx, ay - dy
    bdx, bdy = bx - dx, by - dy
    cdx, cdy = cx - dx, cy - dy
    det = ((adx * adx + ady * ady) * (bdx * cdy - cdx * bdy)
           + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy)
           + (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady))
    return _sign(det)


def incircle_sos(pts, ia: int, ib: int, ic: int, id_: int) -> int:
    """In-circle sign under a symbolic perturbation keyed to point indices.

    ``pts`` is a sequence of ``(x, y)`` pairs and the ``i*`` arguments index
    into it.  The paraboloid lift of point ``i`` is lowered by an infinitesimal
    ``eps**(i + 1)``, so among cocircular points the one with the smallest
    index is treated as lying inside the circle of the others.  The result is never
    zero unless all four points are collinear, and it is consistent with a
    single perturbed lifting, so flip algorithms driven by it terminate in a
    unique triangulation.
    """
    a, b, c, d = pts[ia], pts[ib], pts[ic], pts[id_]
    s = incircle(a[0], a[1], b[0], b[1], c[0], c[1], d[0], d[1])
    if s:
        return s
    # The lifted 4x4 determinant |x y x^2+y^2 1| over rows (a, b, c, d) equals
    # the in-circle determinant.  It is linear in the lift column, and the
    # cofactor of row k in that column is (-1)**k * orient(other rows); the
    # lift of row k moves by -eps**(index + 1).
    rows = [(ia, a), (ib, b), (ic, c), (id_, d)]
    for k in sorted(range(4), key=lambda j: rows[j][0]):
        p, q, r = (rows[j][1] for j in range(4) if j != k)
        o = orient2d(p[0], p[1], q[0], q[1], r[0], r[1])
        if o:
            return -o if k % 2 == 0 else o
    return 0
