"""Planar convex hulls with robust orientation tests."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

# error bound of the float determinant (Shewchuk's ccwerrboundA)
_EPS = np.finfo(np.float64).eps / 2
_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS


def orient(a, b, c) -> int:
    """Sign of the turn a -> b -> c: +1 left, -1 right, 0 collinear (exact)."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright
    bound = _ERRBOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    ax, ay, bx, by, cx, cy = (Fraction(float(v)) for v in (*a, *b, *c))
    exact = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (exact > 0) - (exact < 0)


def convex_hull(points) -> list[tuple[float, float]]:
    """Counter-clockwise hull vertices (Andrew's monotone chain).

    Collinear boundary points are dropped. Degenerate inputs return one
    point or the two endpoints of a segment.
    """
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and orient(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and orient(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 or all(orient(hull[0], hull[1], q) == 0 for q in hull[2:]):
        # all points collinear: keep the extreme endpoints
        return [pts[0], pts[-1]]
    return hull


def inside_hull(hull, q) -> bool:
    """True if ``q`` lies inside or on the boundary of ``hull``."""
    if not hull:
        return False
    if len(hull) == 1:
        return (float(q[0]), float(q[1])) == hull[0]
    if len(hull) == 2:
        a, b = hull
        if orient(a, b, q) != 0:
            return False
        return (min(a[0], b[0]) <= q[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= q[1] <= max(a[1], b[1]))
    n = len(hull)
    return all(orient(hull[i], hull[(i + 1) % n], q) >= 0 for i in range(n))
