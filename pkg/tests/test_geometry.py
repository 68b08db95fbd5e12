from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from vivikit.geometry import convex_hull, inside_hull, orient


def exact_orient(a, b, c):
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (*a, *b, *c))
    d = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (d > 0) - (d < 0)


coords = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
points = st.tuples(coords, coords)


@settings(max_examples=300, deadline=None)
@given(points, points, points)
def test_orient_matches_rational_arithmetic(a, b, c):
    assert orient(a, b, c) == exact_orient(a, b, c)


def test_orient_near_degenerate():
    # classic failure case for naive floating point
    a = (0.5, 0.5)
    b = (12.0, 12.0)
    c = (24.0, 24.0)
    for i in range(50):
        q = (0.5 + i * 2.0 ** -53, 0.5)
        assert orient(q, b, c) == exact_orient(q, b, c)
    assert orient(a, b, c) == 0


def test_square_hull_and_inside():
    hull = convex_hull([(0, 0), (1, 0), (0, 1), (1, 1), (0.5, 0.5)])
    assert len(hull) == 4
    assert inside_hull(hull, (0.5, 0.5))
    assert inside_hull(hull, (1.0, 0.3))  # boundary counts
    assert not inside_hull(hull, (2, 2))


def test_degenerate_hulls():
    assert convex_hull([(1, 1), (1, 1)]) == [(1.0, 1.0)]
    seg = convex_hull([(0, 0), (1, 1), (2, 2), (0.5, 0.5)])
    assert seg == [(0.0, 0.0), (2.0, 2.0)]
    assert inside_hull(seg, (1.5, 1.5))
    assert not inside_hull(seg, (1.5, 1.4))
    assert not inside_hull(seg, (3, 3))
    assert inside_hull([(1.0, 1.0)], (1, 1))
    assert not inside_hull([(1.0, 1.0)], (1, 2))


@settings(max_examples=100, deadline=None)
@given(st.lists(points, min_size=1, max_size=25), points)
def test_hull_contains_its_points_and_is_order_free(pts, q):
    hull = convex_hull(pts)
    for p in pts:
        assert inside_hull(hull, p)
    shuffled = list(reversed(pts))
    assert convex_hull(shuffled) == hull
    if len(hull) >= 3:
        n = len(hull)
        assert all(orient(hull[i], hull[(i + 1) % n], hull[(i + 2) % n]) > 0 for i in range(n))
    # rational-arithmetic oracle: q is inside iff it is left of or on every edge
    if len(hull) >= 3:
        n = len(hull)
        expected = all(exact_orient(hull[i], hull[(i + 1) % n], q) >= 0 for i in range(n))
        assert inside_hull(hull, q) == expected
