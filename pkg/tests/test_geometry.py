import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from latticeshift.geometry import (Counterexample, Empty, Extension, Finite, GeometryError, Halfspace,
                                   HoldsOnBox, Inductive, Shift, Slab, Unknown, classify_extension,
                                   convex_hull_points, format_region, is_convex, is_slanted, join_slants,
                                   parse_region, region_member, region_subset_bounded,
                                   singleton_extension_chain)


def brute_hull_2d(pts):
    """Lattice points in the hull by exact barycentric tests over all triangles
    and segments of the input."""
    pts = sorted(set(pts))
    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
    out = set()
    for x in range(min(xs), max(xs) + 1):
        for y in range(min(ys), max(ys) + 1):
            if any(_in_triangle((x, y), a, b, c) for a, b, c in itertools.combinations_with_replacement(pts, 3)):
                out.add((x, y))
    return out


def _in_triangle(p, a, b, c):
    def cross(o, u, v):
        return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])
    d1, d2, d3 = cross(a, b, p), cross(b, c, p), cross(c, a, p)
    if cross(a, b, c) == 0:
        # degenerate: p must lie on one of the segments
        for u, v in ((a, b), (b, c), (a, c)):
            if cross(u, v, p) == 0 and min(u[0], v[0]) <= p[0] <= max(u[0], v[0]) \
                    and min(u[1], v[1]) <= p[1] <= max(u[1], v[1]):
                return True
        return False
    neg = d1 < 0 or d2 < 0 or d3 < 0
    pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (neg and pos)


def test_hull_examples():
    assert convex_hull_points([(0, 0), (2, 0)]).points == {(0, 0), (1, 0), (2, 0)}
    assert convex_hull_points([(0, 0), (1, 1)]).points == {(0, 0), (1, 1)}
    tri = convex_hull_points([(0, 0), (2, 0), (0, 2)]).points
    assert len(tri) == 6
    assert tri == brute_hull_2d([(0, 0), (2, 0), (0, 2)])


def test_is_convex_examples():
    assert is_convex([(0, 0), (1, 0)])
    assert not is_convex([(0, 0), (2, 0)])
    assert is_convex([(0, 0), (1, 0), (0, 1)])
    assert is_convex([])


def test_hull_rejects_high_dimension():
    with pytest.raises(GeometryError):
        convex_hull_points([(0, 0, 0, 0), (1, 0, 0, 0)])


def test_hull_three_dimensions():
    cube = convex_hull_points([(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2)]).points
    assert cube == {(x, y, z) for x in range(3) for y in range(3) for z in range(3) if x + y + z <= 2}


small_sets = st.sets(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=1, max_size=5)


@settings(max_examples=60, deadline=None)
@given(small_sets)
def test_hull_matches_brute_force(pts):
    assert convex_hull_points(pts).points == brute_hull_2d(pts)


@settings(max_examples=60, deadline=None)
@given(small_sets)
def test_is_convex_matches_brute_force(pts):
    assert is_convex(pts) == (brute_hull_2d(pts) == set(pts))


def test_singleton_chain_examples():
    assert singleton_extension_chain([(0, 0)], [(0, 0), (1, 0), (2, 0)]) == [(1, 0), (2, 0)]
    assert singleton_extension_chain([], [(0, 0)]) == [(0, 0)]
    box = [(0, 0), (1, 0), (0, 1), (1, 1)]
    chain = singleton_extension_chain([(0, 0), (1, 0)], box)
    assert len(chain) == 2
    cur = {(0, 0), (1, 0)}
    for v in chain:
        cur.add(v)
        assert is_convex(cur)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3))
def test_singleton_chain_prefixes_convex(w, h):
    box = [(x, y) for x in range(w) for y in range(h)]
    cur = set()
    for v in singleton_extension_chain([], box):
        cur.add(v)
        assert is_convex(cur)
    assert cur == set(box)


def test_slants():
    assert is_slanted((1, 3), (2,))
    assert not is_slanted((2, 3), (2,))
    j = join_slants([(2,), (3,)])
    assert j == (Fraction(3),)
    assert is_slanted((1, 3), j)
    assert not is_slanted((1, 2), j)


def test_region_members():
    t = Slab(1, float("inf"))
    assert not region_member(t, (5, 0))
    assert region_member(t, (5, 1))
    h = Halfspace((1, 2), 0, False)
    assert region_member(h, (-2, 1))
    assert not region_member(Halfspace((1, 2), 0, True), (-2, 1))
    ind = Inductive([(1, 5), (-3, -1)])
    assert region_member(ind, (7, -2))
    assert not region_member(ind, (7, 0))
    assert region_member(ind, (3, 0))
    assert not region_member(ind, (0, 0))


def test_subset_bounded():
    box = ((-4, -4), (4, 4))
    assert isinstance(region_subset_bounded(Halfspace((0, 1), 0, True), Halfspace((0, 1), 0, False), box), HoldsOnBox)
    res = region_subset_bounded(Slab(0, 0), Slab(1, float("inf")), box)
    assert res == Counterexample((0, 0)) or isinstance(res, Counterexample)
    assert Slab(0, 0).contains(res.point) and not Slab(1, float("inf")).contains(res.point)
    ind = Shift((0, 2), Inductive([(1, 5), (1, 3)]))
    assert isinstance(region_subset_bounded(ind, Halfspace((0, 1), 2, False), box), HoldsOnBox)
    assert isinstance(region_subset_bounded(ind, Halfspace((0, 1), 3, False), box), Counterexample)


def test_region_subset_matches_pointwise_scan():
    box = ((-3, -3), (3, 3))
    a = Inductive([(1, 2), (1, float("inf"))])
    b = Halfspace((0, 1), 1, False)
    pts = [(x, y) for x in range(-3, 4) for y in range(-3, 4)]
    expected = all(b.contains(p) for p in pts if a.contains(p))
    assert isinstance(region_subset_bounded(a, b, box), HoldsOnBox) == expected


def test_classify_extension():
    box = ((-4, -4), (4, 4))
    e = Extension(Halfspace((1, 2), 0, True), Halfspace((1, 2), 0, False))
    assert classify_extension(e, box) == "halfspace-minimal"
    assert classify_extension(Extension(Finite([(1, 0)]), Finite([(0, 0), (1, 0)])), box) == "singleton"
    assert classify_extension(Extension(Empty(), Finite([(0, 0), (1, 0)])), box) == "other"
    assert isinstance(classify_extension(Extension(Slab(1, 2), Slab(0, 2)), box), Unknown)


LITERALS = [
    "all",
    "empty",
    "finite [[0,0],[1,0]]",
    "halfspace dir=[1,2] r=0 open",
    "halfspace dir=[0,1] r=-3 closed",
    "slab 1 inf",
    "iint [[1,5],[-3,-1]]",
    "iint [[],[1,inf]]",
    "shift [1,2] (slab 0 0)",
    "union(slab 0 0, finite [[3,3]])",
    "inter(halfspace dir=[1,1] r=0 closed, compl(finite [[0,0]]))",
]


@pytest.mark.parametrize("text", LITERALS)
def test_region_literal_round_trip(text):
    r = parse_region(text)
    again = parse_region(format_region(r))
    pts = [(x, y) for x in range(-5, 6) for y in range(-5, 6)]
    assert [r.contains(p) for p in pts] == [again.contains(p) for p in pts]


def test_region_literal_errors():
    for bad in ("halfspace dir=[1,2]", "slab x 2", "union(all", "iint [[1,2]"):
        with pytest.raises(GeometryError):
            parse_region(bad)
