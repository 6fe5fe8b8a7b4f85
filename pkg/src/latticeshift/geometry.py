"""Integer lattice geometry: vectors, convex sets, halfspaces, inductive
intervals, slantedness and a small algebra of regions with exact pointwise
membership."""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

Vec = tuple

INF = math.inf


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------- vectors

def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vneg(u):
    return tuple(-a for a in u)


def vdot(u, v):
    return sum(a * b for a, b in zip(u, v))


def vscale(c, u):
    return tuple(c * a for a in u)


def zero(d):
    return (0,) * d


def norm2(u):
    return sum(a * a for a in u)


def shift_set(v, pts):
    return frozenset(vadd(v, p) for p in pts)


def box_points(lo, hi) -> Iterator[tuple]:
    """All lattice points of the box [lo, hi] (inclusive) in lexicographic order."""
    ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
    return itertools.product(*ranges)


def centered_box(radius, d):
    return ((-radius,) * d, (radius,) * d)


def ball(r, d) -> frozenset:
    """Discrete Euclidean ball of radius r around the origin."""
    r = int(r)
    return frozenset(p for p in box_points((-r,) * d, (r,) * d) if norm2(p) <= r * r)


def bounding_box(pts):
    pts = list(pts)
    if not pts:
        raise GeometryError("bounding box of an empty set")
    d = len(pts[0])
    lo = tuple(min(p[i] for p in pts) for i in range(d))
    hi = tuple(max(p[i] for p in pts) for i in range(d))
    return lo, hi


def in_box(v, box):
    lo, hi = box
    return all(a <= x <= b for x, a, b in zip(v, lo, hi))


def on_box_boundary(v, box):
    lo, hi = box
    return any(x == a or x == b for x, a, b in zip(v, lo, hi))


# ---------------------------------------------------------- convex hulls

def _solve_exact(rows, rhs):
    """Solve a square-or-tall linear system with Fractions. Returns a solution
    of the consistent system or None."""
    m = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    nrows, ncols = len(m), len(m[0]) - 1
    piv_cols = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
        if r == nrows:
            break
    for i in range(r, nrows):
        if m[i][ncols] != 0:
            return None
    if len(piv_cols) < ncols:
        return None  # degenerate simplex, handled by smaller subsets
    sol = [Fraction(0)] * ncols
    for i, c in enumerate(piv_cols):
        sol[c] = m[i][ncols]
    return sol


def _in_simplex(p, verts):
    # barycentric coordinates: sum l_i v_i = p, sum l_i = 1, l_i >= 0
    d = len(p)
    k = len(verts)
    rows = [[verts[j][i] for j in range(k)] for i in range(d)] + [[1] * k]
    rhs = list(p) + [1]
    sol = _solve_exact(rows, rhs)
    return sol is not None and all(x >= 0 for x in sol)


def in_hull_caratheodory(p, pts) -> bool:
    """Exact membership of p in the real convex hull of pts, by testing all
    simplices on at most d+1 of the points."""
    pts = sorted(set(pts))
    d = len(p)
    if tuple(p) in pts:
        return True
    for k in range(2, min(d + 1, len(pts)) + 1):
        for combo in itertools.combinations(pts, k):
            if _in_simplex(p, combo):
                return True
    return False


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_2d(pts):
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts
    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _in_polygon_2d(p, hull):
    if len(hull) == 1:
        return p == hull[0]
    if len(hull) == 2:
        a, b = hull
        if _cross(a, b, p) != 0:
            return False
        return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    n = len(hull)
    return all(_cross(hull[i], hull[(i + 1) % n], p) >= 0 for i in range(n))


@dataclass(frozen=True)
class ConvexSet:
    points: frozenset
    verified: bool = False

    def __iter__(self):
        return iter(sorted(self.points))

    def __len__(self):
        return len(self.points)

    def __contains__(self, v):
        return tuple(v) in self.points


def _hull_points(pts):
    d = len(pts[0])
    if d > 3:
        raise GeometryError(f"unsupported dimension {d} (at most 3)")
    lo, hi = bounding_box(pts)
    if d == 1:
        return frozenset((x,) for x in range(lo[0], hi[0] + 1))
    if d == 2:
        hull = _hull_2d(pts)
        return frozenset(p for p in box_points(lo, hi) if _in_polygon_2d(p, hull))
    return frozenset(p for p in box_points(lo, hi) if in_hull_caratheodory(p, pts))


def convex_hull_points(pts: Iterable) -> ConvexSet:
    """All lattice points in the real convex hull of a finite nonempty set."""
    pts = sorted({tuple(p) for p in pts})
    if not pts:
        raise GeometryError("convex hull of an empty set")
    return ConvexSet(_hull_points(pts), True)


def is_convex(pts: Iterable) -> bool:
    pts = {tuple(p) for p in pts}
    if not pts:
        return True
    return _hull_points(sorted(pts)) == frozenset(pts)


def _set_distance2(v, pts):
    return min(norm2(vsub(v, p)) for p in pts)


def singleton_extension_chain(inner, outer) -> list:
    """Order the points of outer minus inner so that every prefix union stays
    convex. Greedy: always add the nearest addable point, ties broken
    lexicographically."""
    cur = {tuple(p) for p in inner}
    outer = {tuple(p) for p in outer}
    if not cur <= outer:
        raise GeometryError("inner set is not contained in outer set")
    if not is_convex(cur) or not is_convex(outer):
        raise GeometryError("both sets must be convex")
    todo = sorted(outer - cur)
    chain = []
    while todo:
        if cur:
            order = sorted(todo, key=lambda v: (_set_distance2(v, cur), v))
        else:
            order = todo
        for v in order:
            if is_convex(cur | {v}):
                break
        else:
            raise GeometryError(f"no convex singleton step from a set of size {len(cur)}")
        chain.append(v)
        cur.add(v)
        todo.remove(v)
    return chain


# ------------------------------------------------------------- slantedness

def slantedness(u) -> tuple:
    if any(a <= 0 for a in u):
        raise GeometryError("slantedness needs positive coordinates")
    return tuple(Fraction(u[i + 1], u[i]) for i in range(len(u) - 1))


def is_slanted(u, slant) -> bool:
    """True when u[i+1]/u[i] >= slant[i] for every i (exact)."""
    if any(a <= 0 for a in u):
        raise GeometryError("slantedness needs positive coordinates")
    if len(slant) != len(u) - 1:
        raise GeometryError("slant vector has the wrong length")
    for i, s in enumerate(slant):
        s = Fraction(s)
        # u[i+1]/u[i] >= p/q  <=>  u[i+1]*q >= p*u[i]
        if u[i + 1] * s.denominator < s.numerator * u[i]:
            return False
    return True


def join_slants(slants) -> tuple:
    slants = [tuple(Fraction(x) for x in s) for s in slants]
    return tuple(max(col) for col in zip(*slants))


# ---------------------------------------------------------------- regions

class Region:
    """Base class for symbolic subsets of Z^d."""

    def contains(self, v) -> bool:
        raise NotImplementedError

    def __contains__(self, v):
        return self.contains(tuple(v))

    def finite_points(self):
        """The point set when it is finite and known, otherwise None."""
        return None

    def points_in_box(self, box) -> frozenset:
        fin = self.finite_points()
        if fin is not None:
            return frozenset(p for p in fin if in_box(p, box))
        return frozenset(p for p in box_points(*box) if self.contains(p))

    def shifted(self, v):
        return Shift(tuple(v), self)

    def __str__(self):
        return format_region(self)


@dataclass(frozen=True)
class All(Region):
    def contains(self, v):
        return True


@dataclass(frozen=True)
class Empty(Region):
    def contains(self, v):
        return False

    def finite_points(self):
        return frozenset()


@dataclass(frozen=True)
class Finite(Region):
    points: frozenset

    def __init__(self, points):
        object.__setattr__(self, "points", frozenset(tuple(p) for p in points))

    def contains(self, v):
        return v in self.points

    def finite_points(self):
        return self.points


@dataclass(frozen=True)
class Halfspace(Region):
    """{v : v.direction >= r} (closed) or > r (open). The last coordinate of
    the direction may be +inf or -inf."""

    direction: tuple
    r: int
    open: bool = False

    def __post_init__(self):
        fin = [a for a in self.direction if not _is_inf(a)]
        if any(_is_inf(a) for a in self.direction[:-1]):
            raise GeometryError("only the last direction coordinate may be infinite")
        if not _is_inf(self.direction[-1]):
            g = 0
            for a in fin:
                g = math.gcd(g, int(a))
            if g != 1:
                raise GeometryError(f"direction {self.direction} must have gcd 1")

    def dot(self, v):
        last = self.direction[-1]
        if _is_inf(last):
            if v[-1] != 0:
                return last if v[-1] > 0 else -last
            return vdot(v[:-1], self.direction[:-1])
        return vdot(v, self.direction)

    def contains(self, v):
        val = self.dot(v)
        return val > self.r if self.open else val >= self.r

    def closed_form(self):
        """Equivalent closed halfspace (open H at r equals closed H at r+1)."""
        if not self.open:
            return self
        return Halfspace(self.direction, self.r + 1, False)


def _is_inf(a):
    return isinstance(a, float) and math.isinf(a)


@dataclass(frozen=True)
class Slab(Region):
    """Points whose last coordinate lies in [lo, hi]; hi may be +inf."""

    lo: float
    hi: float

    def contains(self, v):
        return self.lo <= v[-1] <= self.hi


def slice_region(k):
    return Slab(k, k)


@dataclass(frozen=True)
class Inductive(Region):
    """Inductive interval given by its interval list. Each entry is None for
    the empty interval or a pair (lo, hi) with lo == 1 or hi == -1, the other
    end possibly infinite."""

    intervals: tuple

    def __init__(self, intervals):
        norm = []
        for iv in intervals:
            norm.append(_normalize_interval(iv))
        object.__setattr__(self, "intervals", tuple(norm))

    def contains(self, v):
        for i in range(len(v) - 1, -1, -1):
            if v[i] != 0:
                iv = self.intervals[i]
                return iv is not None and iv[0] <= v[i] <= iv[1]
        return False

    def finite_points(self):
        d = len(self.intervals)
        for iv in self.intervals[1:]:
            if iv is not None:
                return None
        iv = self.intervals[0]
        if iv is None:
            return frozenset()
        if _is_inf(iv[0]) or _is_inf(iv[1]):
            return None
        return frozenset((x,) + (0,) * (d - 1) for x in range(int(iv[0]), int(iv[1]) + 1))


def _normalize_interval(iv):
    if iv is None:
        return None
    lo, hi = iv
    lo = -INF if lo in (None, "-inf") or (_is_inf(lo) and lo < 0) else lo
    hi = INF if hi in (None, "inf") or (_is_inf(hi) and hi > 0) else hi
    if not _is_inf(lo):
        lo = int(lo)
    if not _is_inf(hi):
        hi = int(hi)
    if lo > hi:
        return None
    if not (lo == 1 or hi == -1):
        raise GeometryError(f"interval {iv} is not zero-grazing")
    if lo <= 0 <= hi:
        raise GeometryError(f"interval {iv} contains 0")
    return (lo, hi)


@dataclass(frozen=True)
class Shift(Region):
    vector: tuple
    region: Region

    def contains(self, v):
        return self.region.contains(vsub(v, self.vector))

    def finite_points(self):
        fin = self.region.finite_points()
        return None if fin is None else shift_set(self.vector, fin)


@dataclass(frozen=True)
class Union(Region):
    parts: tuple

    def __init__(self, *parts):
        object.__setattr__(self, "parts", tuple(parts))

    def contains(self, v):
        return any(p.contains(v) for p in self.parts)

    def finite_points(self):
        out = set()
        for p in self.parts:
            fin = p.finite_points()
            if fin is None:
                return None
            out |= fin
        return frozenset(out)


@dataclass(frozen=True)
class Inter(Region):
    parts: tuple

    def __init__(self, *parts):
        object.__setattr__(self, "parts", tuple(parts))

    def contains(self, v):
        return all(p.contains(v) for p in self.parts)

    def finite_points(self):
        for p in self.parts:
            fin = p.finite_points()
            if fin is not None:
                return frozenset(v for v in fin if self.contains(v))
        return None


@dataclass(frozen=True)
class Compl(Region):
    region: Region

    def contains(self, v):
        return not self.region.contains(v)


@dataclass(frozen=True)
class Ball(Region):
    radius: int

    def contains(self, v):
        return norm2(v) <= self.radius * self.radius


@dataclass(frozen=True)
class Section(Region):
    """Projection of the zeroth slice: u belongs iff (u, 0) belongs to the
    underlying region. Drops the dimension by one."""

    region: Region

    def contains(self, v):
        return self.region.contains(tuple(v) + (0,))

    def finite_points(self):
        fin = self.region.finite_points()
        if fin is None:
            return None
        return frozenset(p[:-1] for p in fin if p[-1] == 0)


def punctured(d):
    """Z^d minus the origin."""
    return Compl(Finite([zero(d)]))


def region_member(region: Region, v) -> bool:
    return region.contains(tuple(v))


@dataclass(frozen=True)
class HoldsOnBox:
    box: tuple


@dataclass(frozen=True)
class Counterexample:
    point: tuple


def region_subset_bounded(a: Region, b: Region, box):
    """Check a ⊆ b on every lattice point of the box."""
    fin = a.finite_points()
    pts = sorted(p for p in fin if in_box(p, box)) if fin is not None else box_points(*box)
    for p in pts:
        if a.contains(p) and not b.contains(p):
            return Counterexample(tuple(p))
    return HoldsOnBox(box)


# ----------------------------------------------------------- extensions

@dataclass(frozen=True)
class Extension:
    inner: Region
    outer: Region


@dataclass(frozen=True)
class Unknown:
    box: tuple


def _as_region(x):
    if isinstance(x, Region):
        return x
    if isinstance(x, ConvexSet):
        return Finite(x.points)
    return Finite(x)


def _halfspace_pair(inner, outer):
    if not (isinstance(inner, Halfspace) and isinstance(outer, Halfspace)):
        return False
    a, b = inner.closed_form(), outer.closed_form()
    if a.direction != b.direction or any(_is_inf(x) for x in a.direction):
        return False
    return a.r == b.r + 1


def classify_extension(ext: Extension, box):
    """Classify an extension as 'singleton', 'minimal-convex',
    'halfspace-minimal' or 'other'; Unknown(box) when the difference is not
    fully visible inside the box."""
    inner, outer = _as_region(ext.inner), _as_region(ext.outer)
    if _halfspace_pair(inner, outer):
        return "halfspace-minimal"
    diff = [p for p in box_points(*box) if outer.contains(p) and not inner.contains(p)]
    if any(on_box_boundary(p, box) for p in diff):
        fin_in, fin_out = inner.finite_points(), outer.finite_points()
        if fin_in is None or fin_out is None:
            return Unknown(box)
    if len(diff) == 1:
        return "singleton"
    a = inner.points_in_box(box)
    b = outer.points_in_box(box)
    if 1 < len(diff) <= 12 and is_convex(a) and is_convex(b) and inner.finite_points() is not None \
            and outer.finite_points() is not None:
        for k in range(1, len(diff)):
            for sub in itertools.combinations(diff, k):
                if is_convex(a | set(sub)):
                    return "other"
        return "minimal-convex"
    return "other"


# ------------------------------------------------------- region literals

_TOKEN = re.compile(r"\s*(-?inf|-?\d+|[A-Za-z_]+|=|\[|\]|\(|\)|,|;)")


def _tokens(text):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise GeometryError(f"cannot parse region at column {pos + 1}: {text[pos:pos + 12]!r}")
        out.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect=None):
        t = self.peek()
        if t is None:
            raise GeometryError("unexpected end of region literal")
        if expect is not None and t != expect:
            raise GeometryError(f"expected {expect!r}, found {t!r}")
        self.i += 1
        return t

    def number(self):
        t = self.take()
        if t == "inf":
            return INF
        if t == "-inf":
            return -INF
        try:
            return int(t)
        except ValueError:
            raise GeometryError(f"expected a number, found {t!r}") from None

    def nested(self):
        self.take("[")
        items = []
        while self.peek() != "]":
            if self.peek() == "[":
                items.append(self.nested())
            else:
                items.append(self.number())
            if self.peek() == ",":
                self.take(",")
        self.take("]")
        return items

    def region(self):
        t = self.take()
        if t == "all":
            return All()
        if t == "empty":
            return Empty()
        if t == "finite":
            return Finite([tuple(p) for p in self.nested()])
        if t == "halfspace":
            self.take("dir")
            self.take("=")
            direction = tuple(self.nested())
            self.take("r")
            self.take("=")
            r = self.number()
            op = False
            if self.peek() in ("open", "closed"):
                op = self.take() == "open"
            return Halfspace(direction, r, op)
        if t == "slab":
            return Slab(self.number(), self.number())
        if t == "ball":
            return Ball(self.number())
        if t == "iint":
            ivs = []
            for iv in self.nested():
                ivs.append(None if iv == [] else (iv[0], iv[1]))
            return Inductive(ivs)
        if t == "shift":
            v = tuple(self.nested())
            self.take("(")
            r = self.region()
            self.take(")")
            return Shift(v, r)
        if t in ("union", "inter", "compl", "section"):
            self.take("(")
            parts = [self.region()]
            while self.peek() in (",", ";"):
                self.take()
                parts.append(self.region())
            self.take(")")
            if t == "union":
                return Union(*parts)
            if t == "inter":
                return Inter(*parts)
            if len(parts) != 1:
                raise GeometryError(f"{t} takes one argument")
            return Compl(parts[0]) if t == "compl" else Section(parts[0])
        raise GeometryError(f"unknown region constructor {t!r}")


def parse_region(text: str) -> Region:
    p = _Parser(text)
    r = p.region()
    if p.peek() is not None:
        raise GeometryError(f"trailing input in region literal: {p.toks[p.i:]}")
    return r


def _num(x):
    if _is_inf(x):
        return "inf" if x > 0 else "-inf"
    return str(int(x))


def _vec(v):
    return "[" + ",".join(_num(a) for a in v) + "]"


def format_region(r: Region) -> str:
    if isinstance(r, All):
        return "all"
    if isinstance(r, Empty):
        return "empty"
    if isinstance(r, Finite):
        return "finite [" + ",".join(_vec(p) for p in sorted(r.points)) + "]"
    if isinstance(r, Halfspace):
        return f"halfspace dir={_vec(r.direction)} r={r.r} {'open' if r.open else 'closed'}"
    if isinstance(r, Slab):
        return f"slab {_num(r.lo)} {_num(r.hi)}"
    if isinstance(r, Ball):
        return f"ball {r.radius}"
    if isinstance(r, Inductive):
        parts = ["[]" if iv is None else _vec(iv) for iv in r.intervals]
        return "iint [" + ",".join(parts) + "]"
    if isinstance(r, Shift):
        return f"shift {_vec(r.vector)} ({format_region(r.region)})"
    if isinstance(r, Union):
        return "union(" + ", ".join(format_region(p) for p in r.parts) + ")"
    if isinstance(r, Inter):
        return "inter(" + ", ".join(format_region(p) for p in r.parts) + ")"
    if isinstance(r, Compl):
        return f"compl({format_region(r.region)})"
    if isinstance(r, Section):
        return f"section({format_region(r.region)})"
    raise GeometryError(f"cannot format {r!r}")


def format_vec(v):
    return _vec(v)
