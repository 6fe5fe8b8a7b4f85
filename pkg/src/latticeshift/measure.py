"""Exact pattern counts on convex shapes and the uniform measure giving each
valid pattern on a convex shape C the mass 1/#X|C."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .avo import uni_radius
from .geometry import ConvexSet, GeometryError, box_points, is_convex, singleton_extension_chain
from .presentation import NotUniform
from .sft import Pattern, Sft, SftError, language_of_set, locally_valid, globally_valid


@dataclass(frozen=True)
class Count:
    lower: int
    upper: int

    @property
    def exact(self):
        return self.lower == self.upper

    @property
    def value(self):
        if not self.exact:
            raise SftError(f"count is only known to lie in [{self.lower}, {self.upper}]")
        return self.lower

    def __str__(self):
        return str(self.lower) if self.exact else f"[{self.lower}, {self.upper}]"


def _shape(C):
    pts = C.points if isinstance(C, ConvexSet) else C
    return sorted({tuple(v) for v in pts})


def count_patterns(X: Sft, C, oracle=None) -> Count:
    S = _shape(C)
    if S and not is_convex(S):
        raise GeometryError("shape is not convex")
    valid, unknown = language_of_set(X, S, oracle)
    return Count(len(valid), len(valid) + len(unknown))


def _require_uni(X):
    if uni_radius(X) is None:
        raise NotUniform(f"{X.name or 'SFT'} carries no uniformity certificate")


def unimeasure_eval(X: Sft, p, oracle=None) -> Fraction:
    _require_uni(X)
    p = Pattern(p)
    if not len(p):
        return Fraction(1)
    S = _shape(p.support)
    if not is_convex(S):
        raise GeometryError("pattern support is not convex")
    if not locally_valid(X, p) or not globally_valid(X, p, oracle).valid:
        raise SftError("pattern is not globally valid")
    return Fraction(1, count_patterns(X, S, oracle).value)


@dataclass
class ConsistencyReport:
    steps: int = 0
    identities: int = 0
    witness: Optional[tuple] = None

    @property
    def ok(self):
        return self.witness is None


def _measure_table(X, S, oracle):
    valid, unknown = language_of_set(X, S, oracle)
    if unknown:
        raise SftError(f"oracle left {len(unknown)} patterns undecided on {S}")
    n = len(valid)
    return {p: Fraction(1, n) for p in valid}


def check_chain(X: Sft, shapes, oracle=None, report=None) -> ConsistencyReport:
    """Marginalization along C_0 < C_1 < ... with singleton differences:
    the masses of the extensions of p sum to the mass of p."""
    _require_uni(X)
    report = report or ConsistencyReport()
    shapes = [_shape(C) for C in shapes]
    for a, b in zip(shapes, shapes[1:]):
        extra = set(b) - set(a)
        if not set(a) <= set(b) or len(extra) != 1:
            raise GeometryError("consecutive shapes must differ by one cell")
        ma = _measure_table(X, a, oracle)
        mb = _measure_table(X, b, oracle)
        sums = {p: Fraction(0) for p in ma}
        for q, m in mb.items():
            r = q.restrict(a)
            if r not in sums:
                report.witness = ("extension of an invalid pattern", tuple(b), q)
                return report
            sums[r] += m
        report.steps += 1
        for p, m in ma.items():
            report.identities += 1
            if sums[p] != m:
                report.witness = ("marginal mismatch", tuple(a), p, m, sums[p])
                return report
    return report


def check_shifts(X: Sft, C, shifts, oracle=None, report=None) -> ConsistencyReport:
    """Translates of C carry the same masses on translated patterns."""
    _require_uni(X)
    report = report or ConsistencyReport()
    S = _shape(C)
    base = _measure_table(X, S, oracle)
    for v in shifts:
        T = [tuple(a + b for a, b in zip(c, v)) for c in S]
        moved = _measure_table(X, T, oracle)
        for p, m in base.items():
            report.identities += 1
            if moved.get(p.shift(v)) != m:
                report.witness = ("shift mismatch", tuple(v), p, m, moved.get(p.shift(v)))
                return report
    return report


def check_consistency(X: Sft, chain, oracle=None, shifts=()) -> ConsistencyReport:
    rep = check_chain(X, chain, oracle)
    if rep.ok and shifts:
        check_shifts(X, chain[-1], shifts, oracle, rep)
    return rep


def convex_shapes_in_box(lo, hi):
    pts = list(box_points(lo, hi))
    out = []
    for mask in range(1, 1 << len(pts)):
        S = [pts[i] for i in range(len(pts)) if mask >> i & 1]
        if is_convex(S):
            out.append(tuple(S))
    return out


def check_all_chains(X: Sft, lo=(0, 0), hi=(2, 2), oracle=None) -> ConsistencyReport:
    """Every singleton step between convex shapes inside the box, plus the
    empty shape, and the shift identities for shapes moved inside the box."""
    _require_uni(X)
    shapes = convex_shapes_in_box(lo, hi)
    index = set(shapes)
    rep = ConsistencyReport()
    for S in shapes:
        if len(S) == 1:
            check_chain(X, [(), S], oracle, rep)
            if not rep.ok:
                return rep
        for v in box_points(lo, hi):
            if v in S:
                continue
            T = tuple(sorted(S + (v,)))
            if T in index:
                check_chain(X, [S, T], oracle, rep)
                if not rep.ok:
                    return rep
    for S in shapes:
        moves = []
        for v in box_points(tuple(-h for h in hi), hi):
            T = [tuple(a + b for a, b in zip(c, v)) for c in S]
            if any(v) and all(all(l <= t <= h for t, l, h in zip(c, lo, hi)) for c in T):
                moves.append(v)
        check_shifts(X, S, moves, oracle, rep)
        if not rep.ok:
            return rep
    return rep


@dataclass(frozen=True)
class EntropyValue:
    count: int
    n: int
    value: float

    def __str__(self):
        return f"count={self.count} n={self.n} entropy={self.value:.6f}"


def entropy_box(X: Sft, n: int, oracle=None) -> EntropyValue:
    cells = n ** X.dim
    S = list(box_points((0,) * X.dim, (n - 1,) * X.dim))
    c = count_patterns(X, S, oracle).value
    return EntropyValue(c, n, math.log(c) / cells)


@dataclass(frozen=True)
class MmeReport:
    n: int
    count: int
    total_mass: Fraction
    equal_masses: bool
    topological: float
    measure: float

    @property
    def ok(self):
        return self.total_mass == 1 and self.equal_masses


def mme_check(X: Sft, n: int, oracle=None) -> MmeReport:
    """-sum mu(p) log mu(p) over X|[0,n-1]^d equals log #X|[0,n-1]^d: exact
    because every mass is 1/count and the masses sum to one."""
    _require_uni(X)
    S = list(box_points((0,) * X.dim, (n - 1,) * X.dim))
    masses = [unimeasure_eval(X, p, oracle) for p in language_of_set(X, S, oracle)[0]]
    count = len(masses)
    total = sum(masses, Fraction(0))
    equal = all(m == Fraction(1, count) for m in masses)
    cells = n ** X.dim
    top = math.log(count) / cells
    meas = -sum(float(m) * math.log(float(m)) for m in masses) / cells
    return MmeReport(n, count, total, equal, top, meas)


class UniformSampler:
    """Draws from the uniform measure on X|C by extending one cell at a time
    along a convex chain."""

    def __init__(self, X: Sft, C, oracle=None):
        _require_uni(X)
        S = _shape(C)
        if S and not is_convex(S):
            raise GeometryError("shape is not convex")
        self.X = X
        self.chain = singleton_extension_chain([], S) if S else []
        self.options = []
        prefix = []
        for v in self.chain:
            prefix = prefix + [v]
            langs = _measure_table(X, sorted(prefix), oracle)
            opts = {}
            for q in langs:
                opts.setdefault(q.restrict([c for c in prefix if c != v]), []).append(q[v])
            self.options.append({k: sorted(s) for k, s in opts.items()})

    def sample(self, rng: random.Random) -> Pattern:
        cur = Pattern()
        for v, opts in zip(self.chain, self.options):
            syms = opts[cur]
            cur = cur.union(Pattern({v: syms[rng.randrange(len(syms))]}))
        return cur


def sample_uniform(X: Sft, C, rng=None, oracle=None) -> Pattern:
    rng = rng if rng is not None else random.Random(0)
    return UniformSampler(X, C, oracle).sample(rng)
