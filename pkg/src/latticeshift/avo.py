"""Avo and uni checks on truncated inductive-interval shapes, extraction of
avomanuals and unimanuals, parallel-handling tests and verification of
presentations."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Optional

from .geometry import INF, Inductive, ball, punctured, zero
from .layers import Layers, LayerError, cyclic_words, layers_of, unroll, window
from .manual import Manual, Rule
from .presentation import Nca, Presentation
from .sft import Sft, follower_table, resolve_oracle
from .transform import adapted_basis_rows, transform_sft


# ----------------------------------------------------------------- shapes

def _interval_options(r):
    opts = [None]
    opts += [(1, a) for a in range(1, r + 1)] + [(1, INF)]
    opts += [(-a, -1) for a in range(1, r + 1)] + [(-INF, -1)]
    return opts


def inductive_shapes(d, r):
    """All interval lists with finite endpoints up to r, last coordinate
    varying slowest."""
    opts = _interval_options(r)
    out = []
    for combo in itertools.product(opts, repeat=d):
        ivs = tuple(reversed(combo))
        out.append(Inductive(ivs))
    return out


def truncate(region, R, d):
    return tuple(sorted(p for p in ball(R, d) if region.contains(p)))


def _factors_through(table, C):
    seen = {}
    for p, f in table.items():
        key = p.restrict(C)
        if seen.setdefault(key, f) != f:
            return False
    return True


def minimal_window(table, D):
    for k in range(len(D) + 1):
        for C in itertools.combinations(sorted(D), k):
            if _factors_through(table, C):
                return frozenset(C)
    return frozenset(D)


@dataclass
class ShapeResult:
    shape: Inductive
    points: tuple
    status: str  # "stabilized" | "not-stabilized" | "inconclusive"
    window: Optional[frozenset] = None
    table: dict = field(default_factory=dict, repr=False)


@dataclass
class AvoReport:
    radius: int
    shapes: list

    @property
    def all_stabilized(self):
        return all(s.status == "stabilized" for s in self.shapes)

    def failures(self):
        return [s for s in self.shapes if s.status != "stabilized"]


def _table(X, D, oracle):
    return follower_table(X, D, oracle, target=zero(X.dim))


def check_avo(X: Sft, r: int, oracle=None, lookahead=True) -> AvoReport:
    oracle = resolve_oracle(X, oracle)
    out = []
    for shape in inductive_shapes(X.dim, r):
        D = truncate(shape, r, X.dim)
        table, unk = _table(X, D, oracle)
        if unk:
            out.append(ShapeResult(shape, D, "inconclusive"))
            continue
        C = minimal_window(table, D)
        status = "stabilized"
        if lookahead:
            D2 = truncate(shape, r + 1, X.dim)
            if D2 != D:
                t2, unk2 = _table(X, D2, oracle)
                if unk2:
                    status = "inconclusive"
                elif not _factors_through(t2, C):
                    status = "not-stabilized"
        out.append(ShapeResult(shape, D, status, C if status == "stabilized" else None, table))
    return AvoReport(r, out)


@dataclass
class UniShape:
    shape: Inductive
    points: tuple
    status: str  # "uniform" | "non-uniform" | "inconclusive"
    count: Optional[int] = None
    witness: Optional[tuple] = None  # ((pattern, count), (pattern, count))


@dataclass
class UniReport:
    radius: int
    shapes: list

    @property
    def uniform(self):
        return all(s.status == "uniform" for s in self.shapes)

    def first_witness(self):
        for s in self.shapes:
            if s.status == "non-uniform":
                return s
        return None


def check_uni(X: Sft, r: int, oracle=None) -> UniReport:
    oracle = resolve_oracle(X, oracle)
    out = []
    for shape in inductive_shapes(X.dim, r):
        D = truncate(shape, r, X.dim)
        table, unk = _table(X, D, oracle)
        if unk:
            out.append(UniShape(shape, D, "inconclusive"))
            continue
        counts = sorted((len(f), p) for p, f in table.items())
        if not counts:
            # empty subshift: nothing to compare
            out.append(UniShape(shape, D, "uniform", 0))
            continue
        lo, hi = counts[0], counts[-1]
        if lo[0] == hi[0]:
            out.append(UniShape(shape, D, "uniform", lo[0]))
        else:
            out.append(UniShape(shape, D, "non-uniform", None, ((lo[1], lo[0]), (hi[1], hi[0]))))
    return UniReport(r, out)


def certify(X: Sft, r: int, oracle=None) -> Sft:
    """Attach avo/uni certificates for radius r when the checks pass."""
    certs = []
    if check_avo(X, r, oracle).all_stabilized:
        certs.append(f"avo:{r}")
        if check_uni(X, r, oracle).uniform:
            certs.append(f"uni:{r}")
    return X.with_certificates(*certs) if certs else X


def uni_radius(X: Sft):
    for c in X.certificates:
        if c.startswith("uni:"):
            return int(c[4:])
    return None


# ------------------------------------------------------- manual extraction

def _semantic_member(X, oracle, r, uni):
    """Membership oracle for the avomanual (or unimanual) on finite
    truncations: does the follower function on the truncated guard, plus
    any extra points, factor through the support?"""

    @functools.lru_cache(maxsize=None)
    def decide(C, Dpts):
        if not C <= Dpts:
            return False
        table, unk = _table(X, tuple(sorted(Dpts)), oracle)
        if unk:
            return None
        if not _factors_through(table, tuple(sorted(C))):
            return False
        if uni and len({len(f) for f in table.values()}) > 1:
            return False
        return True

    B = ball(r, X.dim)

    def semantic(C, D, extra=(), fill_upper=None):
        C = frozenset(C)
        pts = {p for p in B if p != zero(X.dim) and D.contains(p)} | set(extra)
        if fill_upper is not None:
            upper = {p for p in B if 1 <= p[-1] <= fill_upper}
            C = C | upper
            pts |= upper
        return decide(C, frozenset(pts))

    return semantic


def extract_avomanual(X: Sft, r: int, oracle=None, uni=False):
    """One rule per stabilized shape: support = window, guard = the untruncated
    inductive interval. Returns (manual, warnings)."""
    oracle = resolve_oracle(X, oracle)
    rep = check_avo(X, r, oracle)
    counts = {}
    if uni:
        for s in check_uni(X, r, oracle).shapes:
            counts[s.shape] = s
    rules, warnings, seen = [], [], set()
    for s in rep.shapes:
        if s.status != "stabilized":
            warnings.append(f"shape {s.shape.intervals} omitted: {s.status}")
            continue
        count = None
        if uni:
            u = counts[s.shape]
            if u.status != "uniform":
                warnings.append(f"shape {s.shape.intervals} omitted: not uniform")
                continue
            count = u.count
        key = (s.window, s.points, s.shape)
        if key in seen:
            continue
        seen.add(key)
        rules.append(Rule(s.window, s.shape, None, count))
    # the punctured ball gives a rule whose guard is everything but the origin
    D = tuple(sorted(p for p in ball(r, X.dim) if p != zero(X.dim)))
    table, unk = _table(X, D, oracle)
    if not unk:
        C = minimal_window(table, D)
        D2 = tuple(sorted(p for p in ball(r + 1, X.dim) if p != zero(X.dim)))
        t2, unk2 = _table(X, D2, oracle)
        uniform = len({len(f) for f in table.values()}) == 1
        if not unk2 and _factors_through(t2, tuple(sorted(C))) and (uniform or not uni):
            cnt = len(next(iter(table.values()))) if uni else None
            rules.append(Rule(C, punctured(X.dim), None, cnt))
    rules = _drop_subsumed(rules, r + 1, X.dim)
    prov = "extracted-unimanual" if uni else "extracted-avomanual"
    return Manual(tuple(rules), X.dim, prov, r, _semantic_member(X, oracle, r, uni)), warnings


def _drop_subsumed(rules, R, d):
    """Remove rules implied by another rule with a smaller support and a
    larger guard (compared on a box)."""
    pts = [p for p in itertools.product(range(-R, R + 1), repeat=d)]
    guards = [frozenset(p for p in pts if r.guard.contains(p)) for r in rules]
    keep = []
    for i, r in enumerate(rules):
        dominated = False
        for j, s in enumerate(rules):
            if i == j:
                continue
            if s.support <= r.support and guards[i] <= guards[j]:
                strict = s.support < r.support or guards[i] < guards[j]
                if strict or j < i:
                    dominated = True
                    break
        if not dominated:
            keep.append(r)
    return keep


# ------------------------------------------------------ parallel handling

@dataclass
class ParallelCheck:
    direction: tuple
    radius: int
    layer: str
    verdict: str  # "presentable" | "not-presentable" | "inconclusive"
    rule: Optional[Nca] = None
    witness: Optional[dict] = None
    widths: tuple = ()


def _layers_for(Z):
    try:
        return layers_of(Z)
    except LayerError:
        return None


def _edges(L: Layers, W, layer):
    verts, succ = L.graph(W)
    if layer == "north":
        return verts, succ
    pred = {v: [] for v in verts}
    for a in verts:
        for b in succ[a]:
            pred[b].append(a)
    return verts, {v: tuple(sorted(p)) for v, p in pred.items()}


def infer_rule(L: Layers, r, widths, layer):
    offsets = tuple(range(-r, r + 1))
    seen = {}
    for W in widths:
        if W < 2 * r + 1:
            continue
        verts, nxt = _edges(L, W, layer)
        for x in verts:
            for y in nxt[x]:
                for j in range(W):
                    seen.setdefault(window(x, j, offsets), set()).add(y[j])
    return offsets, seen


def _smallest_neighborhood(offsets, seen):
    idx = range(len(offsets))
    for k in range(len(offsets) + 1):
        for sub in itertools.combinations(idx, k):
            proj = {}
            ok = True
            for w, f in seen.items():
                key = tuple(w[i] for i in sub)
                if proj.setdefault(key, f) != f:
                    ok = False
                    break
            if ok:
                return tuple(offsets[i] for i in sub), proj
    return offsets, {w: f for w, f in seen.items()}


def compare_rule(L: Layers, rule: Nca, widths, layer, trace_rows=None):
    """First disagreement between the rule's relation and the two-layer
    relation of periodic configurations, or None."""
    for W in widths:
        verts, nxt = _edges(L, W, layer)
        vset = set(verts)
        if trace_rows is not None:
            claimed = set(trace_rows(W))
            if claimed != vset:
                extra = sorted(claimed - vset)
                missing = sorted(vset - claimed)
                row = (extra or missing)[0]
                return {"width": W, "kind": "trace", "row": unroll(row),
                        "claimed": bool(extra)}
        for x in verts:
            want = set(nxt[x])
            got = set(rule.images(x))
            if got != want:
                bad = sorted(got - want)
                if bad:
                    y = bad[0]
                    kind = "rule-allows-invalid"
                else:
                    y = sorted(want - got)[0]
                    kind = "rule-misses-valid"
                lower, upper = (x, y) if layer == "north" else (y, x)
                return {"width": W, "kind": kind, "layer": layer,
                        "lower": unroll(lower), "upper": unroll(upper)}
    return None


def check_parallel(X: Sft, w=(0, 1), r=1, widths=(1, 2, 3, 4, 5), oracle=None, layer="north"):
    """Does a nondeterministic rule with horizontal radius r reproduce the
    two-layer relation of X, read along the layers of direction w?"""
    w = tuple(w)
    Y = X if w == (0, 1) else transform_sft(X, adapted_basis_rows(w).inverse())
    L = _layers_for(Y)
    if L is None:
        return ParallelCheck(w, r, layer, "inconclusive", witness={"reason": "patterns span more than two rows"})
    widths = tuple(widths)
    obs_widths = tuple(sorted(set(widths) | {2 * r + 1, 2 * r + 2}))
    offsets, seen = infer_rule(L, r, obs_widths, layer)
    nb, table = _smallest_neighborhood(offsets, seen)
    rule = Nca(Y.alphabet, nb, {k: v for k, v in table.items()})
    bad = compare_rule(L, rule, widths, layer)
    if bad is None:
        return ParallelCheck(w, r, layer, "presentable", rule, None, widths)
    return ParallelCheck(w, r, layer, "not-presentable", rule, bad, widths)


# ----------------------------------------------------- presentations

@dataclass
class PresentationVerdict:
    accepted: bool
    witness: Optional[dict] = None
    widths: tuple = ()

    def __str__(self):
        if self.accepted:
            return f"Accepted (widths {min(self.widths)}..{max(self.widths)})"
        return f"Rejected: {self.witness}"


def verify_presentation(pres: Presentation, widths=(1, 2, 3, 4, 5, 6)) -> PresentationVerdict:
    widths = tuple(widths)
    Z, _ = pres.blocked()
    if set(Z.alphabet) != set(pres.north.alphabet) or set(Z.alphabet) != set(pres.trace.alphabet):
        return PresentationVerdict(False, {"kind": "alphabet", "blocked": Z.alphabet}, widths)
    L = _layers_for(Z)
    if L is None:
        return PresentationVerdict(False, {"kind": "span", "reason": "blocked patterns span more than two rows"}, widths)

    def trace_rows(W):
        return cyclic_words(pres.trace, W)

    for W in widths:
        for layer, rule in (("north", pres.north), ("south", pres.south)):
            # images must stay inside the trace
            claimed = set(trace_rows(W))
            for x in sorted(claimed):
                for y in rule.images(x):
                    if y not in claimed:
                        return PresentationVerdict(False, {"width": W, "kind": "leaves-trace", "layer": layer,
                                                           "row": unroll(x), "image": unroll(y)}, widths)
        for layer, rule in (("north", pres.north), ("south", pres.south)):
            bad = compare_rule(L, rule, (W,), layer, trace_rows)
            if bad is not None:
                return PresentationVerdict(False, bad, widths)
    return PresentationVerdict(True, None, widths)


def validate_nca(trace: Sft, rule: Nca, widths=(1, 2, 3, 4, 5, 6)):
    """Accepted iff the rule maps periodic trace rows into the trace."""
    for W in widths:
        rows = set(cyclic_words(trace, W))
        for x in sorted(rows):
            for y in rule.images(x):
                if y not in rows:
                    return PresentationVerdict(False, {"width": W, "row": unroll(x), "image": unroll(y)}, tuple(widths))
    return PresentationVerdict(True, None, tuple(widths))
