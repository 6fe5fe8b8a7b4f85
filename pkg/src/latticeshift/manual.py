"""Construction rules, manuals and blueprints: applying rules, validating
and searching for blueprints, traces and blockings of manuals, bounded
property checks and slice-by-slice halfspace blueprints."""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .geometry import (Compl, Empty, Finite, Inter, Region, Section, Shift, Slab, box_points, in_box, norm2,
                       vadd, vsub, zero)


class ManualError(ValueError):
    pass


_ROLE = re.compile(r"^(R0|Rinf|R\d+|Rt\(\d+\))$")


def role_index(role):
    """Slice index of a role tag: R0 -> 0, Rt(3) or R3 -> 3, Rinf -> None."""
    if role is None or role == "Rinf":
        return None
    m = re.match(r"^R(?:t\()?(\d+)\)?$", role)
    return int(m.group(1)) if m else None


@dataclass(frozen=True)
class Rule:
    support: frozenset
    guard: Region
    role: Optional[str] = None
    count: Optional[int] = None
    name: str = ""

    def __post_init__(self):
        sup = frozenset(tuple(v) for v in self.support)
        object.__setattr__(self, "support", sup)
        if sup:
            d = len(next(iter(sup)))
            if zero(d) in sup:
                raise ManualError("the origin cannot be in a rule support")
            if self.guard.contains(zero(d)):
                raise ManualError("the origin cannot be in a rule guard")
            for v in sup:
                if not self.guard.contains(v):
                    raise ManualError(f"support point {v} lies outside the guard")
        if self.role is not None and not _ROLE.match(self.role):
            raise ManualError(f"bad role tag {self.role!r}")


@dataclass(frozen=True)
class Manual:
    rules: tuple
    dim: int
    provenance: str = "hand-written"
    radius: Optional[int] = None
    semantic: Optional[Callable] = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    def index(self, ref):
        if isinstance(ref, int):
            if not 0 <= ref < len(self.rules):
                raise ManualError(f"rule index {ref} out of range")
            return ref
        for i, r in enumerate(self.rules):
            if r.name == ref or (r.role == ref and not r.name):
                return i
        if str(ref).isdigit():
            return self.index(int(ref))
        raise ManualError(f"no rule named {ref!r}")

    def by_role(self, role):
        return [i for i, r in enumerate(self.rules) if r.role == role]


@dataclass(frozen=True)
class Blueprint:
    steps: tuple  # (rule index, position)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple((i, tuple(v)) for i, v in self.steps))

    def positions(self):
        return [v for _, v in self.steps]

    def __add__(self, other):
        return Blueprint(self.steps + other.steps)

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class BuildState:
    base: Region
    added: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "added", tuple(tuple(v) for v in self.added))

    def contains(self, v):
        return v in self.added or self.base.contains(v)

    def finite_set(self):
        fin = self.base.finite_points()
        if fin is None:
            return None
        return frozenset(fin) | frozenset(self.added)


def state_of(points=(), base=None):
    return BuildState(base if base is not None else Empty(), tuple(points))


@dataclass(frozen=True)
class StepFailure:
    side: str  # "support" | "guard" | "precondition"
    witness: tuple
    step: Optional[int] = None


@dataclass(frozen=True)
class GuardUnverified:
    box: tuple
    step: Optional[int] = None


def apply_rule(rule: Rule, v, state: BuildState, box):
    v = tuple(v)
    if state.contains(v):
        return StepFailure("precondition", v)
    for c in sorted(rule.support):
        p = vadd(v, c)
        if not state.contains(p):
            return StepFailure("support", p)
    shifted = Shift(v, rule.guard)
    for p in state.added:
        if not shifted.contains(p):
            return StepFailure("guard", p)
    fin = state.base.finite_points()
    if fin is not None:
        for p in sorted(fin):
            if not shifted.contains(p):
                return StepFailure("guard", p)
    else:
        lo, hi = box
        for p in box_points(lo, hi):
            if state.base.contains(p) and not shifted.contains(p):
                return StepFailure("guard", p)
        return GuardUnverified(box)
    return BuildState(state.base, state.added + (v,))


@dataclass(frozen=True)
class BuildResult:
    state: BuildState
    failure: object = None
    positioned: tuple = ()  # (positioned support, positioned guard) per step

    @property
    def ok(self):
        return self.failure is None

    @property
    def failed_step(self):
        return None if self.failure is None else self.failure.step


def validate_blueprint(manual: Manual, bp: Blueprint, state0: BuildState, box) -> BuildResult:
    state = state0
    positioned = []
    for k, (i, v) in enumerate(bp.steps):
        if not 0 <= i < len(manual.rules):
            raise ManualError(f"rule index {i} out of range at step {k}")
        rule = manual.rules[i]
        nxt = apply_rule(rule, v, state, box)
        if isinstance(nxt, StepFailure):
            return BuildResult(state, StepFailure(nxt.side, nxt.witness, k), tuple(positioned))
        if isinstance(nxt, GuardUnverified):
            # the guard held on the box; keep going but report the caveat
            state = BuildState(state.base, state.added + (v,))
            positioned.append((frozenset(vadd(v, c) for c in rule.support), Shift(v, rule.guard)))
            return BuildResult(state, GuardUnverified(box, k), tuple(positioned))
        positioned.append((frozenset(vadd(v, c) for c in rule.support), Shift(v, rule.guard)))
        state = nxt
    return BuildResult(state, None, tuple(positioned))


# ------------------------------------------------------------------- search

@dataclass(frozen=True)
class NotFound:
    reason: str  # "budget" | "exhausted"
    explored: int


def _position_order(points, base_pts):
    ref = list(base_pts)
    if not ref:
        return sorted(points, key=lambda p: (norm2(p), p))
    return sorted(points, key=lambda p: (min(norm2(vsub(p, q)) for q in ref), p))


def search_build(manual: Manual, state0: BuildState, target, budget=100000, scratch=(), box=None):
    """Breadth-first search for a blueprint whose positions cover target."""
    target = frozenset(tuple(t) for t in target)
    pool = target | frozenset(tuple(s) for s in scratch)
    base_fin = state0.finite_set()
    if base_fin is None:
        raise ManualError("search_build needs a finite starting set")
    if target & base_fin:
        raise ManualError("target overlaps the starting set")
    if box is None:
        pts = list(pool | base_fin) or [zero(manual.dim)]
        lo = tuple(min(p[i] for p in pts) - 1 for i in range(manual.dim))
        hi = tuple(max(p[i] for p in pts) + 1 for i in range(manual.dim))
        box = (lo, hi)
    start = frozenset(state0.added)
    queue = deque([(start, ())])
    seen = {start}
    explored = 0
    while queue:
        cur, steps = queue.popleft()
        if target <= cur:
            return Blueprint(steps)
        explored += 1
        if explored > budget:
            return NotFound("budget", explored)
        state = BuildState(state0.base, tuple(state0.added) + tuple(v for _, v in steps))
        free = [p for p in pool if p not in cur]
        for p in _position_order(free, base_fin | cur):
            for i, rule in enumerate(manual.rules):
                nxt = apply_rule(rule, p, state, box)
                if isinstance(nxt, BuildState):
                    key = cur | {p}
                    if key not in seen:
                        seen.add(key)
                        queue.append((key, steps + ((i, p),)))
                    break
    return NotFound("exhausted", explored)


# -------------------------------------------------------------------- traces

def _project(v):
    return v[:-1]


def trace_manual(manual: Manual, k, box):
    """Rules (C, D) with C in rows 0..k and rows 1..k inside D, cut at row 0.
    Returns (manual, warnings)."""
    if manual.dim < 2:
        raise ManualError("trace needs dimension at least 2")
    hi = k if k is not None else float("inf")
    rows = Slab(0, hi)
    upper = Slab(1, hi)
    out, warnings = [], []
    seen = set()
    for idx, rule in enumerate(manual.rules):
        if not all(rows.contains(c) for c in rule.support):
            continue
        lo_b, hi_b = box
        bad = None
        for p in box_points(lo_b, hi_b):
            if upper.contains(p) and not rule.guard.contains(p):
                bad = p
                break
        if bad is not None:
            continue
        if hi == float("inf") or hi > hi_b[-1]:
            warnings.append(f"rule {idx}: upper rows checked on the box only")
        sup = frozenset(_project(c) for c in rule.support if c[-1] == 0)
        guard = Section(rule.guard)
        key = (sup, _region_key(guard, _cut_box(box)))
        if key in seen:
            continue
        seen.add(key)
        out.append(Rule(sup, guard, rule.role, rule.count, rule.name))
    parent = manual.semantic

    def sem(C, D, extra=()):
        # lift to the parent: fill rows 1..k of both support and guard
        lifted_c = frozenset(c + (0,) for c in C)
        lifted_d = _LiftedGuard(D, hi)
        return parent(lifted_c, lifted_d, tuple(e + (0,) for e in extra), fill_upper=hi)

    return Manual(tuple(out), manual.dim - 1, "trace", manual.radius, sem if parent is not None else None), warnings


@dataclass(frozen=True)
class _LiftedGuard(Region):
    inner: Region
    top: float

    def contains(self, v):
        if v[-1] == 0:
            return self.inner.contains(v[:-1])
        return 1 <= v[-1] <= self.top


def _cut_box(box):
    lo, hi = box
    return (lo[:-1], hi[:-1])


def _region_key(region, box):
    return region.points_in_box(box)


# ----------------------------------------------------------------- blockings

def _simplify_shift(v, region):
    return region if not any(v) else Shift(v, region)


def block_manual(manual: Manual, N, box, max_rules=None):
    """The N-blocking: rules (C', D') such that N is directly buildable from
    D' + N by one blueprint over N with positioned supports inside C' + N."""
    N = sorted({tuple(n) for n in N})
    d = manual.dim
    diffs = frozenset(vsub(a, b) for a in N for b in N)
    out, seen, warnings = [], set(), []
    lo, hi = box
    box_pts = list(box_points(lo, hi))
    for order in itertools.permutations(N):
        for choice in itertools.product(range(len(manual.rules)), repeat=len(N)):
            rules = [manual.rules[i] for i in choice]
            ok = True
            needed = set()
            for i, (v, rule) in enumerate(zip(order, rules)):
                prior = set(order[:i])
                for p in prior:
                    if not rule.guard.contains(vsub(p, v)):
                        ok = False
                        break
                if not ok:
                    break
                for c in rule.support:
                    p = vadd(v, c)
                    if p in prior:
                        continue
                    if p in N:
                        ok = False
                        break
                    needed.add(p)
                if not ok:
                    break
            if not ok:
                continue
            parts = [_simplify_shift(vsub(v, n), rule.guard) for v, rule in zip(order, rules) for n in N]
            parts = list(dict.fromkeys(parts))
            extra = diffs - {zero(d)}
            if extra:
                parts.append(Compl(Finite(extra)))
            guard = parts[0] if len(parts) == 1 else Inter(*parts)
            if guard.contains(zero(d)):
                guard = Inter(guard, Compl(Finite([zero(d)])))
            # blocks inside the guard touching a needed cell
            support = {vsub(p, n) for p in needed for n in N}
            support = {u for u in support if u not in diffs and guard.contains(u)}
            if not all(any(vsub(p, n) in support for n in N) for p in needed):
                continue
            key = (frozenset(support), frozenset(p for p in box_pts if guard.contains(p)))
            if key in seen:
                continue
            seen.add(key)
            roles = {r.role for r in rules}
            role = rules[0].role if len(roles) == 1 else None
            out.append(Rule(frozenset(support), guard, role))
            if max_rules and len(out) >= max_rules:
                warnings.append("rule limit reached")
                return Manual(tuple(out), d, "blocking", manual.radius), warnings
    return Manual(tuple(out), d, "blocking", manual.radius), warnings


# --------------------------------------------------------- property checks

@dataclass
class PropertyReport:
    down: str = "satisfied"
    permissive: str = "satisfied"
    monotone_up: str = "assumed"
    witnesses: dict = field(default_factory=dict)
    semantic_checks: int = 0

    @property
    def ok(self):
        return self.down == "satisfied" and self.permissive == "satisfied"


def _points(region, pts):
    return frozenset(p for p in pts if region.contains(p))


def check_properties(manual: Manual, box, chains=None, samples=8, seed=0):
    """Bounded checks of the down and permissive properties; monotone-up only
    on explicitly given guard chains."""
    import random

    rep = PropertyReport()
    lo, hi = box
    d = manual.dim
    origin = zero(d)
    pts = [p for p in box_points(lo, hi)]
    wide_lo = tuple(2 * a for a in lo)
    wide_hi = tuple(2 * b for b in hi)
    wide = list(box_points(wide_lo, wide_hi))
    guards = [_points(r.guard, wide) for r in manual.rules]
    in_box_guards = [frozenset(p for p in g if in_box(p, box)) for g in guards]
    rng = random.Random(f"{seed}:down")

    def covered(C, Dpts):
        for j, r in enumerate(manual.rules):
            if r.support <= C and Dpts <= in_box_guards[j]:
                return True
        return False

    # down: restrictions of guards between support and guard
    for i, r in enumerate(manual.rules):
        g = sorted(in_box_guards[i] - r.support)
        for _ in range(samples):
            drop = {p for p in g if rng.random() < 0.5}
            Dp = in_box_guards[i] - drop
            if manual.semantic is not None:
                rep.semantic_checks += 1
                ans = manual.semantic(r.support, Finite(Dp))
                if ans is False:
                    rep.down = "violated"
                    rep.witnesses["down"] = (i, tuple(sorted(drop)))
                    break
            elif not covered(r.support, Dp):
                rep.down = "violated"
                rep.witnesses["down"] = (i, tuple(sorted(drop)))
                break
        if rep.down != "satisfied":
            break

    # permissive
    for i, (C, D) in enumerate((r.support, r.guard) for r in manual.rules):
        Dpts = in_box_guards[i]
        D0 = Dpts | {origin}
        for j, r2 in enumerate(manual.rules):
            Cp = r2.support
            gj = guards[j]
            for v in pts:
                if v == origin or v in Dpts:
                    continue
                if not all(D.contains(vadd(v, c)) for c in Cp):
                    continue
                if not all(vsub(p, v) in gj for p in D0):
                    continue
                widened = Dpts | {v}
                if covered(C, widened):
                    continue
                ans = None
                if manual.semantic is not None:
                    rep.semantic_checks += 1
                    ans = manual.semantic(C, D, (v,))
                if ans:
                    continue
                rep.permissive = "violated" if ans is not None or manual.semantic is None else "unknown"
                rep.witnesses["permissive"] = (i, j, v)
                break
            if rep.permissive != "satisfied":
                break
        if rep.permissive != "satisfied":
            break

    if chains:
        rep.monotone_up = "satisfied"
        for C, chain, top in chains:
            # every listed stage is covered, so the union must be as well
            for g in chain:
                if not covered(frozenset(C), _points(g, pts)):
                    break
            else:
                if not covered(frozenset(C), _points(top, pts)):
                    rep.monotone_up = "violated"
                    rep.witnesses["monotone_up"] = (tuple(sorted(C)),)
                    break
    return rep


# ------------------------------------------------------ halfspace blueprints

def _first_role(manual, role):
    idx = manual.by_role(role)
    return idx[0] if idx else None


def synthesize_halfspace_blueprint(manual: Manual, H, m: int, box):
    """Slice-by-slice blueprint building the top m+1 slices of the halfspace
    H (those with H-value r..r+m), starting from the empty set."""
    d = manual.dim
    if d > 2:
        raise ManualError("halfspace synthesis supports d <= 2")
    rinf = _first_role(manual, "Rinf")
    if rinf is None:
        raise ManualError("manual has no rule tagged Rinf")
    direction = tuple(int(a) for a in H.closed_form().direction)
    r0 = H.closed_form().r
    if d == 1:
        if direction != (1,):
            raise ManualError("d=1 synthesis expects direction (1)")
        depth = max((c[0] for c in manual.rules[rinf].support), default=0)
        steps = []
        for t in range(m + 1):
            pos = (r0 + m - t,)
            idx = None
            if t < depth:
                idx = _first_role(manual, f"R{t}")
                if idx is None:
                    idx = _first_role(manual, f"Rt({t})")
                if idx is None:
                    raise ManualError(f"manual has no rule tagged R{t}")
            else:
                idx = rinf
            steps.append((idx, pos))
        return Blueprint(tuple(steps))
    # d = 2: slices are the rows of the box, built from the top down
    lo, hi = box
    order_roles = sorted(
        range(len(manual.rules)),
        key=lambda i: (manual.rules[i].role != "Rinf", -(role_index(manual.rules[i].role) or 0), i),
    )
    targets = []
    for y in range(hi[1], lo[1] - 1, -1):
        row = [(x, y) for x in range(hi[0], lo[0] - 1, -1)
               if H.contains((x, y)) and 0 <= y <= m]
        targets.extend(row)
    state = BuildState(Empty(), ())
    steps = []
    for p in targets:
        for i in order_roles:
            nxt = apply_rule(manual.rules[i], p, state, box)
            if isinstance(nxt, BuildState):
                state = nxt
                steps.append((i, p))
                break
        else:
            raise ManualError(f"no rule of the manual applies at {p}")
    return Blueprint(tuple(steps))
