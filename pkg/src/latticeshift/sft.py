"""Subshifts of finite type: patterns, local validity, global-validity
oracles with three-valued verdicts, strip transfer graphs for d=2 and
follower sets."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .geometry import ball, bounding_box, box_points, norm2, vadd, vsub


class SftError(ValueError):
    pass


class OracleConfigError(SftError):
    pass


# ---------------------------------------------------------------- patterns

class Pattern:
    """A finite pattern: an immutable map from lattice vectors to symbols."""

    __slots__ = ("_items", "_map", "_hash")

    def __init__(self, cells=()):
        if isinstance(cells, Pattern):
            cells = cells._items
        elif isinstance(cells, dict):
            cells = cells.items()
        items = tuple(sorted((tuple(v), str(s)) for v, s in cells))
        self._items = items
        self._map = dict(items)
        if len(self._map) != len(items):
            raise SftError("pattern assigns a cell twice")
        self._hash = hash(items)

    @classmethod
    def _sorted(cls, items):
        """Build from items already sorted with distinct cells."""
        p = cls.__new__(cls)
        p._items = items
        p._map = dict(items)
        p._hash = hash(items)
        return p

    @property
    def support(self) -> frozenset:
        return frozenset(self._map)

    @property
    def dim(self):
        return len(self._items[0][0]) if self._items else None

    def items(self):
        return self._items

    def cells(self):
        return [v for v, _ in self._items]

    def get(self, v, default=None):
        return self._map.get(v, default)

    def __getitem__(self, v):
        return self._map[tuple(v)]

    def __contains__(self, v):
        return tuple(v) in self._map

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._map)

    def __eq__(self, other):
        return isinstance(other, Pattern) and self._items == other._items

    def __lt__(self, other):
        return self._items < other._items

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{v}:{s}" for v, s in self._items)
        return f"Pattern({{{body}}})"

    def as_dict(self):
        return dict(self._map)

    def shift(self, v):
        return Pattern((vadd(v, c), s) for c, s in self._items)

    def restrict(self, cells):
        cells = set(map(tuple, cells))
        return Pattern._sorted(tuple((c, s) for c, s in self._items if c in cells))

    def union(self, other):
        m = dict(self._map)
        for c, s in other.items():
            if m.get(c, s) != s:
                raise SftError(f"patterns disagree at {c}")
            m[c] = s
        return Pattern(m)

    def normalized(self):
        """Translate so that the lexicographically smallest cell is the origin."""
        if not self._items:
            return self
        return self.shift(tuple(-a for a in self._items[0][0]))


def pattern(cells) -> Pattern:
    return Pattern(cells)


# --------------------------------------------------------------------- SFT

@dataclass(frozen=True)
class Sft:
    dim: int
    alphabet: tuple
    forbidden: tuple
    certificates: frozenset = frozenset()
    name: str = ""

    def __post_init__(self):
        alph = tuple(str(a) for a in self.alphabet)
        if not alph:
            raise SftError("alphabet must be nonempty")
        if len(set(alph)) != len(alph):
            raise SftError("alphabet has repeated symbols")
        forb = set()
        for p in self.forbidden:
            p = Pattern(p)
            if len(p) == 0:
                raise SftError("forbidden patterns must have nonempty support")
            if p.dim != self.dim:
                raise SftError(f"forbidden pattern {p} has the wrong dimension")
            for _, s in p.items():
                if s not in alph:
                    raise SftError(f"unknown symbol {s!r} in forbidden pattern")
            forb.add(p.normalized())
        object.__setattr__(self, "alphabet", alph)
        object.__setattr__(self, "forbidden", tuple(sorted(forb)))
        object.__setattr__(self, "certificates", frozenset(self.certificates))

    def with_certificates(self, *certs):
        return Sft(self.dim, self.alphabet, self.forbidden, self.certificates | set(certs), self.name)

    def same_rules(self, other):
        return (self.dim, self.alphabet, self.forbidden) == (other.dim, other.alphabet, other.forbidden)

    def window_extent(self):
        """Per-coordinate extent (max size) of forbidden-pattern bounding boxes."""
        ext = [1] * self.dim
        for p in self.forbidden:
            lo, hi = bounding_box(p.cells())
            for i in range(self.dim):
                ext[i] = max(ext[i], hi[i] - lo[i] + 1)
        return tuple(ext)

    def window_radius(self):
        r2 = 0
        for p in self.forbidden:
            for a, b in itertools.combinations(p.cells(), 2):
                r2 = max(r2, norm2(vsub(a, b)))
        r = 0
        while r * r < r2:
            r += 1
        return r


def full_shift(dim, alphabet, name="full"):
    return Sft(dim, tuple(alphabet), (), name=name)


# -------------------------------------------------------- local validity

def _check_symbols(X, p):
    for _, s in p.items():
        if s not in X.alphabet:
            raise SftError(f"unknown symbol {s!r}")


def _violation_at(X, get, x, sym):
    """True if some forbidden occurrence containing cell x (holding sym) lies
    inside the assigned cells and matches."""
    for P in X.forbidden:
        for c, s in P.items():
            if s != sym:
                continue
            v = vsub(x, c)
            for c2, s2 in P.items():
                if get(vadd(v, c2)) != s2:
                    break
            else:
                return True
    return False


def locally_valid(X: Sft, p) -> bool:
    p = Pattern(p)
    _check_symbols(X, p)
    m = p.as_dict()
    return not any(_violation_at(X, m.get, c, s) for c, s in p.items())


def forbidden_occurrences(X: Sft, p):
    """All (anchor, forbidden pattern) occurrences fully inside p."""
    m = Pattern(p).as_dict()
    out = set()
    for P in X.forbidden:
        c0, s0 = P.items()[0]
        for x, s in m.items():
            if s != s0:
                continue
            v = vsub(x, c0)
            if all(m.get(vadd(v, c)) == t for c, t in P.items()):
                out.add((v, P))
    return sorted(out, key=lambda o: (o[0], o[1]))


def extend_locally(X: Sft, fixed, cells, order_symbols=None) -> Iterator[dict]:
    """Backtracking enumeration of locally valid assignments of `cells`
    extending `fixed` (which must itself be locally valid). Yields fresh
    dicts covering fixed and cells."""
    assign = dict(Pattern(fixed).as_dict()) if not isinstance(fixed, dict) else dict(fixed)
    cells = [tuple(c) for c in cells if tuple(c) not in assign]
    symbols = order_symbols or X.alphabet
    n = len(cells)
    get = assign.get

    def rec(i):
        if i == n:
            yield dict(assign)
            return
        x = cells[i]
        for s in symbols:
            assign[x] = s
            if not _violation_at(X, get, x, s):
                yield from rec(i + 1)
            del assign[x]

    return rec(0)


def _nearest_order(cells, support):
    support = list(support)
    if not support:
        return sorted(cells)
    return sorted(cells, key=lambda c: (min(norm2(vsub(c, s)) for s in support), c))


# ----------------------------------------------------------------- oracles

@dataclass(frozen=True)
class RadiusExtension:
    radius: int = 2


@dataclass(frozen=True)
class SafeSymbolFill:
    symbol: str = "0"


@dataclass(frozen=True)
class StripExact:
    height: int = 0


@dataclass(frozen=True)
class ExhaustiveTiny:
    bound: int = 1


@dataclass(frozen=True)
class Auto:
    """Pick the strongest applicable oracle: safe symbol, then strips for
    d=2, then radius extension."""

    radius: int = 2


def parse_oracle(text: str):
    text = (text or "auto").strip()
    name, _, arg = text.partition(":")
    name = name.lower()
    if name == "auto":
        return Auto(int(arg) if arg else 2)
    if name in ("radius", "radiusextension"):
        return RadiusExtension(int(arg) if arg else 2)
    if name in ("safe", "safesymbolfill"):
        return SafeSymbolFill(arg or "0")
    if name in ("strip", "stripexact"):
        return StripExact(int(arg) if arg else 0)
    if name in ("tiny", "exhaustive", "exhaustivetiny"):
        return ExhaustiveTiny(int(arg) if arg else 1)
    raise OracleConfigError(f"unknown oracle {text!r}")


def format_oracle(o) -> str:
    if isinstance(o, Auto):
        return f"auto:{o.radius}"
    if isinstance(o, RadiusExtension):
        return f"radius:{o.radius}"
    if isinstance(o, SafeSymbolFill):
        return f"safe:{o.symbol}"
    if isinstance(o, StripExact):
        return f"strip:{o.height}"
    if isinstance(o, ExhaustiveTiny):
        return f"tiny:{o.bound}"
    raise OracleConfigError(f"unknown oracle {o!r}")


@dataclass(frozen=True)
class Verdict:
    status: str  # "valid" | "invalid" | "unknown"
    radius: int | None = None
    basis: str = ""

    @property
    def valid(self):
        return self.status == "valid"

    @property
    def invalid(self):
        return self.status == "invalid"

    @property
    def unknown(self):
        return self.status == "unknown"

    def __str__(self):
        if self.status == "unknown":
            return f"Unknown({self.radius})"
        return "Valid" if self.valid else "Invalid"


VALID_EXACT = Verdict("valid", basis="exact")
INVALID = Verdict("invalid", basis="exact")


@functools.lru_cache(maxsize=None)
def safe_symbols(X: Sft) -> tuple:
    """Symbols s such that rewriting any cells to s never creates a forbidden
    occurrence. Tested window by window: every way of undoing s-cells of a
    forbidden pattern must itself already contain a forbidden occurrence."""
    out = []
    for s in X.alphabet:
        others = [a for a in X.alphabet if a != s]
        ok = True
        for P in X.forbidden:
            spos = [c for c, t in P.items() if t == s]
            if len(spos) == len(P):
                ok = False
                break
            for k in range(1, len(spos) + 1):
                for sub in itertools.combinations(spos, k):
                    for repl in itertools.product(others, repeat=k):
                        q = P.as_dict()
                        q.update(zip(sub, repl))
                        if locally_valid(X, q):
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            out.append(s)
    return tuple(out)


def _avo_certificate(X):
    for c in sorted(X.certificates):
        if c.startswith("avo:"):
            return c
    return None


def _safe_fill_valid(X, p, s):
    m = p.as_dict()

    def get(c):
        return m.get(c, s)

    for P in X.forbidden:
        for x in m:
            for c, _ in P.items():
                v = vsub(x, c)
                if all(get(vadd(v, c2)) == t for c2, t in P.items()):
                    return False
    return True


def resolve_oracle(X: Sft, oracle):
    if oracle is None:
        oracle = Auto()
    if isinstance(oracle, Auto):
        safe = safe_symbols(X)
        if safe:
            return SafeSymbolFill(safe[0])
        if X.dim == 2:
            return StripExact(0)
        return RadiusExtension(oracle.radius)
    if isinstance(oracle, SafeSymbolFill):
        if oracle.symbol not in safe_symbols(X):
            raise OracleConfigError(f"symbol {oracle.symbol!r} is not safe for this SFT")
    if isinstance(oracle, StripExact) and X.dim != 2:
        raise OracleConfigError("strip oracle needs dimension 2")
    return oracle


def _promote(X, radius):
    safe = safe_symbols(X)
    if safe:
        return None  # handled exactly by callers
    cert = _avo_certificate(X)
    if cert is not None:
        return Verdict("valid", radius, f"promoted: {cert} certificate")
    return Verdict("unknown", radius, "extension found")


def _extends_to(X, p, cells):
    cells = _nearest_order([c for c in cells if c not in p], p.support)
    return next(extend_locally(X, p.as_dict(), cells), None) is not None


def globally_valid(X: Sft, p, oracle=None) -> Verdict:
    p = Pattern(p)
    _check_symbols(X, p)
    if not locally_valid(X, p):
        return INVALID
    if len(p) == 0:
        return VALID_EXACT
    oracle = resolve_oracle(X, oracle)
    return _verdict(X, p, oracle)


@functools.lru_cache(maxsize=200000)
def _verdict(X, p, oracle):
    if isinstance(oracle, SafeSymbolFill):
        return VALID_EXACT if _safe_fill_valid(X, p, oracle.symbol) else INVALID
    if isinstance(oracle, StripExact):
        return Verdict("valid", basis="strip-exact") if _strip_accepts(X, p, oracle.height) else INVALID
    if isinstance(oracle, RadiusExtension):
        R = oracle.radius
        B = ball(R, X.dim)
        cells = {vadd(c, b) for c in p.support for b in B}
        radius = R
    elif isinstance(oracle, ExhaustiveTiny):
        lo, hi = bounding_box(p.cells())
        k = oracle.bound
        cells = set(box_points(tuple(a - k for a in lo), tuple(b + k for b in hi)))
        radius = k
    else:
        raise OracleConfigError(f"unknown oracle {oracle!r}")
    if not _extends_to(X, p, cells):
        return INVALID
    safe = safe_symbols(X)
    if safe:
        return VALID_EXACT if _safe_fill_valid(X, p, safe[0]) else INVALID
    return _promote(X, radius)


# ------------------------------------------------------------ strip graphs

@dataclass(frozen=True)
class StripGraph:
    """Transfer graph of a horizontal strip of height `height`: vertices are
    blocks of `width` consecutive columns, edges are locally valid overlaps
    of width+1 columns. Trimmed to vertices lying on bi-infinite paths."""

    height: int
    width: int
    vertices: tuple
    succ: dict = field(hash=False, compare=False)

    def edges(self):
        return [(a, b) for a in self.vertices for b in self.succ[a]]

    def pred(self):
        out = {v: [] for v in self.vertices}
        for a in self.vertices:
            for b in self.succ[a]:
                out[b].append(a)
        return out


def _block_to_cells(block, x0=0):
    # block: tuple of columns, each a tuple of symbols bottom to top
    cells = {}
    for i, col in enumerate(block):
        for j, s in enumerate(col):
            cells[(x0 + i, j)] = s
    return cells


def _cells_to_block(cells, x0, width, height):
    return tuple(tuple(cells[(x0 + i, j)] for j in range(height)) for i in range(width))


def trim_graph(vertices, succ):
    """Keep only vertices with both an infinite future and an infinite past."""
    alive = set(vertices)
    changed = True
    while changed:
        changed = False
        pred_count = {v: 0 for v in alive}
        for a in alive:
            for b in succ[a]:
                if b in alive:
                    pred_count[b] += 1
        for v in list(alive):
            if pred_count[v] == 0 or not any(b in alive for b in succ[v]):
                alive.discard(v)
                changed = True
    verts = tuple(v for v in vertices if v in alive)
    return verts, {v: tuple(b for b in succ[v] if b in alive) for v in verts}


@functools.lru_cache(maxsize=64)
def strip_graph(X: Sft, k: int) -> StripGraph:
    if X.dim != 2:
        raise SftError("strip graphs need dimension 2")
    wx, wy = X.window_extent()
    if k < 1:
        raise SftError("strip height must be positive")
    width = max(wx - 1, 1)
    cells = [(i, j) for i in range(width) for j in range(k)]
    verts = sorted(_cells_to_block(a, 0, width, k) for a in extend_locally(X, {}, cells))
    new_col = [(width, j) for j in range(k)]
    succ = {}
    for v in verts:
        out = []
        for a in extend_locally(X, _block_to_cells(v), new_col):
            out.append(_cells_to_block(a, 1, width, k))
        succ[v] = tuple(sorted(set(out)))
    vset = set(verts)
    succ = {v: tuple(b for b in succ[v] if b in vset) for v in verts}
    verts, succ = trim_graph(verts, succ)
    return StripGraph(k, width, verts, succ)


def _strip_rows(X, rows_lo, rows_hi, height):
    wy = X.window_extent()[1]
    total = max(height, rows_hi - rows_lo + 1 + 2 * (wy - 1))
    extra = total - (rows_hi - rows_lo + 1)
    below = (extra + 1) // 2
    return rows_lo - below, total


def _strip_setup(X, cells, height):
    (xmin, ymin), (xmax, ymax) = bounding_box(cells)
    y0, H = _strip_rows(X, ymin, ymax, height)
    G = strip_graph(X, H)
    n = max(1, xmax - xmin - G.width + 2)
    return G, xmin, y0, n


def _state_matches(state, p_by_col, x_start, y0):
    for i, col in enumerate(state):
        req = p_by_col.get(x_start + i)
        if req:
            for y, s in req:
                if col[y - y0] != s:
                    return False
    return True


def _strip_accepts(X, p, height):
    G, xmin, y0, n = _strip_setup(X, p.cells(), height)
    by_col = {}
    for (x, y), s in p.items():
        by_col.setdefault(x, []).append((y, s))
    cur = {v for v in G.vertices if _state_matches(v, by_col, xmin, y0)}
    for i in range(1, n):
        nxt = set()
        for v in cur:
            for b in G.succ[v]:
                if b not in nxt and _state_matches(b, by_col, xmin + i, y0):
                    nxt.add(b)
        cur = nxt
        if not cur:
            return False
    return bool(cur)


def _strip_language(X, S, height):
    """All strip-valid patterns on the finite set S (d=2)."""
    S = sorted(set(S))
    G, xmin, y0, n = _strip_setup(X, S, height)
    by_col = {}
    for x, y in S:
        by_col.setdefault(x, []).append(y)

    def proj(state, x_start, cols):
        out = []
        for i in cols:
            for y in by_col.get(x_start + i, ()):
                out.append(state[i][y - y0])
        return tuple(out)

    cur = {}
    for v in G.vertices:
        key = (v, proj(v, xmin, range(G.width)))
        cur[key] = True
    last = [G.width - 1]
    for i in range(1, n):
        col = {}
        nxt = {}
        for (v, pr) in cur:
            for b in G.succ[v]:
                tail = col.get(b)
                if tail is None:
                    tail = col[b] = proj(b, xmin + i, last)
                nxt[(b, pr + tail)] = True
        cur = nxt
    order = [(x, y) for x in sorted(by_col) for y in by_col[x]]
    pats = {Pattern(zip(order, pr)) for pr in {pr for (_, pr) in cur}}
    return sorted(pats)


# ------------------------------------------------------- languages on sets

def language_of_set(X: Sft, S, oracle=None):
    """(valid patterns, unknown patterns) on the finite set S."""
    S = sorted({tuple(c) for c in S})
    if not S:
        return [Pattern()], []
    oracle = resolve_oracle(X, oracle)
    return _language_cached(X, tuple(S), oracle)


@functools.lru_cache(maxsize=4096)
def _language_cached(X, S, oracle):
    if isinstance(oracle, StripExact):
        return _strip_language(X, S, oracle.height), []
    valid, unknown = [], []
    for a in extend_locally(X, {}, S):
        # cells are filled in sorted order
        p = Pattern._sorted(tuple(a.items()))
        v = _verdict(X, p, oracle)
        if v.valid:
            valid.append(p)
        elif v.unknown:
            unknown.append(p)
    return sorted(valid), sorted(unknown)


def language_box(X: Sft, box, oracle=None):
    lo, hi = box
    return language_of_set(X, box_points(lo, hi), oracle)


def box_of_size(dims):
    return (tuple(0 for _ in dims), tuple(n - 1 for n in dims))


@dataclass(frozen=True)
class FollowerSet:
    valid: frozenset
    unknown: frozenset


def follower_set(X: Sft, p, E, oracle=None) -> FollowerSet:
    p = Pattern(p)
    E = sorted({tuple(c) for c in E})
    if set(E) & p.support:
        raise SftError("follower domain overlaps the pattern support")
    oracle = resolve_oracle(X, oracle)
    valid, unknown = set(), set()
    for syms in itertools.product(X.alphabet, repeat=len(E)):
        q = Pattern(zip(E, syms))
        v = globally_valid(X, p.union(q), oracle)
        if v.valid:
            valid.add(q)
        elif v.unknown:
            unknown.add(q)
    return FollowerSet(frozenset(valid), frozenset(unknown))


def follower_table(X: Sft, D, oracle=None, target=(0, 0)):
    """Map each valid D-pattern to its set of valid symbols at target (one
    language computation on D plus the target)."""
    D = sorted({tuple(c) for c in D})
    target = tuple(target)
    valid, unknown = language_of_set(X, D + [target], oracle)
    table = {}
    for q in valid:
        table.setdefault(q.restrict(D), set()).add(q[target])
    return {k: frozenset(v) for k, v in table.items()}, bool(unknown)
