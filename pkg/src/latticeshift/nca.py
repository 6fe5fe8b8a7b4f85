"""Spacetimes of nondeterministic cellular automata: sampling, periodic
points, cycle decompositions of regular digraphs, factor maps onto full
shifts, cone entropy and the structure pipeline producing presentations."""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .avo import check_parallel, verify_presentation
from .layers import cyclic_words, layers_of, row_trace_sft
from .presentation import Nca, NcaError, NotUniform, Presentation, blocked_sft, transformed_sft
from .sft import Pattern, Sft, SftError, trim_graph
from .transform import adapted_basis_rows, blocked_span
from ._parallel import ordered_map, thread_count


class EmptySubshift(NcaError):
    pass


class SearchExhausted(NcaError):
    pass


def _rng(seed, key):
    return random.Random(f"{seed}:{key}")


# ------------------------------------------------------- cycle decomposition

def cycle_decomposition(vertices, edges):
    """Split the edge multiset of a digraph with all in- and out-degrees equal
    to k into cycles, by peeling off one perfect matching per round."""
    vertices = list(vertices)
    mult = Counter((a, b) for a, b in edges)
    outdeg, indeg = Counter(), Counter()
    for (a, b), m in mult.items():
        outdeg[a] += m
        indeg[b] += m
    degs = {outdeg[v] for v in vertices} | {indeg[v] for v in vertices}
    if len(degs) != 1:
        raise ValueError("every vertex needs the same in- and out-degree")
    k = degs.pop()
    cycles = []
    for _ in range(k):
        G = nx.Graph()
        left = [("L", v) for v in vertices]
        G.add_nodes_from(left)
        G.add_nodes_from(("R", v) for v in vertices)
        for (a, b), m in mult.items():
            if m > 0:
                G.add_edge(("L", a), ("R", b))
        matching = nx.bipartite.hopcroft_karp_matching(G, top_nodes=left)
        perm = {}
        for v in vertices:
            perm[v] = matching[("L", v)][1]
        for a, b in perm.items():
            mult[(a, b)] -= 1
        done = set()
        for v in vertices:
            if v in done:
                continue
            cyc = [v]
            done.add(v)
            w = perm[v]
            while w != v:
                cyc.append(w)
                done.add(w)
                w = perm[w]
            cycles.append(cyc)
    return cycles


def cycle_edges(cycle):
    return [(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]


# ------------------------------------------------------------ trace graphs

class TraceGraph:
    """Word graph of a 1-D SFT: states are words of length m-1 (m = window
    length, at least 1), trimmed to states on bi-infinite walks."""

    def __init__(self, X1: Sft):
        if X1.dim != 1:
            raise SftError("trace graph needs a 1-D SFT")
        self.X = X1
        m = X1.window_extent()[0]
        self.m = m
        L = max(m - 1, 1)
        self.L = L
        words = linear_words(X1, L)
        wordset = set(words)
        succ = {}
        for w in words:
            out = []
            for s in X1.alphabet:
                nxt = (w + (s,))[-L:]
                if _word_ok(X1, w + (s,)) and nxt in wordset:
                    out.append(nxt)
            succ[w] = tuple(out)
        self.states, self.succ = trim_graph(words, succ)
        self.index = {s: i for i, s in enumerate(self.states)}

    def adjacency(self):
        n = len(self.states)
        A = [[0] * n for _ in range(n)]
        for a in self.states:
            for b in self.succ[a]:
                A[self.index[a]][self.index[b]] += 1
        return A

    def count_words(self, length):
        """Number of words of the given length occurring on bi-infinite walks."""
        if length <= 0:
            return 1
        if length <= self.L:
            return len({s[:length] for s in self.states})
        vec = {s: 1 for s in self.states}
        for _ in range(length - self.L):
            nv = {}
            for a, c in vec.items():
                for b in self.succ[a]:
                    nv[b] = nv.get(b, 0) + c
            vec = nv
        return sum(vec.values())


def _word_ok(X1, word):
    for P in X1.forbidden:
        cells = P.items()
        span = max(c[0] for c, _ in cells) + 1
        for a in range(len(word) - span + 1):
            if all(word[a + c[0]] == s for c, s in cells):
                return False
    return True


def linear_words(X1, L):
    return [w for w in itertools.product(X1.alphabet, repeat=L) if _word_ok(X1, w)]


def _matmul(A, B):
    n = len(A)
    return [[sum(A[i][t] * B[t][j] for t in range(n) if A[i][t]) for j in range(n)] for i in range(n)]


def sample_cyclic_row(trace: Sft, W, rng):
    """Uniformly random periodic trace row of width W."""
    G = TraceGraph(trace)
    if W <= G.m + 1:
        rows = cyclic_words(trace, W)
        if not rows:
            raise EmptySubshift(f"no periodic rows of width {W}")
        return rows[rng.randrange(len(rows))]
    A = G.adjacency()
    n = len(A)
    powers = [None] * (W + 1)
    powers[0] = [[int(i == j) for j in range(n)] for i in range(n)]
    for t in range(1, W + 1):
        powers[t] = _matmul(powers[t - 1], A)
    total = sum(powers[W][i][i] for i in range(n))
    if total == 0:
        raise EmptySubshift(f"no periodic rows of width {W}")
    pick = rng.randrange(total)
    start = 0
    while pick >= powers[W][start][start]:
        pick -= powers[W][start][start]
        start += 1
    walk = [start]
    cur = start
    for t in range(W - 1, 0, -1):
        weights = [A[cur][b] * powers[t][b][start] for b in range(n)]
        pick = rng.randrange(sum(weights))
        b = 0
        while pick >= weights[b]:
            pick -= weights[b]
            b += 1
        walk.append(b)
        cur = b
    states = [G.states[i] for i in walk]
    return tuple(s[0] for s in states)


# ---------------------------------------------------------------- sampling

@dataclass
class Spacetime:
    pres: Presentation
    z_rows: list  # bottom first, cyclic rows of block symbols
    seed_index: int

    def layer_cells(self):
        """Cells of the transformed configuration covered by the rows."""
        _, coding = self.pres.blocked()
        cells = {}
        for i, row in enumerate(self.z_rows):
            for j, sym in enumerate(row):
                for (dx, dy), s in coding.block_of(sym).items():
                    cells[(j + dx, i + dy)] = s
        return cells

    def width(self):
        return len(self.z_rows[0])

    def layer_height(self):
        return len(self.z_rows) + self.pres.k - 1

    def layer_symbol(self, v):
        j, i = v
        if not 0 <= i < self.layer_height():
            return None
        W = self.width()
        row = min(i, len(self.z_rows) - 1)
        _, coding = self.pres.blocked()
        blk = coding.block_of(self.z_rows[row][j % W])
        return blk[(0, i - row)]

    def original_symbol(self, v, offset=0):
        """Symbol at an original-coordinate cell, via the horizontal period."""
        y = self.pres.matrix.inverse().apply(v)
        return self.layer_symbol((y[0], y[1] - offset))

    def layer_grid(self):
        H, W = self.layer_height(), self.width()
        return [[self.layer_symbol((j, i)) for j in range(W)] for i in range(H)]


def _grow(rule: Nca, row, rng):
    out = []
    W = len(row)
    for j in range(W):
        imgs = rule.image_at(row, j)
        out.append(imgs[rng.randrange(len(imgs))] if len(imgs) > 1 else imgs[0])
    return tuple(out)


def sample_spacetime(pres: Presentation, width, height, seed=0):
    """Rows of the blocked configuration: a uniformly random periodic trace row
    in the middle, grown upward by the north rule and downward by the south
    rule with independent choices per cell."""
    if width < 1 or height < 1:
        raise ValueError("width and height must be positive")
    mid = height // 2
    seed_row = sample_cyclic_row(pres.trace, width, _rng(seed, "trace"))
    rows = [None] * height
    rows[mid] = seed_row
    up = _rng(seed, "north")
    for i in range(mid + 1, height):
        rows[i] = _grow(pres.north, rows[i - 1], up)
    down = _rng(seed, "south")
    for i in range(mid - 1, -1, -1):
        rows[i] = _grow(pres.south, rows[i + 1], down)
    return Spacetime(pres, rows, mid)


def layers_needed(pres: Presentation, w, h):
    Minv = pres.matrix.inverse()
    ys = [Minv.apply((x, y))[1] for x in (0, w - 1) for y in (0, h - 1)]
    return min(ys), max(ys)


def sample_original_block(pres: Presentation, w, h, seed=0, period=None):
    """An original-coordinate w x h block cut from a sampled spacetime."""
    lo, hi = layers_needed(pres, w, h)
    zrows = max(1, hi - lo + 1 - (pres.k - 1))
    st = sample_spacetime(pres, period or max(w, 1), zrows, seed)
    rows = []
    for y in range(h):
        rows.append([st.original_symbol((x, y), lo) for x in range(w)])
    return rows, st


# ---------------------------------------------------------- periodic points

@dataclass
class PeriodicPoint:
    pres: Presentation
    width: int
    period: int
    z_rows: list  # one vertical period of blocked rows, bottom first

    @property
    def lattice(self):
        """Period lattice basis in original coordinates."""
        M = self.pres.matrix
        return (M.apply((self.width, 0)), M.apply((0, self.period)))

    @property
    def index(self):
        (a, b), (c, d) = self.lattice
        return abs(a * d - b * c)

    def layer_symbol(self, v):
        j, i = v
        _, coding = self.pres.blocked()
        row = self.z_rows[i % self.period]
        return coding.block_of(row[j % self.width])[(0, 0)]

    def symbol(self, v):
        y = self.pres.matrix.inverse().apply(v)
        return self.layer_symbol(y)

    def fundamental_domain(self):
        M = self.pres.matrix
        return {M.apply((j, i)): self.layer_symbol((j, i))
                for i in range(self.period) for j in range(self.width)}

    def verify(self):
        """Every forbidden pattern is absent everywhere (checked on one
        fundamental domain of anchors)."""
        X = self.pres.original
        for v in self.fundamental_domain():
            for P in X.forbidden:
                if all(self.symbol(tuple(a + b for a, b in zip(v, c))) == s for c, s in P.items()):
                    return False
        return True

    def contains(self, p: Pattern):
        return all(self.symbol(v) == s for v, s in p.items())

    def block(self, w, h, origin=(0, 0)):
        return [[self.symbol((origin[0] + x, origin[1] + y)) for x in range(w)] for y in range(h)]


def _shortest_trace_row(trace: Sft, max_width=16):
    for W in range(1, max_width + 1):
        rows = cyclic_words(trace, W)
        if rows:
            return min(rows)
    raise EmptySubshift("trace has no periodic row")


def periodic_point(pres: Presentation, row=None, max_width=16):
    """Totally periodic point: a periodic trace row iterated under the
    section taking the first symbol of every rule image."""
    if row is None:
        row = _shortest_trace_row(pres.trace, max_width)
    row = tuple(row)
    seen = {}
    orbit = []
    x = row
    while x not in seen:
        seen[x] = len(orbit)
        orbit.append(x)
        x = tuple(pres.north.image_at(x, j)[0] for j in range(len(x)))
    start = seen[x]
    cyc = orbit[start:]
    return PeriodicPoint(pres, len(row), len(cyc), list(cyc))


def dense_periodic_point(pres: Presentation, p: Pattern, max_width=8, budget=200000):
    """Totally periodic point containing p (original coordinates)."""
    if not pres.uniform:
        raise NotUniform("dense periodic points need uniform north and south rules")
    X = pres.original
    from .sft import locally_valid

    if not locally_valid(X, p):
        raise ValueError("pattern is not locally valid")
    Minv = pres.matrix.inverse()
    ycells = {Minv.apply(v): s for v, s in p.items()}
    is_ = [c[1] for c in ycells]
    i0 = min(is_)
    Z, coding = pres.blocked()
    k = pres.k
    nrows = max(1, max(is_) - i0 + 1 - (k - 1))
    L = layers_of(Z)
    tried = []
    for W in range(1, max_width + 1):
        req = {}
        clash = False
        for (j, i), s in ycells.items():
            key = (j % W, i - i0)
            if req.setdefault(key, s) != s:
                clash = True
        if clash:
            continue
        verts, succ = L.graph(W)
        if not verts:
            continue
        tried.append(W)

        def fits(row, r):
            for jj in range(W):
                blk = coding.block_of(row[jj])
                for dy in range(k):
                    want = req.get((jj, r + dy))
                    if want is not None and blk[(0, dy)] != want:
                        return False
            return True

        pred = {v: [] for v in verts}
        for a in verts:
            for b in succ[a]:
                pred[b].append(a)
        work = 0
        # short vertical periods first: the pattern's rows folded mod p
        for p in range(1, nrows):
            folded = {}
            for (jj, r), s in req.items():
                if folded.setdefault((jj, r % p), s) != s:
                    break
            else:
                cyc, work = _closed_walk(verts, succ, p, lambda v, t: fits(v, t) and all(
                    fits(v, t + p * m) for m in range(1, nrows // p + 1)), work, budget, tried)
                if cyc is not None:
                    return PeriodicPoint(pres, W, p, _rotate(cyc, i0))
        stack = [[v] for v in reversed(verts) if fits(v, 0)]
        while stack:
            path = stack.pop()
            work += 1
            if work > budget:
                raise SearchExhausted(f"budget exhausted after widths {tried}")
            if len(path) == nrows:
                back = _bfs_path(succ, path[-1], path[0])
                if back is not None:
                    cyc = path + back[1:-1]
                    return PeriodicPoint(pres, W, len(cyc), _rotate(cyc, i0))
                continue
            for b in reversed(succ[path[-1]]):
                if fits(b, len(path)):
                    stack.append(path + [b])
    raise SearchExhausted(f"no periodic point found for widths {tried}")


def _rotate(cyc, i0):
    """Rows were indexed from i0; rotate so that list position 0 is row 0."""
    shift = i0 % len(cyc)
    return cyc[-shift:] + cyc[:-shift] if shift else list(cyc)


def _closed_walk(verts, succ, p, fits, work, budget, tried):
    """A closed walk v_0 -> ... -> v_{p-1} -> v_0 with fits(v_t, t)."""
    stack = [[v] for v in reversed(verts) if fits(v, 0)]
    while stack:
        path = stack.pop()
        work += 1
        if work > budget:
            raise SearchExhausted(f"budget exhausted after widths {tried}")
        if len(path) == p:
            if path[0] in succ[path[-1]]:
                return path, work
            continue
        for b in reversed(succ[path[-1]]):
            if fits(b, len(path)):
                stack.append(path + [b])
    return None, work


def _bfs_path(succ, a, b):
    """Shortest walk a -> ... -> b with at least one edge."""
    prev = {}
    q = deque()
    for c in succ[a]:
        if c not in prev:
            prev[c] = a
            q.append(c)
    while q:
        v = q.popleft()
        if v == b:
            path = [b]
            cur = b
            while True:
                cur = prev[cur]
                path.append(cur)
                if cur == a and len(path) > 1:
                    break
            return list(reversed(path))
        for c in succ[v]:
            if c not in prev:
                prev[c] = v
                q.append(c)
    return None


# -------------------------------------------------------------- factor maps

def factor_map(rule: Nca, rows, ordering=None):
    """Choice digits: for each row after the first, the position of each symbol
    in the image list of its neighborhood in the row below."""
    if not rule.uniform:
        raise NotUniform("choice digits need a uniform rule")
    out = []
    for t in range(1, len(rows)):
        below, cur = rows[t - 1], rows[t]
        digits = []
        for j in range(len(cur)):
            imgs = rule.image_at(below, j)
            if ordering is not None:
                imgs = ordering(imgs)
            if cur[j] not in imgs:
                raise ValueError(f"row {t} is not produced by the rule at column {j}")
            digits.append(imgs.index(cur[j]))
        out.append(tuple(digits))
    return out


@dataclass(frozen=True)
class FactorNotFound:
    tried: int


def factor_preimage(rule: Nca, trace: Sft, target, budget=64):
    """Rows whose choice digits equal target: a trace row at the bottom, then
    each symbol chosen by its digit."""
    if not rule.uniform:
        raise NotUniform("choice digits need a uniform rule")
    h = len(target)
    W = len(target[0])
    rows_tried = 0
    trace_rows = cyclic_words(trace, W)
    allowed = set(trace_rows)
    for bottom in trace_rows:
        rows_tried += 1
        if rows_tried > budget:
            break
        rows = [bottom]
        ok = True
        for t in range(h):
            below = rows[-1]
            new = tuple(rule.image_at(below, j)[target[t][j]] for j in range(W))
            if new not in allowed:
                ok = False
                break
            rows.append(new)
        if ok:
            return rows
    return FactorNotFound(rows_tried)


# ------------------------------------------------------------------ entropy

@dataclass(frozen=True)
class ConeEstimate:
    height: int
    cells: int
    count: int
    estimate: float
    limit: float


def entropy_cone(rule: Nca, trace: Sft, k: int) -> ConeEstimate:
    """log(#cone patterns)/#cone cells for the cone of height k over a
    bottom segment of length 2rk+1."""
    n = rule.degree
    r = rule.radius()
    cells = sum(2 * r * (k - i) + 1 for i in range(k + 1))
    bottom = 2 * r * k + 1
    G = TraceGraph(trace)
    count = G.count_words(bottom) * n ** (cells - bottom)
    return ConeEstimate(k, cells, count, math.log(count) / cells, math.log(n))


# -------------------------------------------------------------- the pipeline

DEFAULT_SLANTS = ((1, 1), (1, 2), (1, 3), (2, 3), (1, 4), (0, 1), (1, 0))


@dataclass
class PipelineResult:
    presentation: Optional[Presentation]
    transcript: list = field(default_factory=list)

    @property
    def found(self):
        return self.presentation is not None


def _attempt(X, w, k, r, widths):
    M = adapted_basis_rows(w)
    Y = transformed_sft(X, M)
    span = blocked_span(Y, k)
    if span > 2:
        return None, f"w={w} k={k}: blocked patterns span {span} rows, skipped"
    Z, _ = blocked_sft(X, M, k)
    north = check_parallel(Z, (0, 1), r, widths, layer="north")
    if north.verdict != "presentable":
        return None, f"w={w} k={k}: north {north.verdict} {north.witness}"
    south = check_parallel(Z, (0, 1), r, widths, layer="south")
    if south.verdict != "presentable":
        return None, f"w={w} k={k}: south {south.verdict} {south.witness}"
    trace = row_trace_sft(Z)
    pres = Presentation(X, M, k, trace, north.rule, south.rule, X.name)
    verdict = verify_presentation(pres, widths)
    if verdict.accepted:
        return pres, f"w={w} k={k}: verified, north {north.rule.neighborhood} south {south.rule.neighborhood}"
    return None, f"w={w} k={k}: presentation rejected {verdict.witness}"


def structure_pipeline(X: Sft, slants=DEFAULT_SLANTS, kmax=4, r=2, widths=(1, 2, 3, 4, 5)):
    """Try block heights in increasing order and, for each, the slant
    candidates in order; the first verified presentation wins."""
    if X.dim != 2:
        raise ValueError("the pipeline handles d = 2")
    transcript = []
    for k in range(1, kmax + 1):
        cands = [tuple(w) for w in slants]
        if thread_count() == 1:
            results = []
            for w in cands:
                results.append(_attempt(X, w, k, r, widths))
                if results[-1][0] is not None:
                    break
        else:
            results = ordered_map(lambda w: _attempt(X, w, k, r, widths), cands)
        for pres, line in results:
            transcript.append(line)
            if pres is not None:
                return PipelineResult(pres, transcript)
    return PipelineResult(None, transcript)
