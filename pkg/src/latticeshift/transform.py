"""Unimodular changes of basis acting on patterns and SFTs, bases adapted
to a slant direction, and convex block codings."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .geometry import GeometryError, norm2, vadd, vdot, vsub
from .sft import Pattern, Sft, language_of_set, resolve_oracle


class TransformError(ValueError):
    pass


# ---------------------------------------------------------------- matrices

def _det(rows):
    n = len(rows)
    m = [[Fraction(x) for x in r] for r in rows]
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return int(det)


def _inverse(rows):
    n = len(rows)
    m = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        p = next(i for i in range(c, n) if m[i][c] != 0)
        m[c], m[p] = m[p], m[c]
        pv = m[c][c]
        m[c] = [x / pv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    out = []
    for r in m:
        row = r[n:]
        if any(x.denominator != 1 for x in row):
            raise TransformError("matrix is not unimodular")
        out.append(tuple(int(x) for x in row))
    return tuple(out)


@dataclass(frozen=True)
class Unimodular:
    """Integer matrix with determinant +1 or -1, stored as rows. Acting on a
    row vector v gives v.M."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise TransformError("matrix must be square and nonempty")
        if abs(_det(rows)) != 1:
            raise TransformError(f"determinant of {rows} is not +-1")
        object.__setattr__(self, "rows", rows)

    @property
    def dim(self):
        return len(self.rows)

    @property
    def det(self):
        return _det(self.rows)

    def inverse(self):
        return Unimodular(_inverse(self.rows))

    def transpose(self):
        return Unimodular(tuple(zip(*self.rows)))

    def columns(self):
        return tuple(zip(*self.rows))

    def apply(self, v):
        v = tuple(v)
        return tuple(sum(v[i] * self.rows[i][j] for i in range(len(v))) for j in range(self.dim))

    def __matmul__(self, other):
        cols = other.columns()
        return Unimodular(tuple(tuple(vdot(r, c) for c in cols) for r in self.rows))

    def __str__(self):
        return ";".join(",".join(str(x) for x in r) for r in self.rows)


def identity(d):
    return Unimodular(tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))


def parse_matrix(text) -> Unimodular:
    try:
        rows = [tuple(int(x) for x in r.replace(" ", "").split(",")) for r in text.strip().split(";")]
    except ValueError as e:
        raise TransformError(f"bad matrix literal {text!r}") from e
    return Unimodular(tuple(rows))


def as_matrix(M):
    return M if isinstance(M, Unimodular) else Unimodular(M)


def mat_apply(M, p):
    """Move every cell of p by v -> v.M, keeping symbols."""
    M = as_matrix(M)
    if isinstance(p, Pattern):
        return Pattern((M.apply(v), s) for v, s in p.items())
    if isinstance(p, dict):
        return {M.apply(v): s for v, s in p.items()}
    return frozenset(M.apply(v) for v in p)


def transform_sft(X: Sft, M) -> Sft:
    M = as_matrix(M)
    if M.dim != X.dim:
        raise TransformError("matrix and SFT dimensions differ")
    return Sft(X.dim, X.alphabet, tuple(mat_apply(M, P) for P in X.forbidden), name=X.name)


# ------------------------------------------------------ slant-adapted bases

def _canonical_sign(v):
    for a in v:
        if a != 0:
            return v if a > 0 else tuple(-x for x in v)
    return v


def _euclid_columns(w):
    """Unimodular U (as columns) with w.U = (0,..,0,g)."""
    d = len(w)
    cur = list(w)
    cols = [[int(i == j) for i in range(d)] for j in range(d)]  # cols[j] = column j
    while sum(1 for a in cur if a != 0) > 1:
        nz = [i for i in range(d) if cur[i] != 0]
        piv = min(nz, key=lambda i: (abs(cur[i]), i))
        for i in nz:
            if i != piv:
                q = cur[i] // cur[piv]
                cur[i] -= q * cur[piv]
                cols[i] = [a - q * b for a, b in zip(cols[i], cols[piv])]
    piv = next(i for i in range(d) if cur[i] != 0)
    order = [i for i in range(d) if i != piv] + [piv]
    g = cur[piv]
    cols = [cols[i] for i in order]
    if g < 0:
        cols[-1] = [-a for a in cols[-1]]
        g = -g
    return [tuple(c) for c in cols], g


def _kernel_basis(w):
    d = len(w)
    if d == 2:
        g = math.gcd(w[0], w[1])
        return [_canonical_sign((w[1] // g, -w[0] // g))]
    cols, _ = _euclid_columns(w)
    kern = cols[:-1]
    if d == 3:
        from sympy import Matrix
        from sympy.matrices.normalforms import hermite_normal_form

        H = hermite_normal_form(Matrix(kern).T)  # columns span the kernel lattice
        cols = [tuple(int(x) for x in H.col(j)) for j in range(H.cols)]
        if len(cols) == len(kern):
            kern = cols
    return [_canonical_sign(k) for k in kern]


def minimal_dual_vector(w):
    """Smallest-norm integer u with u.w = 1; ties go to the lexicographically
    greatest candidate."""
    d = len(w)
    best = None
    t = 1
    while True:
        found = []
        for u in itertools.product(range(-t, t + 1), repeat=d):
            if vdot(u, w) == 1:
                found.append(u)
        if found:
            m = min(norm2(u) for u in found)
            if m <= t * t:
                cands = [u for u in found if norm2(u) == m]
                best = max(cands)
                return best
        t += 1


def basis_from_slant(w) -> Unimodular:
    """Matrix whose columns are a basis of the plane orthogonal to w followed
    by a vector u with u.w = 1."""
    w = tuple(int(a) for a in w)
    g = 0
    for a in w:
        g = math.gcd(g, a)
    if g != 1:
        raise GeometryError(f"slant direction {w} must have gcd 1")
    kern = _kernel_basis(w)
    u = minimal_dual_vector(w)
    cols = kern + [u]
    return Unimodular(tuple(tuple(c[i] for c in cols) for i in range(len(w))))


def adapted_basis_rows(w) -> Unimodular:
    """The same basis with basis vectors as rows: row-vector coordinates
    (j, i) correspond to the original point j.e1 + i.u, lying on layer i."""
    return basis_from_slant(w).transpose()


# ---------------------------------------------------------- block codings

def _symbol_name(cells, syms):
    if all(len(s) == 1 for s in syms):
        return "".join(syms)
    return ".".join(syms)


@dataclass(frozen=True)
class BlockCoding:
    shape: tuple
    symbols: tuple
    blocks: tuple  # Pattern on shape for each symbol

    def block_of(self, sym):
        return self.blocks[self.symbols.index(sym)]

    def symbol_of(self, block: Pattern):
        return self.symbols[self.blocks.index(block)]

    def encode(self, cells: dict) -> dict:
        """Blocked configuration on every position whose full block is known."""
        out = {}
        lookup = dict(zip(self.blocks, self.symbols))
        for v in cells:
            for n in self.shape:
                pos = vsub(v, n)
                if pos in out:
                    continue
                try:
                    blk = Pattern((m, cells[vadd(pos, m)]) for m in self.shape)
                except KeyError:
                    continue
                out[pos] = lookup.get(blk)
        return {k: s for k, s in out.items() if s is not None}

    def decode(self, blocked: dict) -> dict:
        out = {}
        for pos, sym in blocked.items():
            for n, s in self.block_of(sym).items():
                c = vadd(pos, n)
                if out.get(c, s) != s:
                    raise TransformError(f"inconsistent blocks at {c}")
                out[c] = s
        return out


def _is_vertical(N):
    d = len(N[0])
    k = len(N)
    return set(N) == {(0,) * (d - 1) + (j,) for j in range(k)}


def _cover(cells, N):
    """Assign each cell c a block position v with c - v in N."""
    cells = sorted(cells)
    if _is_vertical(N):
        k = len(N)
        y0 = min(c[-1] for c in cells)
        out = {}
        for c in cells:
            t = c[-1] - y0
            b = max(0, t - k + 1)
            out[c] = c[:-1] + (y0 + b,)
        return out
    todo = set(cells)
    out = {}
    while todo:
        cands = {}
        for c in todo:
            for n in N:
                cands.setdefault(vsub(c, n), set()).add(c)
        v = min(cands, key=lambda v: (-len(cands[v]), v))
        for c in cands[v]:
            out[c] = v
        todo -= cands[v]
    return out


def _consistent(b1, v1, b2, v2):
    for c, s in b1.items():
        t = b2.get(vadd(vsub(v1, v2), c))
        if t is not None and t != s:
            return False
    return True


def block_subshift(X: Sft, N, oracle=None):
    """N-blocking: the SFT over valid N-patterns recording x|v+N at v."""
    N = tuple(sorted({tuple(n) for n in N}))
    if not N:
        raise TransformError("blocking shape must be nonempty")
    oracle = resolve_oracle(X, oracle)
    valid, unknown = language_of_set(X, N, oracle)
    if unknown:
        raise TransformError(f"oracle left {len(unknown)} blocks undecided")
    blocks = tuple(sorted(valid, key=lambda p: tuple(p[n] for n in N)))
    symbols = tuple(_symbol_name(N, [p[n] for n in N]) for p in blocks)
    if len(set(symbols)) != len(symbols):
        raise TransformError("block symbol names collide")
    coding = BlockCoding(N, symbols, blocks)
    forb = set()
    zero = (0,) * X.dim
    if _is_vertical(N):
        # overlaps of blocks further apart follow from neighbouring ones
        diffs = [(0,) * (X.dim - 1) + (1,)] if len(N) > 1 else []
    else:
        diffs = sorted({vsub(a, b) for a in N for b in N} - {zero})
    for t in diffs:
        for i, a in enumerate(blocks):
            for j, b in enumerate(blocks):
                if not _consistent(a, zero, b, t):
                    forb.add(Pattern({zero: symbols[i], t: symbols[j]}))
    for P in X.forbidden:
        cov = _cover(P.cells(), N)
        positions = sorted(set(cov.values()))
        options = []
        for v in positions:
            req = {vsub(c, v): P[c] for c in P.cells() if cov[c] == v}
            opts = [i for i, b in enumerate(blocks) if all(b[n] == s for n, s in req.items())]
            options.append(opts)
        for combo in itertools.product(*options):
            ok = all(
                _consistent(blocks[combo[a]], positions[a], blocks[combo[b]], positions[b])
                for a in range(len(positions)) for b in range(a + 1, len(positions))
            )
            if ok:
                forb.add(Pattern({v: symbols[i] for v, i in zip(positions, combo)}))
    name = f"{X.name}[{len(N)}]" if X.name else ""
    return Sft(X.dim, symbols, tuple(forb), name=name), coding


def vertical_shape(d, k):
    return tuple((0,) * (d - 1) + (j,) for j in range(k))


def blocked_span(X: Sft, k: int) -> int:
    """Vertical extent, in block rows, of the blocked forbidden patterns."""
    wy = X.window_extent()[-1]
    return max(2 if k > 1 else 1, wy - k + 1)
