"""Horizontally periodic layers of 2-D SFTs whose forbidden patterns span at
most two rows, and periodic words of 1-D SFTs."""

from __future__ import annotations

import functools

from .sft import Sft, SftError, trim_graph


class LayerError(SftError):
    pass


def _split(Z: Sft):
    rows, pairs = [], []
    for P in Z.forbidden:
        cells = P.items()
        y0 = min(c[1] for c, _ in cells)
        norm = tuple(((c[0], c[1] - y0), s) for c, s in cells)
        span = max(c[1] for c, _ in norm) + 1
        if span > 2:
            raise LayerError("forbidden patterns span more than two rows")
        (rows if span == 1 else pairs).append(norm)
    return rows, pairs


class Layers:
    """Cyclic rows of width W and the two-row compatibility relation."""

    def __init__(self, Z: Sft):
        if Z.dim != 2:
            raise LayerError("layers need a 2-D SFT")
        self.Z = Z
        self.alphabet = Z.alphabet
        self.row_patterns, self.pair_patterns = _split(Z)
        self._graphs = {}
        self._trig = {}

    def _triggers(self, W):
        """Per column j and symbol: pattern occurrences on a width-W cylinder
        whose last cell in the row being assigned sits at column j."""
        if W in self._trig:
            return self._trig[W]
        trig = [dict() for _ in range(W)]
        seen = set()
        for P, kind in [(p, "row") for p in self.row_patterns] + [(p, "pair") for p in self.pair_patterns]:
            for a in range(W):
                up, low = {}, {}
                ok = True
                for (dx, dy), s in P:
                    tgt = up if (kind == "row" or dy == 1) else low
                    c = (a + dx) % W
                    if tgt.setdefault(c, s) != s:
                        ok = False
                        break
                if not ok or not up:
                    continue
                key = (kind, tuple(sorted(up.items())), tuple(sorted(low.items())))
                if key in seen:
                    continue
                seen.add(key)
                j = max(up)
                trig[j].setdefault((kind, up[j]), []).append((key[1], key[2]))
        self._trig[W] = trig
        return trig

    def _ok(self, trig, row, lower, j):
        for up, _ in trig[j].get(("row", row[j]), ()):
            if all(row[c] == s for c, s in up):
                return False
        if lower is not None:
            for up, low in trig[j].get(("pair", row[j]), ()):
                if all(row[c] == s for c, s in up) and all(lower[c] == s for c, s in low):
                    return False
        return True

    def rows(self, W):
        """All cyclic rows of width W avoiding the single-row patterns."""
        out = []
        row = [None] * W
        trig = self._triggers(W)

        def rec(j):
            if j == W:
                out.append(tuple(row))
                return
            for s in self.alphabet:
                row[j] = s
                if self._ok(trig, row, None, j):
                    rec(j + 1)
            row[j] = None

        rec(0)
        return out

    def successors(self, lower, W):
        out = []
        upper = [None] * W
        trig = self._triggers(W)

        def rec(j):
            if j == W:
                out.append(tuple(upper))
                return
            for s in self.alphabet:
                upper[j] = s
                if self._ok(trig, upper, lower, j):
                    rec(j + 1)
            upper[j] = None

        rec(0)
        return out

    def graph(self, W):
        """Trimmed graph of cyclic rows: (vertices, successor map)."""
        if W not in self._graphs:
            verts = self.rows(W)
            succ = {x: tuple(self.successors(x, W)) for x in verts}
            self._graphs[W] = trim_graph(verts, succ)
        return self._graphs[W]


@functools.lru_cache(maxsize=64)
def layers_of(Z: Sft) -> Layers:
    return Layers(Z)


def cyclic_words(X1: Sft, W):
    """Periodic points of period W of a 1-D SFT, as words of length W."""
    if X1.dim != 1:
        raise LayerError("cyclic words need a 1-D SFT")
    pats = [tuple((c[0], s) for c, s in P.items()) for P in X1.forbidden]
    out = []
    word = [None] * W

    def ok(j):
        for P in pats:
            for cx, s in P:
                if word[j] != s:
                    continue
                a = j - cx
                if all(word[(a + dx) % W] == t for dx, t in P):
                    return False
        return True

    def rec(j):
        if j == W:
            out.append(tuple(word))
            return
        for s in X1.alphabet:
            word[j] = s
            if ok(j):
                rec(j + 1)
        word[j] = None

    rec(0)
    return out


def row_trace_sft(Z: Sft) -> Sft:
    """The 1-D SFT given by the single-row constraints of Z."""
    rows, _ = _split(Z)
    forb = [{(c[0],): s for c, s in P} for P in rows]
    return Sft(1, Z.alphabet, tuple(forb), name=(Z.name + ".trace") if Z.name else "")


def window(row, j, offsets):
    W = len(row)
    return tuple(row[(j + o) % W] for o in offsets)


def unroll(row, extra=1):
    """Cyclic row written out with `extra` wrapped columns appended."""
    return tuple(row) + tuple(row[:extra])
