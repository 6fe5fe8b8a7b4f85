"""Nondeterministic cellular automata on rows and the presentation package
(basis change, vertical blocking, trace, north and south rules)."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Optional

from .sft import Sft
from .transform import Unimodular, block_subshift, transform_sft, vertical_shape


class NcaError(ValueError):
    pass


class NotUniform(NcaError):
    pass


@dataclass(frozen=True)
class Nca:
    """Local rule on rows: the new symbol at j is chosen from
    table[row[j + n] for n in neighborhood]."""

    alphabet: tuple
    neighborhood: tuple
    table: tuple  # sorted (window, symbols) pairs
    _lookup: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        alph = tuple(sorted(str(a) for a in self.alphabet))
        nb = tuple(int(n) for n in self.neighborhood)
        if len(set(nb)) != len(nb):
            raise NcaError("neighborhood has repeated offsets")
        items = self.table.items() if isinstance(self.table, dict) else self.table
        tab = {}
        for w, syms in items:
            w = tuple(str(s) for s in w)
            if len(w) != len(nb):
                raise NcaError(f"window {w} does not match the neighborhood")
            syms = tuple(sorted(set(str(s) for s in syms)))
            if not syms:
                raise NcaError(f"empty image for window {w}")
            for s in w + syms:
                if s not in alph:
                    raise NcaError(f"unknown symbol {s!r}")
            tab[w] = syms
        object.__setattr__(self, "alphabet", alph)
        object.__setattr__(self, "neighborhood", nb)
        object.__setattr__(self, "table", tuple(sorted(tab.items())))
        object.__setattr__(self, "_lookup", tab)

    def image(self, window):
        return self._lookup.get(tuple(window), self.alphabet)

    def image_at(self, row, j):
        W = len(row)
        return self.image(tuple(row[(j + n) % W] for n in self.neighborhood))

    def full_table(self):
        return {w: self.image(w) for w in itertools.product(self.alphabet, repeat=len(self.neighborhood))}

    @property
    def degrees(self):
        return sorted({len(v) for v in self.full_table().values()})

    @property
    def uniform(self):
        return len(self.degrees) == 1

    @property
    def degree(self):
        d = self.degrees
        if len(d) != 1:
            raise NotUniform("rule images have different sizes")
        return d[0]

    @property
    def deterministic(self):
        return self.uniform and self.degree == 1

    def images(self, row):
        """All rows reachable from a cyclic row in one step."""
        choices = [self.image_at(row, j) for j in range(len(row))]
        return [tuple(c) for c in itertools.product(*choices)]

    def radius(self):
        return max((abs(n) for n in self.neighborhood), default=0)


def nca_from_function(alphabet, neighborhood, fn):
    alphabet = tuple(sorted(alphabet))
    tab = {w: fn(*w) for w in itertools.product(alphabet, repeat=len(neighborhood))}
    return Nca(alphabet, tuple(neighborhood), tab)


@dataclass(frozen=True)
class Presentation:
    """An SFT presented, after the basis change v -> v.M^-1 and vertical
    k-blocking, as spacetimes of a north rule and a south rule over a 1-D
    trace."""

    original: Optional[Sft]
    matrix: Unimodular
    k: int
    trace: Sft
    north: Nca
    south: Nca
    name: str = ""

    def transformed(self):
        return transformed_sft(self.original, self.matrix)

    def blocked(self):
        return blocked_sft(self.original, self.matrix, self.k)

    @property
    def uniform(self):
        return self.north.uniform and self.south.uniform


@functools.lru_cache(maxsize=64)
def transformed_sft(X: Sft, M: Unimodular) -> Sft:
    return transform_sft(X, M.inverse())


@functools.lru_cache(maxsize=64)
def blocked_sft(X: Sft, M: Unimodular, k: int):
    Y = transformed_sft(X, M)
    return block_subshift(Y, vertical_shape(2, k))


def decode_block(pres: Presentation, rows, origin_row=0):
    """Turn a block of Z rows (bottom first, each a list of block symbols)
    into original-coordinate cells."""
    Z, coding = pres.blocked()
    cells = {}
    for i, row in enumerate(rows):
        for j, sym in enumerate(row):
            for (dx, dy), s in coding.block_of(sym).items():
                cells[(j + dx, origin_row + i + dy)] = s
    M = pres.matrix
    return {M.apply(v): s for v, s in cells.items()}, cells
