"""Brute-force reference computations that share no code with the package.

Constraints are given as plain dicts {offset: symbol}; configurations as
dicts {cell: symbol}."""

import functools
import itertools


def ledrappier_ok(c):
    """Direct parity test on every complete triangle."""
    for (x, y), s in c.items():
        a, b = c.get((x + 1, y)), c.get((x, y + 1))
        if a is not None and b is not None and (int(s) + int(a) + int(b)) % 2:
            return False
    return True


def golden_ok(c):
    for (x, y), s in c.items():
        if s == "1" and ("1" in (c.get((x + 1, y)), c.get((x, y + 1)))):
            return False
    return True


def box_cells(w, h, x0=0, y0=0):
    return [(x, y) for y in range(y0, y0 + h) for x in range(x0, x0 + w)]


def brute_patterns(ok, cells, alphabet=("0", "1")):
    """All assignments on cells passing the local test."""
    out = []
    for syms in itertools.product(alphabet, repeat=len(cells)):
        c = dict(zip(cells, syms))
        if ok(c):
            out.append(c)
    return out


@functools.lru_cache(maxsize=None)
def torus_configs(ok_torus, W, H, alphabet=("0", "1")):
    """All valid configurations on the W x H torus, by backtracking over
    cells in row order with a full check at the end of each row."""
    cells = box_cells(W, H)
    out = []
    cur = {}

    def rec(i):
        if i == len(cells):
            if ok_torus(cur, W, H):
                out.append(dict(cur))
            return
        for s in alphabet:
            cur[cells[i]] = s
            if ok_torus(cur, W, H, partial=True):
                rec(i + 1)
        del cur[cells[i]]

    rec(0)
    return out


def ledrappier_torus_ok(c, W, H, partial=False):
    for (x, y), s in c.items():
        a, b = c.get(((x + 1) % W, y)), c.get((x, (y + 1) % H))
        if a is None or b is None:
            continue
        if (int(s) + int(a) + int(b)) % 2:
            return False
    return True


def golden_torus_ok(c, W, H, partial=False):
    for (x, y), s in c.items():
        if s == "1" and "1" in (c.get(((x + 1) % W, y)), c.get((x, (y + 1) % H))):
            return False
    return True


def torus_windows(configs, W, H, cells):
    """Distinct patterns seen through the window `cells` anywhere on the tori."""
    seen = set()
    for c in configs:
        for dx in range(W):
            for dy in range(H):
                seen.add(tuple(c[((x + dx) % W, (y + dy) % H)] for x, y in cells))
    return seen


def as_key(pattern, cells):
    return tuple(pattern[v] for v in cells)
