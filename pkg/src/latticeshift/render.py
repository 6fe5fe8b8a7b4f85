"""ASCII and binary PGM renderings of rectangular blocks.

Blocks are lists of rows, bottom row first; both renderings put the top row
first."""

from __future__ import annotations

_GLYPHS = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


class RenderError(ValueError):
    pass


def _check(rows):
    if not rows or not rows[0]:
        raise RenderError("empty block")
    w = len(rows[0])
    if any(len(r) != w for r in rows):
        raise RenderError("block is not rectangular")
    return w, len(rows)


def _alphabet(rows, alphabet):
    if alphabet is None:
        alphabet = sorted({s for r in rows for s in r})
    return list(alphabet)


def render_ascii(rows, alphabet=None) -> bytes:
    _check(rows)
    alph = _alphabet(rows, alphabet)
    if all(len(str(a)) == 1 for a in alph):
        glyph = {a: str(a) for a in alph}
    else:
        if len(alph) > len(_GLYPHS):
            raise RenderError(f"too many symbols for one character each ({len(alph)})")
        glyph = {a: _GLYPHS[i] for i, a in enumerate(alph)}
    lines = ["".join(glyph[s] for s in r) for r in reversed(rows)]
    return ("\n".join(lines) + "\n").encode("ascii")


def render_pgm(rows, alphabet=None) -> bytes:
    w, h = _check(rows)
    alph = _alphabet(rows, alphabet)
    n = len(alph)
    if n > 256:
        raise RenderError("PGM output supports at most 256 symbols")
    level = {a: (255 * i // (n - 1) if n > 1 else 0) for i, a in enumerate(alph)}
    body = bytes(level[s] for r in reversed(rows) for s in r)
    return f"P5\n{w} {h}\n255\n".encode("ascii") + body


def render_block(rows, fmt="ascii", alphabet=None) -> bytes:
    if fmt == "ascii":
        return render_ascii(rows, alphabet)
    if fmt == "pgm":
        return render_pgm(rows, alphabet)
    raise RenderError(f"unknown format {fmt!r}")


def parse_ascii(data: bytes):
    """Inverse of render_ascii for single-character symbols (bottom row first)."""
    lines = data.decode("ascii").splitlines()
    return [list(l) for l in reversed(lines)]
