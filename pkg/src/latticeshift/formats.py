"""Text formats for SFTs, manuals, blueprints, presentations and blocks.

All formats are line based: `#` starts a comment, keywords open sections,
vectors are bracketed integer lists such as `[1,-2]`."""

from __future__ import annotations

import re
from pathlib import Path

from .geometry import GeometryError, format_region, format_vec, parse_region
from .manual import Blueprint, Manual, ManualError, Rule
from .presentation import Nca, NcaError, Presentation
from .sft import Pattern, Sft, SftError
from .transform import TransformError, parse_matrix


class FormatError(ValueError):
    def __init__(self, msg, line=None, col=None, path=None):
        self.line, self.col, self.path = line, col, path
        where = ""
        if path:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:{col or 1}: "
        super().__init__(where + msg)


_VEC = re.compile(r"^\[\s*-?\d+(\s*,\s*-?\d+)*\s*\]$|^\[\s*\]$")


def parse_vec(text, line=None):
    t = text.strip()
    if not _VEC.match(t):
        raise FormatError(f"bad vector {text!r}", line)
    body = t[1:-1].strip()
    return tuple(int(x) for x in body.split(",")) if body else ()


def _lines(text):
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            indent = len(line) - len(line.lstrip())
            yield n, indent + 1, line.strip()


def _split_vec_sym(s, n):
    m = re.match(r"^(\[[^\]]*\])\s+(\S+)$", s)
    if not m:
        raise FormatError(f"expected '[vector] symbol', got {s!r}", n)
    return parse_vec(m.group(1), n), m.group(2)


# ---------------------------------------------------------------------- SFT

def parse_sft(text, path=None) -> Sft:
    dim, alphabet, name, certs = None, None, "", []
    forb, cur = [], None
    try:
        for n, col, line in _lines(text):
            key, _, rest = line.partition(" ")
            if key == "dim":
                dim = int(rest)
            elif key == "alphabet":
                alphabet = tuple(rest.split())
            elif key == "name":
                name = rest.strip()
            elif key == "certificate":
                certs.append(rest.strip())
            elif key == "forbid":
                cur = {}
                forb.append((n, cur))
            elif line.startswith("["):
                if cur is None:
                    raise FormatError("cell outside a forbid block", n, col, path)
                v, s = _split_vec_sym(line, n)
                if v in cur:
                    raise FormatError(f"cell {v} repeated", n, col, path)
                cur[v] = s
            else:
                raise FormatError(f"unknown keyword {key!r}", n, col, path)
    except ValueError as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(str(e), path=path) from e
    if dim is None or alphabet is None:
        raise FormatError("missing 'dim' or 'alphabet'", path=path)
    for n, p in forb:
        if not p:
            raise FormatError("empty forbid block", n, path=path)
        if any(len(v) != dim for v in p):
            raise FormatError("vector dimension differs from 'dim'", n, path=path)
    try:
        return Sft(dim, alphabet, tuple(p for _, p in forb), frozenset(certs), name)
    except SftError as e:
        raise FormatError(str(e), path=path) from e


def format_sft(X: Sft, with_certificates=False) -> str:
    out = []
    if X.name:
        out.append(f"name {X.name}")
    out.append(f"dim {X.dim}")
    out.append("alphabet " + " ".join(X.alphabet))
    if with_certificates:
        for c in sorted(X.certificates):
            out.append(f"certificate {c}")
    for P in X.forbidden:
        out.append("forbid")
        for v, s in P.items():
            out.append(f"  {format_vec(v)} {s}")
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------- manuals

def parse_manual(text, path=None) -> Manual:
    dim, prov = None, "hand-written"
    rules = []
    cur = None

    def close():
        if cur is not None:
            if "guard" not in cur:
                raise FormatError("rule without guard", cur["line"], path=path)
            try:
                rules.append(Rule(frozenset(cur.get("support", ())), cur["guard"], cur.get("role"),
                                  cur.get("count"), cur.get("name", "")))
            except (ManualError, GeometryError) as e:
                raise FormatError(str(e), cur["line"], path=path) from e

    for n, col, line in _lines(text):
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if key == "dim":
                dim = int(rest)
            elif key == "provenance":
                prov = rest
            elif key == "rule":
                close()
                cur = {"line": n, "name": rest}
            elif cur is None:
                raise FormatError(f"unexpected {key!r} outside a rule", n, col, path)
            elif key == "support":
                cur["support"] = tuple(_parse_vec_list(rest, n))
            elif key == "guard":
                cur["guard"] = parse_region(rest)
            elif key == "role":
                cur["role"] = rest
            elif key == "count":
                cur["count"] = int(rest)
            else:
                raise FormatError(f"unknown keyword {key!r}", n, col, path)
        except GeometryError as e:
            raise FormatError(str(e), n, col, path) from e
        except ValueError as e:
            if isinstance(e, FormatError):
                raise
            raise FormatError(str(e), n, col, path) from e
    close()
    if dim is None:
        raise FormatError("missing 'dim'", path=path)
    return Manual(tuple(rules), dim, prov)


def _parse_vec_list(text, n):
    t = text.strip()
    if not (t.startswith("[") and t.endswith("]")):
        raise FormatError(f"expected a list of vectors, got {text!r}", n)
    inner = t[1:-1].strip()
    if not inner:
        return []
    return [parse_vec(m.group(0), n) for m in re.finditer(r"\[[^\[\]]*\]", inner)]


def format_manual(m: Manual) -> str:
    out = [f"dim {m.dim}", f"provenance {m.provenance}"]
    for i, r in enumerate(m.rules):
        out.append(f"rule {r.name}".rstrip())
        out.append("  support [" + ",".join(format_vec(v) for v in sorted(r.support)) + "]")
        out.append("  guard " + format_region(r.guard))
        if r.role:
            out.append(f"  role {r.role}")
        if r.count is not None:
            out.append(f"  count {r.count}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- blueprints

def parse_blueprint(text, manual: Manual = None, path=None) -> Blueprint:
    steps = []
    for n, col, line in _lines(text):
        m = re.match(r"^step\s+(\S+)\s+(\[.*\])$", line)
        if not m:
            raise FormatError("expected 'step <rule> [vector]'", n, col, path)
        ref, vec = m.group(1), parse_vec(m.group(2), n)
        if manual is not None:
            try:
                idx = manual.index(int(ref) if ref.isdigit() else ref)
            except ManualError as e:
                raise FormatError(str(e), n, col, path) from e
        else:
            if not ref.isdigit():
                raise FormatError("named rules need a manual", n, col, path)
            idx = int(ref)
        steps.append((idx, vec))
    return Blueprint(tuple(steps))


def format_blueprint(bp: Blueprint, manual: Manual = None) -> str:
    out = []
    for i, v in bp.steps:
        ref = str(i)
        if manual is not None:
            r = manual.rules[i]
            ref = r.name or r.role or str(i)
            if manual.index(ref) != i:
                ref = str(i)
        out.append(f"step {ref} {format_vec(v)}")
    return "\n".join(out) + ("\n" if out else "")


# ------------------------------------------------------------- presentations

def _parse_rule_section(lines, alphabet_hint=None):
    header, body = lines[0], lines[1:]
    n = header[0]
    try:
        nb = tuple(int(x) for x in header[2].split()[1:])
    except ValueError as e:
        raise FormatError("bad neighborhood", n) from e
    table = {}
    for ln, col, line in body:
        lhs, arrow, rhs = line.partition("->")
        if not arrow:
            raise FormatError("expected 'window -> symbols'", ln, col)
        w = tuple(lhs.split())
        if len(w) != len(nb):
            raise FormatError(f"window has {len(w)} symbols, neighborhood has {len(nb)}", ln, col)
        table[w] = tuple(rhs.split())
    return nb, table


def parse_presentation(text, original: Sft = None, path=None) -> Presentation:
    sections = {}
    cur = None
    header = {}
    for n, col, line in _lines(text):
        key = line.split()[0]
        if key == "end":
            cur = None
            continue
        if cur is not None:
            sections[cur].append((n, col, line))
            continue
        if key in ("trace", "north", "south"):
            cur = key
            sections[key] = [(n, col, line)]
        elif key in ("matrix", "block", "name"):
            header[key] = (n, line.partition(" ")[2].strip())
        else:
            raise FormatError(f"unknown keyword {key!r}", n, col, path)
    for k in ("matrix", "block"):
        if k not in header:
            raise FormatError(f"missing '{k}'", path=path)
    for k in ("trace", "north", "south"):
        if k not in sections:
            raise FormatError(f"missing '{k}' section", path=path)
    try:
        M = parse_matrix(header["matrix"][1])
    except (TransformError, ValueError) as e:
        raise FormatError(str(e), header["matrix"][0], path=path) from e
    k = int(header["block"][1])
    trace_text = "\n".join(l for _, _, l in sections["trace"][1:])
    if "dim" not in trace_text:
        trace_text = "dim 1\n" + trace_text
    trace = parse_sft(trace_text, path)
    rules = {}
    for key in ("north", "south"):
        nb, table = _parse_rule_section(sections[key])
        try:
            rules[key] = Nca(trace.alphabet, nb, table)
        except NcaError as e:
            raise FormatError(str(e), sections[key][0][0], path=path) from e
    name = header.get("name", (0, ""))[1]
    return Presentation(original, M, k, trace, rules["north"], rules["south"], name)


def format_presentation(p: Presentation) -> str:
    out = []
    if p.name:
        out.append(f"name {p.name}")
    out.append(f"matrix {p.matrix}")
    out.append(f"block {p.k}")
    out.append("trace")
    for line in format_sft(p.trace).splitlines():
        if line.startswith("name") or line.startswith("dim"):
            continue
        out.append("  " + line)
    out.append("end")
    for key, rule in (("north", p.north), ("south", p.south)):
        out.append(f"{key} " + " ".join(str(n) for n in rule.neighborhood))
        for w, syms in sorted(rule.full_table().items()):
            out.append("  " + " ".join(w) + " -> " + " ".join(syms))
        out.append("end")
    return "\n".join(out) + "\n"


# -------------------------------------------------------------------- blocks

def parse_block(text, path=None):
    """Rectangular grid, top row first; returns rows bottom first."""
    rows = []
    for n, col, line in _lines(text):
        if line == "block":
            continue
        rows.append(tuple(line.split()))
    if not rows:
        raise FormatError("empty block", path=path)
    w = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != w:
            raise FormatError("block is not rectangular", path=path)
    return [list(r) for r in reversed(rows)]


def format_block(rows) -> str:
    """rows bottom first -> text with the top row first."""
    return "\n".join(" ".join(r) for r in reversed(rows)) + "\n"


def block_to_pattern(rows, origin=(0, 0)):
    return Pattern({(origin[0] + j, origin[1] + i): s for i, r in enumerate(rows) for j, s in enumerate(r)})


def pattern_to_block(p: Pattern, fill="."):
    (x0, y0), (x1, y1) = _bbox(p)
    return [[p.get((x, y), fill) for x in range(x0, x1 + 1)] for y in range(y0, y1 + 1)]


def _bbox(p):
    xs = [c[0] for c in p.cells()]
    ys = [c[1] for c in p.cells()]
    return (min(xs), min(ys)), (max(xs), max(ys))


# ---------------------------------------------------------------- file helpers

def read_text(path):
    return Path(path).read_text()


def load_sft(path) -> Sft:
    return parse_sft(read_text(path), str(path))


def load_manual(path) -> Manual:
    return parse_manual(read_text(path), str(path))


def load_presentation(path, original=None) -> Presentation:
    return parse_presentation(read_text(path), original, str(path))
