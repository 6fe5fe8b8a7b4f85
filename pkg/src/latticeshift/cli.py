"""Command-line entry point.

Exit codes: 0 on success or an accepting verdict, 1 on a negative verdict
(rejected, not uniform, not found) with its witness printed, 2 on bad input
or configuration."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import formats
from .avo import certify, check_avo, check_uni, extract_avomanual, verify_presentation
from .formats import FormatError
from .geometry import GeometryError, box_points, format_region, format_vec, parse_region
from .manual import (ManualError, NotFound, block_manual, check_properties, search_build, state_of,
                     synthesize_halfspace_blueprint, trace_manual, validate_blueprint)
from .measure import (UniformSampler, check_all_chains, count_patterns, entropy_box, mme_check,
                      unimeasure_eval)
from .nca import (EmptySubshift, SearchExhausted, DEFAULT_SLANTS, FactorNotFound, dense_periodic_point,
                  entropy_cone, factor_map, factor_preimage, periodic_point, sample_original_block,
                  sample_spacetime, structure_pipeline)
from .presentation import NcaError, NotUniform
from .render import RenderError, render_block
from .sft import OracleConfigError, SftError, parse_oracle
from .transform import TransformError, block_subshift, parse_matrix, transform_sft


class ConfigError(Exception):
    pass


class Outcome:
    """Collects report lines and a JSON mirror."""

    def __init__(self):
        self.lines = []
        self.data = {}
        self.code = 0
        self.payload = None  # raw bytes written instead of the report

    def say(self, line=""):
        self.lines.append(str(line))

    def fail(self, line=None):
        self.code = 1
        if line:
            self.say(line)


def _shape(text):
    try:
        return formats._parse_vec_list(text, None)
    except FormatError as e:
        raise ConfigError(str(e)) from e


def _box(n, d=2):
    return ((0,) * d, (n - 1,) * d)


def _centered(n, d):
    return ((-n,) * d, (n,) * d)


def _oracle(args):
    return parse_oracle(args.oracle)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=str) if isinstance(x, (set, frozenset)) else items
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    return str(x)


# ---------------------------------------------------------------- commands

def cmd_avo_check(args, out):
    X = formats.load_sft(args.sft)
    rep = check_avo(X, args.radius, _oracle(args))
    for s in rep.shapes:
        win = "" if s.window is None else " window " + " ".join(format_vec(v) for v in sorted(s.window))
        out.say(f"{format_region(s.shape)}: {s.status}{win}")
    out.data = {"radius": args.radius, "all_stabilized": rep.all_stabilized,
                "shapes": [{"shape": format_region(s.shape), "status": s.status} for s in rep.shapes]}
    if rep.all_stabilized:
        out.say(f"all {len(rep.shapes)} shapes stabilized at radius {args.radius}")
    else:
        out.fail(f"{len(rep.failures())} of {len(rep.shapes)} shapes not stabilized")


def cmd_avo_extract(args, out):
    X = formats.load_sft(args.sft)
    m, warnings = extract_avomanual(X, args.radius, _oracle(args), uni=args.uni)
    text = formats.format_manual(m)
    for w in warnings:
        out.say(f"# warning: {w}")
    _emit_text(args, out, text)
    out.data = {"rules": len(m.rules), "warnings": warnings}


def cmd_uni_check(args, out):
    X = formats.load_sft(args.sft)
    rep = check_uni(X, args.radius, _oracle(args))
    out.data = {"radius": args.radius, "uniform": rep.uniform}
    if rep.uniform:
        counts = sorted({s.count for s in rep.shapes})
        out.say(f"uniform at radius {args.radius}; follower counts {counts}")
        return
    w = rep.first_witness()
    if w is None:
        out.fail("inconclusive: the oracle left patterns undecided")
        return
    (p1, c1), (p2, c2) = w.witness
    out.data["witness"] = {"shape": format_region(w.shape), "patterns": [str(p1), str(p2)], "counts": [c1, c2]}
    out.fail(f"not uniform on {format_region(w.shape)}: {_cells(p1)} has {c1} followers, {_cells(p2)} has {c2}")


def _manual_box(args, d):
    return _centered(args.box, d)


def cmd_manual_validate(args, out):
    m = formats.load_manual(args.manual)
    bp = formats.parse_blueprint(Path(args.blueprint).read_text(), m, args.blueprint)
    res = validate_blueprint(m, bp, state_of(), _manual_box(args, m.dim))
    built = sorted(res.state.added)
    out.data = {"ok": res.ok, "built": built}
    if res.ok:
        out.say("valid; builds " + " ".join(format_vec(v) for v in built))
    else:
        out.data["failure"] = str(res.failure)
        out.fail(f"step {res.failed_step} fails: {res.failure}")


def cmd_manual_search(args, out):
    m = formats.load_manual(args.manual)
    target = _shape(args.target)
    res = search_build(m, state_of(), target, args.budget, box=_manual_box(args, m.dim))
    if isinstance(res, NotFound):
        out.data = {"found": False, "reason": res.reason, "explored": res.explored}
        out.fail(f"not found ({res.reason}, {res.explored} states explored)")
        return
    out.data = {"found": True, "steps": len(res)}
    _emit_text(args, out, formats.format_blueprint(res, m))


def cmd_manual_trace(args, out):
    m = formats.load_manual(args.manual)
    k = None if args.k == "inf" else int(args.k)
    tm, warnings = trace_manual(m, k, _manual_box(args, m.dim))
    for w in warnings:
        out.say(f"# warning: {w}")
    _emit_text(args, out, formats.format_manual(tm))


def cmd_manual_block(args, out):
    m = formats.load_manual(args.manual)
    bm, warnings = block_manual(m, _shape(args.shape), _manual_box(args, m.dim), args.max_rules)
    for w in warnings:
        out.say(f"# warning: {w}")
    _emit_text(args, out, formats.format_manual(bm))


def cmd_manual_props(args, out):
    m = formats.load_manual(args.manual)
    rep = check_properties(m, _manual_box(args, m.dim), samples=args.samples, seed=args.seed)
    out.data = {"down": rep.down, "permissive": rep.permissive, "monotone_up": rep.monotone_up,
                "witnesses": rep.witnesses}
    out.say(f"down: {rep.down}")
    out.say(f"permissive: {rep.permissive}")
    out.say(f"monotone-up: {rep.monotone_up}")
    for k, v in sorted(rep.witnesses.items()):
        out.say(f"witness {k}: {v}")
    if not rep.ok:
        out.fail()


def cmd_manual_synth(args, out):
    m = formats.load_manual(args.manual)
    H = parse_region(args.halfspace)
    bp = synthesize_halfspace_blueprint(m, H, args.depth, _manual_box(args, m.dim))
    res = validate_blueprint(m, bp, state_of(), _manual_box(args, m.dim))
    out.data = {"steps": len(bp), "valid": res.ok}
    _emit_text(args, out, formats.format_blueprint(bp, m))
    if not res.ok:
        out.fail(f"# synthesized blueprint fails at step {res.failed_step}: {res.failure}")


def cmd_transform(args, out):
    X = formats.load_sft(args.sft)
    M = parse_matrix(args.matrix)
    _emit_text(args, out, formats.format_sft(transform_sft(X, M)))


def cmd_block(args, out):
    X = formats.load_sft(args.sft)
    Z, coding = block_subshift(X, _shape(args.shape), _oracle(args))
    out.data = {"symbols": len(Z.alphabet), "forbidden": len(Z.forbidden)}
    _emit_text(args, out, formats.format_sft(Z))


def _slants(text):
    if not text:
        return DEFAULT_SLANTS
    try:
        return tuple(tuple(int(a) for a in s.split(",")) for s in text.split(";"))
    except ValueError as e:
        raise ConfigError(f"bad slant list {text!r}") from e


def cmd_pipeline(args, out):
    X = formats.load_sft(args.sft)
    widths = tuple(range(1, args.widths + 1))
    res = structure_pipeline(X, _slants(args.slants), args.kmax, args.radius, widths)
    for line in res.transcript:
        out.say(f"# {line}")
    out.data = {"found": res.found, "transcript": res.transcript}
    if not res.found:
        out.fail("not found: no candidate produced a verified presentation")
        return
    _emit_text(args, out, formats.format_presentation(res.presentation))


def cmd_present_verify(args, out):
    X = formats.load_sft(args.sft)
    P = formats.load_presentation(args.presentation, X)
    v = verify_presentation(P, tuple(range(1, args.widths + 1)))
    out.data = {"accepted": v.accepted, "witness": v.witness}
    if v.accepted:
        out.say(str(v))
    else:
        out.fail(str(v))


def _load_pres(args):
    X = formats.load_sft(args.sft)
    return formats.load_presentation(args.presentation, X)


def cmd_nca_sample(args, out):
    P = _load_pres(args)
    if args.frame == "original":
        rows, _ = sample_original_block(P, args.w, args.h, args.seed)
        alphabet = P.original.alphabet
    else:
        st = sample_spacetime(P, args.w, args.h, args.seed)
        rows = st.layer_grid()
        alphabet = P.original.alphabet
    _emit_block(args, out, rows, alphabet)


def cmd_periodic(args, out):
    P = _load_pres(args)
    if args.pattern:
        rows = formats.parse_block(Path(args.pattern).read_text(), args.pattern)
        pt = dense_periodic_point(P, formats.block_to_pattern(rows))
    else:
        row = tuple(args.row.split()) if args.row else None
        pt = periodic_point(P, row)
    ok = pt.verify()
    a, b = pt.lattice
    out.data = {"lattice": [list(a), list(b)], "index": pt.index, "verified": ok,
                "vertical_period": pt.period, "row_width": pt.width}
    out.say(f"lattice {format_vec(a)} {format_vec(b)} index {pt.index}")
    out.say(f"row width {pt.width}, vertical period {pt.period}, verified {ok}")
    dom = pt.fundamental_domain()
    for v in sorted(dom, key=lambda v: (v[1], v[0])):
        out.say(f"  {format_vec(v)} {dom[v]}")
    if not ok:
        out.fail()


def _rule(P, which):
    return P.north if which == "north" else P.south


def cmd_factor(args, out):
    P = _load_pres(args)
    rule = _rule(P, args.rule)
    if not rule.uniform:
        raise NotUniform("factor maps need a uniform rule")
    if args.preimage:
        target = formats.parse_block(Path(args.preimage).read_text(), args.preimage)
        digits = [[int(s) for s in r] for r in target]
        res = factor_preimage(rule, P.trace, digits, args.budget)
        if isinstance(res, FactorNotFound):
            out.fail(f"no preimage after {res.tried} bottom rows")
            return
        _emit_text(args, out, formats.format_block([list(r) for r in res]))
        return
    st = sample_spacetime(P, args.w, args.h, args.seed)
    rows = st.z_rows
    if args.rule == "south":
        rows = list(reversed(rows))
    digits = factor_map(rule, rows)
    if args.rule == "south":
        digits = list(reversed(digits))
    _emit_text(args, out, formats.format_block([[str(d) for d in r] for r in digits]))


def cmd_entropy_box(args, out):
    X = formats.load_sft(args.sft)
    for n in range(1, args.n + 1):
        e = entropy_box(X, n, _oracle(args))
        out.say(str(e))
        out.data[str(n)] = {"count": e.count, "entropy": round(e.value, 6)}


def cmd_entropy_cone(args, out):
    P = _load_pres(args)
    rule = _rule(P, args.rule)
    for k in range(1, args.k + 1):
        c = entropy_cone(rule, P.trace, k)
        out.say(f"k={k} cells={c.cells} count={c.count} estimate={c.estimate:.6f} limit={c.limit:.6f}")
        out.data[str(k)] = {"cells": c.cells, "count": c.count, "estimate": round(c.estimate, 6)}


def _certified(args):
    X = formats.load_sft(args.sft)
    return certify(X, args.radius, _oracle(args))


def _measure_shape(args):
    if args.shape:
        return _shape(args.shape)
    return list(box_points(*_box(args.box)))


def cmd_measure_count(args, out):
    X = formats.load_sft(args.sft)
    c = count_patterns(X, _measure_shape(args), _oracle(args))
    out.data = {"lower": c.lower, "upper": c.upper, "exact": c.exact}
    out.say(f"count {c}" + ("" if c.exact else " (not exact)"))


def cmd_measure_eval(args, out):
    X = _certified(args)
    rows = formats.parse_block(Path(args.pattern).read_text(), args.pattern)
    mu = unimeasure_eval(X, formats.block_to_pattern(rows), _oracle(args))
    out.data = {"measure": str(mu)}
    out.say(f"measure {mu}")


def cmd_measure_check(args, out):
    X = _certified(args)
    rep = check_all_chains(X, (0, 0), (args.box - 1, args.box - 1), _oracle(args))
    out.data = {"ok": rep.ok, "steps": rep.steps, "identities": rep.identities}
    out.say(f"{rep.identities} identities over {rep.steps} singleton steps")
    for n in range(1, args.mme + 1):
        m = mme_check(X, n, _oracle(args))
        out.say(f"n={n} count={m.count} mass={m.total_mass} entropy={m.topological:.6f} identity={m.ok}")
        if not m.ok:
            rep.witness = ("mme", n)
    if not rep.ok:
        out.data["witness"] = rep.witness
        out.fail(f"identity fails: {rep.witness}")


def cmd_measure_sample(args, out):
    X = _certified(args)
    S = _measure_shape(args)
    sampler = UniformSampler(X, S, _oracle(args))
    rng = random.Random(f"{args.seed}:measure")
    counts = {}
    for _ in range(args.samples):
        p = sampler.sample(rng)
        counts[p] = counts.get(p, 0) + 1
    out.say("pattern,count")
    for p in sorted(counts):
        out.say(f"\"{_cells(p)}\",{counts[p]}")
    out.data = {_cells(p): c for p, c in sorted(counts.items())}


def cmd_render(args, out):
    rows = formats.parse_block(Path(args.block).read_text(), args.block)
    _emit_block(args, out, rows, None)


def _cells(p):
    return "{" + " ".join(f"{format_vec(v)}:{s}" for v, s in p.items()) + "}"


# ----------------------------------------------------------------- output

def _emit_text(args, out, text):
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
        out.say(f"wrote {args.out}")
    else:
        out.lines.extend(text.rstrip("\n").split("\n"))


def _emit_block(args, out, rows, alphabet):
    data = render_block(rows, args.format, alphabet)
    if args.out:
        Path(args.out).write_bytes(data)
        out.say(f"wrote {args.out}")
    elif args.format == "pgm":
        out.payload = data
    else:
        out.lines.extend(data.decode("ascii").rstrip("\n").split("\n"))


# ----------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="latticeshift", description=__doc__.splitlines()[0])
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.add_argument("--oracle", default="auto", help="auto[:r] radius[:r] safe:s strip[:h] tiny[:b]")
    sub = p.add_subparsers(dest="command", required=True)

    def leaf(parent, name, fn, **kw):
        q = parent.add_parser(name, **kw)
        q.set_defaults(fn=fn)
        return q

    def group(name):
        g = sub.add_parser(name)
        return g.add_subparsers(dest="action", required=True)

    avo = group("avo")
    q = leaf(avo, "check", cmd_avo_check)
    q.add_argument("sft")
    q.add_argument("--radius", type=int, default=1)
    q = leaf(avo, "extract", cmd_avo_extract)
    q.add_argument("sft")
    q.add_argument("--radius", type=int, default=1)
    q.add_argument("--uni", action="store_true")
    q.add_argument("--out")

    uni = group("uni")
    q = leaf(uni, "check", cmd_uni_check)
    q.add_argument("sft")
    q.add_argument("--radius", type=int, default=1)

    man = group("manual")
    q = leaf(man, "validate", cmd_manual_validate)
    q.add_argument("manual")
    q.add_argument("blueprint")
    q = leaf(man, "search", cmd_manual_search)
    q.add_argument("manual")
    q.add_argument("--target", required=True)
    q.add_argument("--budget", type=int, default=100000)
    q.add_argument("--out")
    q = leaf(man, "trace", cmd_manual_trace)
    q.add_argument("manual")
    q.add_argument("--k", default="1")
    q.add_argument("--out")
    q = leaf(man, "block", cmd_manual_block)
    q.add_argument("manual")
    q.add_argument("--shape", required=True)
    q.add_argument("--max-rules", type=int, default=None)
    q.add_argument("--out")
    q = leaf(man, "props", cmd_manual_props)
    q.add_argument("manual")
    q.add_argument("--samples", type=int, default=8)
    q.add_argument("--seed", type=int, default=0)
    q = leaf(man, "synth", cmd_manual_synth)
    q.add_argument("manual")
    q.add_argument("--halfspace", required=True)
    q.add_argument("--depth", type=int, default=4)
    q.add_argument("--out")
    for name in ("validate", "search", "trace", "block", "props", "synth"):
        man.choices[name].add_argument("--box", type=int, default=3, help="half-width of the check box")

    q = leaf(sub, "transform", cmd_transform)
    q.add_argument("sft")
    q.add_argument("--matrix", required=True, help="rows separated by ';', e.g. 1,1;0,1")
    q.add_argument("--out")

    q = leaf(sub, "block", cmd_block)
    q.add_argument("sft")
    q.add_argument("--shape", required=True, help="e.g. [[0,0],[0,1]]")
    q.add_argument("--out")

    q = leaf(sub, "pipeline", cmd_pipeline)
    q.add_argument("sft")
    q.add_argument("--slants", default=None, help="e.g. 1,1;1,2")
    q.add_argument("--kmax", type=int, default=4)
    q.add_argument("--radius", type=int, default=2)
    q.add_argument("--widths", type=int, default=5)
    q.add_argument("--out")

    pres = group("present")
    q = leaf(pres, "verify", cmd_present_verify)
    q.add_argument("sft")
    q.add_argument("presentation")
    q.add_argument("--widths", type=int, default=6)

    nca = group("nca")
    q = leaf(nca, "sample", cmd_nca_sample)
    q.add_argument("sft")
    q.add_argument("presentation")
    q.add_argument("--w", type=int, default=40)
    q.add_argument("--h", type=int, default=24)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--frame", choices=("original", "layers"), default="original")
    q.add_argument("--format", "--render", dest="format", choices=("ascii", "pgm"), default="ascii")
    q.add_argument("--out")

    q = leaf(sub, "periodic", cmd_periodic)
    q.add_argument("sft")
    q.add_argument("presentation")
    q.add_argument("--row", help="periodic trace row, symbols separated by spaces")
    q.add_argument("--pattern", "--contains", dest="pattern", help="block file the point must contain")

    q = leaf(sub, "factor", cmd_factor)
    q.add_argument("sft")
    q.add_argument("presentation")
    q.add_argument("--rule", choices=("north", "south"), default="north")
    q.add_argument("--preimage", "--target", dest="preimage", help="block file of choice digits")
    q.add_argument("--budget", type=int, default=64)
    q.add_argument("--w", type=int, default=8)
    q.add_argument("--h", type=int, default=8)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")

    ent = group("entropy")
    q = leaf(ent, "box", cmd_entropy_box)
    q.add_argument("sft")
    q.add_argument("--n", type=int, default=3)
    q = leaf(ent, "cone", cmd_entropy_cone)
    q.add_argument("sft")
    q.add_argument("presentation")
    q.add_argument("--rule", choices=("north", "south"), default="north")
    q.add_argument("--k", type=int, default=6)

    mea = group("measure")
    for name, fn in (("count", cmd_measure_count), ("eval", cmd_measure_eval),
                     ("check", cmd_measure_check), ("sample", cmd_measure_sample)):
        q = leaf(mea, name, fn)
        q.add_argument("sft")
        q.add_argument("--radius", type=int, default=2, help="certification radius")
    mea.choices["eval"].add_argument("--pattern", required=True, help="block file")
    for name in ("count", "sample"):
        mea.choices[name].add_argument("--shape")
        mea.choices[name].add_argument("--box", type=int, default=2)
    mea.choices["check"].add_argument("--box", type=int, default=3)
    mea.choices["check"].add_argument("--mme", type=int, default=4)
    mea.choices["sample"].add_argument("--samples", type=int, default=1000)
    mea.choices["sample"].add_argument("--seed", type=int, default=0)

    q = leaf(sub, "render", cmd_render)
    q.add_argument("block")
    q.add_argument("--format", choices=("ascii", "pgm"), default="ascii")
    q.add_argument("--out")
    return p


NEGATIVE = (NotUniform, SearchExhausted, EmptySubshift)
BAD_INPUT = (FormatError, ConfigError, OracleConfigError, GeometryError, TransformError, ManualError,
             RenderError, SftError, NcaError, OSError, ValueError)


def run(argv=None, stdout=None):
    stdout = stdout if stdout is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    out = Outcome()
    try:
        args.fn(args, out)
    except NEGATIVE as e:
        out.fail(f"{type(e).__name__}: {e}")
    except BAD_INPUT as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if out.payload is not None and not args.json:
        buf = getattr(stdout, "buffer", None)
        (buf or stdout).write(out.payload)
        return out.code
    if args.json:
        report = {"command": args.command, "exit": out.code, "report": _jsonable(out.data), "lines": out.lines}
        stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    elif out.lines:
        stdout.write("\n".join(out.lines) + "\n")
    return out.code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
