import dataclasses
import itertools


from latticeshift.avo import (certify, check_avo, check_parallel, check_uni, extract_avomanual,
                              inductive_shapes, uni_radius, validate_nca, verify_presentation)
from latticeshift.presentation import Nca, nca_from_function
from latticeshift.sft import Pattern, StripExact, full_shift
from latticeshift.transform import block_subshift, parse_matrix, transform_sft, vertical_shape

from oracles import golden_ok

CROSS = {(1, 0), (0, 1), (-1, 0), (0, -1)}


def test_inductive_shape_count():
    assert len(inductive_shapes(2, 1)) == 25
    assert len(inductive_shapes(1, 2)) == 7


def test_golden_avo(golden):
    rep = check_avo(golden, 1)
    assert rep.all_stabilized and len(rep.shapes) == 25
    for s in rep.shapes:
        assert s.window <= CROSS & set(s.points)


def test_ledrappier_avo(ledrappier):
    rep = check_avo(ledrappier, 2, StripExact())
    assert rep.all_stabilized
    # the constraint triangle around the origin
    triangle = {(1, 0), (0, 1), (-1, 0), (-1, 1), (0, -1), (1, -1)}
    for s in rep.shapes:
        assert s.window <= triangle


def test_full_shift_avo():
    rep = check_avo(full_shift(2, ("0", "1")), 2)
    assert rep.all_stabilized and all(s.window == frozenset() for s in rep.shapes)


def _brute_follow(ok, D, pattern):
    """Symbols at the origin compatible with pattern on D, judged on a
    surrounding box by brute force (local validity equals global validity
    for both corpus shifts on boxes)."""
    out = set()
    for s in "01":
        c = dict(pattern)
        c[(0, 0)] = s
        if ok(c):
            out.add(s)
    return out


def test_stabilized_tables_match_brute_force(golden):
    rep = check_avo(golden, 1)
    for s in rep.shapes:
        D = sorted(s.points)
        for syms in itertools.product("01", repeat=len(D)):
            c = dict(zip(D, syms))
            if not golden_ok(c):
                continue
            p = Pattern(c)
            got = s.table[p]
            assert set(got) == _brute_follow(golden_ok, D, c)
            restricted = p.restrict(s.window)
            # the value depends only on the window
            for q, f in s.table.items():
                if q.restrict(s.window) == restricted:
                    assert f == got


def test_uni_examples(golden, ledrappier):
    rep = check_uni(ledrappier, 2, StripExact())
    assert rep.uniform
    assert {s.count for s in rep.shapes} == {1, 2}
    for s in rep.shapes:
        if {(1, 0), (0, 1)} <= set(s.points):
            assert s.count == 1
    rep = check_uni(golden, 1)
    assert not rep.uniform
    w = rep.first_witness()
    assert set(w.points) == {(1, 0)}
    (p1, c1), (p2, c2) = w.witness
    assert (p1[(1, 0)], c1) == ("1", 1) and (p2[(1, 0)], c2) == ("0", 2)
    assert check_uni(full_shift(2, ("a", "b", "c")), 1).uniform
    assert {s.count for s in check_uni(full_shift(2, ("a", "b", "c")), 1).shapes} == {3}


def test_certify(golden, ledrappier):
    assert certify(golden, 1).certificates == {"avo:1"}
    assert uni_radius(certify(ledrappier, 2)) == 2
    assert uni_radius(golden) is None


def test_extract_avomanual(golden, ledrappier):
    m, _ = extract_avomanual(golden, 1)
    for r in m.rules:
        assert all(max(abs(a) for a in v) <= 1 for v in r.support)
    m, _ = extract_avomanual(certify(ledrappier, 2), 2, uni=True)
    assert {r.count for r in m.rules} <= {1, 2} and {r.count for r in m.rules} == {1, 2}
    m, _ = extract_avomanual(full_shift(2, ("0", "1")), 1)
    assert len(m.rules) == 1
    assert m.rules[0].support == frozenset()
    pts = [(x, y) for x in range(-3, 4) for y in range(-3, 4)]
    assert all(m.rules[0].guard.contains(p) == (p != (0, 0)) for p in pts)


def test_parallel_golden_standard_coordinates(golden):
    for r in (0, 1, 2):
        res = check_parallel(golden, (0, 1), r, layer="north")
        assert res.verdict == "not-presentable"
        w = res.witness
        # adjacent 1s written above a row of zeros
        assert set(w["lower"]) == {"0"}
        up = w["upper"]
        assert any(up[i] == up[i + 1] == "1" for i in range(len(up) - 1))


SHEAR_INV = parse_matrix("1,-1;0,1")


def test_parallel_golden_sheared_radius0(golden):
    Y = transform_sft(golden, SHEAR_INV)
    res = check_parallel(Y, (0, 1), 0, layer="north")
    assert res.rule.neighborhood == (0,)
    assert res.rule.image(("1",)) == ("0",) and res.rule.image(("0",)) == ("0", "1")
    assert res.verdict == "presentable"


def test_parallel_golden_sheared_needs_two_cells(golden):
    Y = transform_sft(golden, SHEAR_INV)
    res = check_parallel(Y, (0, 1), 1, layer="north")
    assert res.verdict == "presentable"
    assert res.rule.neighborhood == (0, 1)


def test_parallel_ledrappier_blocked(ledrappier):
    Z, coding = block_subshift(transform_sft(ledrappier, SHEAR_INV), vertical_shape(2, 2))
    res = check_parallel(Z, (0, 1), 1, layer="north")
    assert res.verdict == "presentable" and res.rule.deterministic
    for (w, img) in res.rule.full_table().items():
        if len(w) < len(res.rule.neighborhood):
            continue
    nb = res.rule.neighborhood
    assert nb == (0, 1)
    for (x, y), img in res.rule.full_table().items():
        a = int(coding.block_of(x)[(0, 1)])  # upper cell of the left block
        d = int(coding.block_of(y)[(0, 0)])  # lower cell of the right block
        out = coding.block_of(img[0])
        assert int(out[(0, 1)]) == (a + d) % 2 and int(out[(0, 0)]) == a


def test_verify_ledrappier_package(ledrappier_pres):
    v = verify_presentation(ledrappier_pres, tuple(range(1, 7)))
    assert v.accepted


def _corrupt_north(pres):
    def f(x, y):
        a, c = int(x[1]), int(y[1])
        return [f"{a}{a ^ c}"]
    return dataclasses.replace(pres, north=nca_from_function(pres.north.alphabet, (0, 1), f))


def test_verify_rejects_corrupted_rule(ledrappier_pres):
    bad = _corrupt_north(ledrappier_pres)
    v = verify_presentation(bad, tuple(range(1, 7)))
    assert not v.accepted and v.witness["width"] <= 2
    v2 = verify_presentation(bad, (2,))
    assert not v2.accepted and v2.witness["width"] == 2


def test_verify_rejects_corrupted_south(ledrappier_pres):
    s = nca_from_function(ledrappier_pres.south.alphabet, (-1, 0), lambda x, y: [f"{int(x[0]) ^ int(x[1])}{x[1]}"])
    v = verify_presentation(dataclasses.replace(ledrappier_pres, south=s))
    assert not v.accepted


def test_verify_golden_package(golden_pres):
    v = verify_presentation(golden_pres, tuple(range(1, 7)))
    assert v.accepted, v.witness


def test_verify_golden_pipeline_package(golden_diag_pres):
    assert verify_presentation(golden_diag_pres, tuple(range(1, 7))).accepted


def test_validate_nca(golden_diag_pres, ledrappier_pres, golden_pres):
    assert validate_nca(golden_diag_pres.trace, golden_diag_pres.north).accepted
    assert validate_nca(golden_diag_pres.trace, golden_diag_pres.south).accepted
    assert validate_nca(ledrappier_pres.trace, ledrappier_pres.north).accepted
    leak = Nca(("0", "1"), (0,), {("0",): ("1",), ("1",): ("1",)})
    v = validate_nca(golden_pres.trace, leak)
    assert not v.accepted and "row" in v.witness


def test_validate_golden_package_rule(golden_pres):
    # F(0) = {0, 1} applied cellwise to a zero row can write adjacent 1s
    v = validate_nca(golden_pres.trace, golden_pres.north)
    assert v.accepted, v.witness
