
import pytest
from hypothesis import given, settings, strategies as st

from latticeshift.avo import certify
from latticeshift.formats import FormatError, format_sft, parse_sft
from latticeshift.sft import (Auto, ExhaustiveTiny, OracleConfigError, Pattern, RadiusExtension, SafeSymbolFill,
                              Sft, StripExact, box_of_size, follower_set, format_oracle, full_shift,
                              globally_valid, language_box, language_of_set, locally_valid, parse_oracle,
                              safe_symbols, strip_graph)

from oracles import (as_key, box_cells, brute_patterns, golden_ok, ledrappier_ok, ledrappier_torus_ok,
                     torus_configs, torus_windows)


def keys(patterns, cells):
    return {as_key(p, cells) for p in patterns}


def test_local_validity_examples(golden, ledrappier):
    assert locally_valid(golden, Pattern({(x, y): "0" for x in range(2) for y in range(2)}))
    assert not locally_valid(golden, Pattern({(0, 0): "1", (1, 0): "1"}))
    assert locally_valid(ledrappier, Pattern({(0, 0): "1", (1, 0): "1", (0, 1): "0"}))
    assert not locally_valid(ledrappier, Pattern({(0, 0): "1", (1, 0): "0", (0, 1): "0"}))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.sampled_from("01"), min_size=9, max_size=9))
def test_local_validity_matches_direct_checks(golden, ledrappier, syms):
    cells = box_cells(3, 3)
    c = dict(zip(cells, syms))
    assert locally_valid(golden, Pattern(c)) == golden_ok(c)
    assert locally_valid(ledrappier, Pattern(c)) == ledrappier_ok(c)


def test_global_validity_examples(golden, ledrappier):
    p = Pattern({(0, 0): "1", (1, 1): "1", (2, 0): "1"})
    assert globally_valid(golden, p, SafeSymbolFill("0")).valid
    assert globally_valid(golden, Pattern({(0, 0): "1", (0, 1): "1"}), SafeSymbolFill("0")).invalid
    one = Pattern({(0, 0): "1"})
    assert globally_valid(ledrappier, one, RadiusExtension(2)).unknown
    v = globally_valid(certify(ledrappier, 2), one, RadiusExtension(2))
    assert v.valid and "promoted" in v.basis


def test_safe_symbols(golden, ledrappier):
    assert safe_symbols(golden) == ("0",)
    assert safe_symbols(ledrappier) == ()
    with pytest.raises(OracleConfigError):
        globally_valid(ledrappier, Pattern({(0, 0): "1"}), SafeSymbolFill("0"))


@pytest.mark.parametrize("w,h", [(1, 1), (1, 2), (2, 1), (2, 2), (3, 2), (2, 3), (3, 3)])
def test_ledrappier_language_matches_tori(ledrappier, w, h):
    cells = box_cells(w, h)
    local = keys(brute_patterns(ledrappier_ok, cells), cells)
    seen = set()
    for W, H in ((3, 3), (5, 5), (7, 7), (3, 6), (5, 15), (7, 14)):
        seen |= torus_windows(torus_configs(ledrappier_torus_ok, W, H), W, H, cells)
    # lower bound from tori meets the upper bound from local validity
    assert seen == local
    got, unknown = language_box(ledrappier, box_of_size((w, h)), StripExact())
    assert not unknown
    assert keys(got, cells) == local


@pytest.mark.parametrize("w,h", [(1, 2), (2, 1), (2, 2), (3, 3)])
def test_golden_language_matches_brute_force(golden, w, h):
    cells = box_cells(w, h)
    local = keys(brute_patterns(golden_ok, cells), cells)
    for oracle in (StripExact(), SafeSymbolFill("0"), Auto()):
        got, unknown = language_box(golden, box_of_size((w, h)), oracle)
        assert not unknown
        assert keys(got, cells) == local


def test_counts(golden, ledrappier):
    assert [len(language_box(ledrappier, box_of_size((n, n)), StripExact())[0]) for n in (1, 2, 3)] == [2, 8, 32]
    assert len(language_box(golden, box_of_size((2, 2)))[0]) == 7
    assert len(language_box(golden, box_of_size((2, 1)))[0]) == 3
    assert len(language_box(golden, box_of_size((3, 3)))[0]) == 63


def test_empty_language(golden):
    valid, unknown = language_of_set(golden, [])
    assert valid == [Pattern()] and unknown == []


@pytest.mark.parametrize("dims", [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (3, 2), (2, 3), (3, 3)])
def test_strip_and_tiny_agree(golden, ledrappier, dims):
    lc = certify(ledrappier, 2)
    for X in (golden, lc):
        a, ua = language_box(X, box_of_size(dims), StripExact())
        b, ub = language_box(X, box_of_size(dims), ExhaustiveTiny(1))
        assert not ua and not ub
        assert a == b


def test_tiny_unknown_without_certificate(ledrappier):
    valid, unknown = language_box(ledrappier, box_of_size((2, 2)), ExhaustiveTiny(1))
    assert valid == [] and len(unknown) == 8


def test_follower_sets(golden, ledrappier):
    f = follower_set(ledrappier, {(1, 0): "0", (0, 1): "0"}, [(0, 0)], StripExact())
    assert {q[(0, 0)] for q in f.valid} == {"0"}
    f = follower_set(golden, {(1, 0): "1"}, [(0, 0)])
    assert {q[(0, 0)] for q in f.valid} == {"0"}
    f = follower_set(ledrappier, {(1, 0): "0"}, [(0, 0)], StripExact())
    assert {q[(0, 0)] for q in f.valid} == {"0", "1"}


def test_strip_graphs(golden, ledrappier):
    g = strip_graph(golden, 1)
    edges = {(a[0][0], b[0][0]) for a, b in g.edges()}
    assert edges == {("0", "0"), ("0", "1"), ("1", "0")}
    g = strip_graph(ledrappier, 2)
    assert len(g.vertices) == 4
    for a, b in g.edges():
        # bottom-left + bottom-right + top-left vanish
        assert (int(a[0][0]) + int(b[0][0]) + int(a[0][1])) % 2 == 0
    g = strip_graph(full_shift(2, ("0", "1")), 1)
    assert len(g.vertices) == 2 and len(list(g.edges())) == 4


def test_oracle_strings():
    for text in ("auto:2", "radius:3", "safe:0", "strip:0", "tiny:1"):
        assert format_oracle(parse_oracle(text)) == text
    with pytest.raises(OracleConfigError):
        parse_oracle("magic")


cells_strategy = st.dictionaries(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), st.sampled_from("ab"),
                                 min_size=1, max_size=6)


@settings(max_examples=50, deadline=None)
@given(cells_strategy, st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_pattern_shift_restrict(cells, v):
    p = Pattern(cells)
    q = p.shift(v)
    assert q.shift(tuple(-a for a in v)) == p
    assert len(q) == len(p)
    sub = sorted(p.support)[: len(p) // 2]
    assert p.restrict(sub).support == set(sub)


@settings(max_examples=40, deadline=None)
@given(st.lists(cells_strategy, min_size=1, max_size=3))
def test_sft_text_round_trip(forbidden):
    X = Sft(2, ("a", "b"), tuple(forbidden), name="random")
    Y = parse_sft(format_sft(X))
    assert Y == X


def test_sft_parse_errors():
    with pytest.raises(FormatError) as e:
        parse_sft("dim 2\nalphabet 0 1\nforbid\n  [0,0 1\n")
    assert e.value.line == 4
    with pytest.raises(FormatError):
        parse_sft("alphabet 0 1\n")
    with pytest.raises(FormatError):
        parse_sft("dim 2\nalphabet 0 1\n  [0,0] 1\n")
