import itertools
import math
import random

import pytest

from latticeshift import formats
from latticeshift.avo import verify_presentation
from latticeshift.nca import (DEFAULT_SLANTS, EmptySubshift, FactorNotFound, TraceGraph, cycle_decomposition,
                              cycle_edges, dense_periodic_point, entropy_cone, factor_map, factor_preimage,
                              periodic_point, sample_cyclic_row, sample_original_block, sample_spacetime,
                              structure_pipeline)
from latticeshift.presentation import Nca, NotUniform, nca_from_function
from latticeshift.sft import Pattern, Sft, full_shift
from latticeshift.transform import parse_matrix

from fuzz import avo_cases, forbidden_absent
from oracles import box_cells, brute_patterns, golden_ok, ledrappier_ok

FULL1 = full_shift(1, ("0", "1"))
COIN = Nca(("0", "1"), (), {(): ("0", "1")})
XOR = nca_from_function(("0", "1"), (0, 1), lambda a, b: [str(int(a) ^ int(b)), str(1 - (int(a) ^ int(b)))])


def as_config(rows):
    return {(x, y): s for y, r in enumerate(rows) for x, s in enumerate(r)}


# ----------------------------------------------------------------- sampling

@pytest.mark.parametrize("seed", range(6))
def test_sampled_ledrappier_blocks_are_valid(ledrappier_pres, seed):
    rows, _ = sample_original_block(ledrappier_pres, 9, 7, seed)
    assert ledrappier_ok(as_config(rows))


@pytest.mark.parametrize("seed", range(6))
def test_sampled_golden_blocks_have_no_adjacent_ones(golden_diag_pres, seed):
    rows, _ = sample_original_block(golden_diag_pres, 10, 8, seed)
    assert golden_ok(as_config(rows))


def test_ledrappier_sample_determined_by_seed_row(ledrappier_pres):
    st = sample_spacetime(ledrappier_pres, 5, 9, seed=3)
    row = st.z_rows[st.seed_index]
    for i in range(st.seed_index + 1, 9):
        nxt = tuple(ledrappier_pres.north.image_at(row, j)[0] for j in range(5))
        assert st.z_rows[i] == nxt
        row = nxt
    other = [s for s in range(50) if sample_spacetime(ledrappier_pres, 5, 9, s).z_rows[4] == st.z_rows[4]]
    for s in other:
        assert sample_spacetime(ledrappier_pres, 5, 9, s).z_rows == st.z_rows


def test_width_one_sample(ledrappier_pres):
    st = sample_spacetime(ledrappier_pres, 1, 6, seed=1)
    assert st.width() == 1 and len(st.z_rows) == 6


def test_same_seed_same_sample(ledrappier_pres):
    a = sample_spacetime(ledrappier_pres, 7, 7, seed=11).z_rows
    b = sample_spacetime(ledrappier_pres, 7, 7, seed=11).z_rows
    assert a == b


def test_cyclic_rows_uniform(golden_pres):
    # 7 cyclic golden words of length 5 beyond the enumeration threshold
    trace = golden_pres.trace
    rng = random.Random(5)
    seen = {}
    for _ in range(2200):
        r = sample_cyclic_row(trace, 5, rng)
        assert all(not (r[i] == r[(i + 1) % 5] == "1") for i in range(5))
        seen[r] = seen.get(r, 0) + 1
    assert len(seen) == 11
    for c in seen.values():
        assert abs(c - 200) < 4 * math.sqrt(200)


def test_empty_trace():
    X = Sft(1, ("0",), ({(0,): "0"},))
    with pytest.raises(EmptySubshift):
        sample_cyclic_row(X, 4, random.Random(0))


def test_trace_graph_counts():
    golden1 = Sft(1, ("0", "1"), ({(0,): "1", (1,): "1"},))
    G = TraceGraph(golden1)
    # Fibonacci numbers
    assert [G.count_words(n) for n in range(1, 8)] == [2, 3, 5, 8, 13, 21, 34]


# ----------------------------------------------------------- periodic points

def test_golden_periodic_point_is_zero(golden_pres, golden_diag_pres):
    for pres in (golden_pres, golden_diag_pres):
        pt = periodic_point(pres)
        assert pt.verify() and pt.index == 1
        assert set(pt.fundamental_domain().values()) == {"0"}


def test_vertex_shift_two_cycle():
    # a 1-D vertex shift a -> b -> a presented over a single-cell trace
    X = Sft(1, ("a", "b"), ({(0,): "a", (1,): "a"}, {(0,): "b", (1,): "b"}))
    G = TraceGraph(X)
    edges = [(a, b) for a in G.states for b in G.succ[a]]
    (cyc,) = [c for c in cycle_decomposition(G.states, edges)]
    assert len(cyc) == 2


def _pairs_period(lower, upper):
    """Vertical period of layer pairs under y_{i+1}[j] = y_i[j] + y_{i-1}[j+1]."""
    W = len(lower)
    start = (lower, upper)
    cur, n = start, 0
    while True:
        lo, up = cur
        new = tuple((up[j] + lo[(j + 1) % W]) % 2 for j in range(W))
        cur = (up, new)
        n += 1
        if cur == start:
            return n


def _ledrappier_width3_rows():
    return list(itertools.product(["00", "01", "10", "11"], repeat=3))


def test_ledrappier_periodic_points_match_recurrence(ledrappier_pres):
    for row in _ledrappier_width3_rows():
        pt = periodic_point(ledrappier_pres, row)
        assert pt.verify()
        lower = tuple(int(s[0]) for s in row)
        upper = tuple(int(s[1]) for s in row)
        assert pt.period == _pairs_period(lower, upper)


def test_ledrappier_width3_vertical_period_bound(ledrappier_pres):
    periods = {periodic_point(ledrappier_pres, row).period for row in _ledrappier_width3_rows()}
    assert max(periods) <= 8, sorted(periods)


def test_periodic_point_tiles(ledrappier_pres):
    pt = periodic_point(ledrappier_pres, ("01", "11", "00"))
    u, v = pt.lattice
    cells = box_cells(8, 8, -4, -4)
    conf = {c: pt.symbol(c) for c in cells}
    assert ledrappier_ok(conf)
    for c in cells:
        for t in (u, v):
            assert pt.symbol((c[0] + t[0], c[1] + t[1])) == conf[c]


def test_periodic_point_from_pipeline(ledrappier):
    pres = structure_pipeline(ledrappier).presentation
    assert periodic_point(pres).verify()


def test_dense_points_ledrappier(ledrappier_pres):
    pats = brute_patterns(ledrappier_ok, box_cells(2, 2))
    assert len(pats) == 8
    for c in pats:
        p = Pattern(c)
        pt = dense_periodic_point(ledrappier_pres, p)
        assert pt.verify() and pt.contains(p)
        window = {v: pt.symbol(v) for v in box_cells(9, 9, -4, -4)}
        assert ledrappier_ok(window)


def test_dense_point_refuses_non_uniform(golden_pres):
    with pytest.raises(NotUniform):
        dense_periodic_point(golden_pres, Pattern({(0, 0): "0"}))


def test_dense_point_rejects_invalid_pattern(ledrappier_pres):
    with pytest.raises(ValueError):
        dense_periodic_point(ledrappier_pres, Pattern({(0, 0): "1", (1, 0): "0", (0, 1): "0"}))


def test_checkerboard_point():
    pres = structure_pipeline(full_shift(2, ("0", "1"))).presentation
    board = Pattern({(x, y): str((x + y) % 2) for x in range(3) for y in range(3)})
    pt = dense_periodic_point(pres, board)
    assert pt.contains(board)
    assert all(pt.symbol((x, y)) == str((x + y) % 2) for x in range(-8, 9) for y in range(-8, 9))


# ------------------------------------------------------------------- cycles

def _random_regular(rng):
    n = rng.randint(1, 12)
    k = rng.randint(1, 4)
    verts = list(range(n))
    edges = []
    for _ in range(k):
        perm = verts[:]
        rng.shuffle(perm)
        edges += list(zip(verts, perm))
    return verts, edges


@pytest.mark.parametrize("seed", range(50))
def test_cycles_partition_edges(seed):
    verts, edges = _random_regular(random.Random(seed))
    cycles = cycle_decomposition(verts, edges)
    used = sorted(e for c in cycles for e in cycle_edges(c))
    assert used == sorted(edges)
    for c in cycles:
        assert len(set(c)) == len(c)


def test_cycle_examples():
    cyc = cycle_decomposition("ab", [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")])
    assert sorted(sorted(c) for c in cyc) == [["a"], ["a", "b"], ["b"]]
    assert cycle_decomposition([0], [(0, 0)] * 3) == [[0], [0], [0]]
    six = [(i, (i + 1) % 6) for i in range(6)]
    (c,) = cycle_decomposition(range(6), six)
    assert sorted(cycle_edges(c)) == sorted(six)


def test_cycles_need_regular_graph():
    with pytest.raises(ValueError):
        cycle_decomposition([0, 1], [(0, 1), (0, 0)])


# ------------------------------------------------------------------- factor

def test_factor_identity_on_coins():
    rng = random.Random(1)
    rows = [tuple(rng.choice("01") for _ in range(6)) for _ in range(5)]
    assert factor_map(COIN, rows) == [tuple(int(s) for s in r) for r in rows[1:]]


def test_factor_deterministic_is_constant(ledrappier_pres):
    st = sample_spacetime(ledrappier_pres, 6, 6, seed=2)
    rows = st.z_rows[st.seed_index:]
    assert all(set(r) == {0} for r in factor_map(ledrappier_pres.north, rows))


def test_factor_rejects_non_uniform(golden_pres):
    with pytest.raises(NotUniform):
        factor_map(golden_pres.north, [("0", "0"), ("1", "0")])


def test_factor_preimages_all_targets():
    for bits in itertools.product((0, 1), repeat=9):
        target = [bits[0:3], bits[3:6], bits[6:9]]
        rows = factor_preimage(XOR, FULL1, target)
        assert not isinstance(rows, FactorNotFound)
        assert factor_map(XOR, rows) == [tuple(t) for t in target]


def test_factor_round_trip_on_samples():
    rng = random.Random(4)
    for _ in range(20):
        rows = [tuple(rng.choice("01") for _ in range(5))]
        for _ in range(4):
            rows.append(tuple(XOR.image_at(rows[-1], j)[rng.randrange(2)] for j in range(5)))
        digits = factor_map(XOR, rows)
        back = factor_preimage(XOR, FULL1, digits)
        assert factor_map(XOR, back) == digits


def test_factor_preimage_budget():
    res = factor_preimage(XOR, FULL1, [(0, 1, 0)], budget=0)
    assert isinstance(res, FactorNotFound)


# ------------------------------------------------------------------ entropy

def test_entropy_coin_rule():
    for k in (4, 6):
        e = entropy_cone(COIN, FULL1, k)
        assert abs(e.estimate - math.log(2)) < 0.1
    assert entropy_cone(COIN, FULL1, 4).limit == pytest.approx(math.log(2))


def test_entropy_three_symbols():
    F = Nca(("0", "1", "2"), (0,), {(a,): ("0", "1", "2") for a in "012"})
    e = entropy_cone(F, full_shift(1, ("0", "1", "2")), 3)
    assert abs(e.estimate - math.log(3)) < 0.3


def test_entropy_xor_rule_counts():
    for k in range(1, 6):
        e = entropy_cone(XOR, FULL1, k)
        assert e.cells == (k + 1) ** 2
        assert e.count == 2 ** e.cells


def test_entropy_deterministic_decreases():
    F = Nca(("0", "1"), (0,), {("0",): ("1",), ("1",): ("0",)})
    vals = [entropy_cone(F, FULL1, k).estimate for k in range(1, 7)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.1


def test_entropy_approaches_limit_on_corpus(ledrappier_pres):
    # deterministic rules: the limit is log 1 = 0
    vals = [entropy_cone(ledrappier_pres.north, ledrappier_pres.trace, k).estimate for k in range(1, 6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_entropy_rejects_non_uniform(golden_pres):
    with pytest.raises(NotUniform):
        entropy_cone(golden_pres.north, golden_pres.trace, 2)


# ----------------------------------------------------------------- pipeline

def test_pipeline_ledrappier(ledrappier):
    res = structure_pipeline(ledrappier)
    assert res.found and res.presentation.k <= 2
    assert verify_presentation(res.presentation).accepted
    assert res.presentation.north.deterministic and res.presentation.south.deterministic


def test_pipeline_ledrappier_hand_basis(ledrappier, ledrappier_pres):
    res = structure_pipeline(ledrappier, slants=((-1, 1),) + DEFAULT_SLANTS)
    p = res.presentation
    assert p.matrix == parse_matrix("1,1;0,1") and p.k == 2
    assert p.north.full_table() == ledrappier_pres.north.full_table()
    assert p.south.full_table() == ledrappier_pres.south.full_table()


def test_pipeline_golden(golden):
    res = structure_pipeline(golden)
    assert res.found and res.presentation.k == 1
    assert verify_presentation(res.presentation).accepted


def test_pipeline_golden_neighborhoods(golden):
    p = structure_pipeline(golden).presentation
    assert p.north.neighborhood == (0,) and p.south.neighborhood == (-1,)
    assert p.north.image(("1",)) == ("0",) and p.north.image(("0",)) == ("0", "1")


def test_pipeline_full_shift():
    X = full_shift(2, ("0", "1"))
    res = structure_pipeline(X)
    p = res.presentation
    assert p.k == 1 and not p.trace.forbidden
    assert set(p.north.full_table().values()) == {("0", "1")}


def test_pipeline_transcript_lists_failures(ledrappier):
    res = structure_pipeline(ledrappier)
    assert len(res.transcript) > 1
    assert "verified" in res.transcript[-1]
    assert all("verified" not in line for line in res.transcript[:-1])


def test_pipeline_not_found(ledrappier):
    res = structure_pipeline(ledrappier, slants=((1, 1),), kmax=1)
    assert not res.found and len(res.transcript) == 1


def test_pipeline_soundness_fuzz():
    for X in avo_cases():
        res = structure_pipeline(X, kmax=2, widths=(1, 2, 3, 4))
        if res.found:
            assert verify_presentation(res.presentation, (1, 2, 3, 4)).accepted
            rows, _ = sample_original_block(res.presentation, 6, 6, seed=1)
            assert forbidden_absent(X, rows)


# ------------------------------------------------------------------ formats

@pytest.mark.parametrize("name", ["ledrappier.pres", "golden_mean.pres", "golden_mean_pipeline.pres"])
def test_presentation_round_trip(name, ledrappier, golden):
    from conftest import corpus
    X = ledrappier if name.startswith("led") else golden
    p = formats.load_presentation(corpus(name), X)
    q = formats.parse_presentation(formats.format_presentation(p), X)
    assert q == p
