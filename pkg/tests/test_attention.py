import pytest
from hypothesis import given
from hypothesis import strategies as st

from dins.attention import (
    EQ,
    GT,
    LT,
    AttentionMark,
    activate_associative,
    analyze_qual,
    analyze_quant,
    attend,
    form_derived_modes,
    mirror,
)
from dins.concept import capture
from dins.contour import ingest
from dins.detector import Reaction
from dins.errors import ScaleMismatch, TooFewPoints
from dins.features import (
    ANGLE_SIZE,
    CHARACTERISTIC,
    LENGTH,
    ORIENTATION,
    QUANT,
    ModeGraph,
    address,
    decode_address,
    emit_modal_groups,
)
from dins.spatial import WindowHierarchy

from conftest import draw, polygon

H = WindowHierarchy(28, 4)


def reaction(scale, ordinal, a=None):
    return Reaction(address(CHARACTERISTIC, scale, ordinal), 1, 0)


def split(modes, scale):
    quant, qual = [], []
    for m in modes:
        _, et, v = decode_address(m.address)
        s, fam = divmod(et, 2)
        if s == scale:
            (quant if fam == QUANT else qual).append(v)
    return quant, qual


def test_mark_pairs():
    g = ingest(draw((12, 12), ((3, 2), (3, 9))), tol=1.0)
    marks = attend(g, seed=0, budget=16)
    assert len(marks) == 2
    sq = ingest(polygon((14, 14), (2, 2), (2, 11), (11, 11), (11, 2)), tol=1.0)
    marks = attend(sq, seed=3, budget=4, exposure_id=7)
    assert len(marks) == 4 and len(list(zip(marks, marks[1:]))) == 3
    assert [m.seq for _, m in marks] == [1, 2, 3, 4]
    assert all(m.exposure_id == 7 for _, m in marks)
    assert attend(sq, seed=3, budget=4, exposure_id=7) == marks


@given(st.integers(0, 100), st.integers(2, 20))
def test_marks_are_deterministic_and_increasing(seed, budget):
    g = ingest(polygon((20, 20), (2, 2), (2, 15), (9, 17), (16, 9), (12, 2)), tol=1.0)
    marks = attend(g, seed, budget)
    assert marks == attend(g, seed, budget)
    assert 2 <= len(marks) <= budget
    seqs = [m.seq for _, m in marks]
    assert seqs == sorted(set(seqs))


def test_too_few_points():
    dot = ingest(draw((5, 5), ((2, 2), (2, 2))))
    with pytest.raises(TooFewPoints):
        attend(dot, 0, 4)


def test_analyzer_examples():
    assert analyze_quant(reaction(LENGTH, 5), reaction(LENGTH, 2)) == 3
    assert analyze_quant(reaction(LENGTH, 2), reaction(LENGTH, 2)) == 0
    assert analyze_quant(reaction(LENGTH, 2), reaction(LENGTH, 5)) == 3
    assert analyze_qual(reaction(LENGTH, 5), reaction(LENGTH, 2)) == GT
    assert analyze_qual(reaction(LENGTH, 2), reaction(LENGTH, 2)) == EQ
    assert analyze_qual(reaction(LENGTH, 2), reaction(LENGTH, 5)) == LT == mirror(GT)
    with pytest.raises(ScaleMismatch):
        analyze_qual(reaction(LENGTH, 1), reaction(ORIENTATION, 1))
    with pytest.raises(ScaleMismatch):
        analyze_quant(Reaction(5, 1, 0), reaction(LENGTH, 1))


@given(st.integers(0, 30), st.integers(0, 30), st.integers(0, 30))
def test_quantitative_shift_invariance(a, b, s):
    assert analyze_quant((LENGTH, a), (LENGTH, b)) == analyze_quant((LENGTH, a + s), (LENGTH, b + s))
    assert analyze_quant((LENGTH, a), (LENGTH, b)) == analyze_quant((LENGTH, b), (LENGTH, a))


@given(st.lists(st.integers(0, 40), min_size=2, max_size=2), st.lists(st.integers(1, 5), min_size=41, max_size=41))
def test_qualitative_rescaling_invariance(pair, steps):
    relabel = [sum(steps[: i + 1]) for i in range(41)]  # strictly increasing
    a, b = pair
    assert analyze_qual((ANGLE_SIZE, a), (ANGLE_SIZE, b)) == analyze_qual((ANGLE_SIZE, relabel[a]),
                                                                          (ANGLE_SIZE, relabel[b]))


def marks_from_start(g, budget=16):
    for seed in range(50):
        marks = attend(g, seed, budget)
        if marks[0][0] == g.traversal[0]:
            return marks
    raise AssertionError("no seed starts at the traversal start")


def test_two_segment_derived_modes():
    # lengths 12 and 3 fall in length bins 5 and 2
    g = ingest(draw((28, 28), ((5, 5), (17, 5)), ((17, 5), (17, 8))), tol=1.0)
    groups = emit_modal_groups(g, H)
    derived = form_derived_modes(g, groups, marks_from_start(g))
    quant, qual = split(derived, LENGTH)
    assert quant == [3] and qual == [GT]
    assert all(len(m.sindex.marks) == 2 for m in derived)


def test_convex_polygon_turns_agree():
    g = ingest(polygon((28, 28), (3, 10), (8, 22), (20, 20), (22, 8), (12, 3)), tol=1.0)
    groups = emit_modal_groups(g, H)
    derived = form_derived_modes(g, groups, attend(g, 0, 16))
    _, qual = split(derived, ORIENTATION)
    assert len(qual) >= 3 and len(set(qual)) == 1


def test_single_point_has_no_derived_modes():
    g = ingest(draw((28, 28), ((5, 5), (5, 12))), tol=1.0)
    groups = emit_modal_groups(g, H)
    assert form_derived_modes(g, groups, attend(g, 0, 16)[:1]) == []


def two_segment_input(derived=True):
    g = ingest(draw((28, 28), ((5, 5), (17, 5)), ((17, 5), (17, 8))), tol=1.0)
    groups = emit_modal_groups(g, H)
    return ModeGraph.build(groups, H, form_derived_modes(g, groups, marks_from_start(g)) if derived else [])


def test_associative_activation():
    full = two_segment_input()
    con = capture(full)
    identity = {s: gi for gi, s in enumerate(i for i, m in con.modes.items() if m.kind == 0)}
    assoc = {i for i, m in con.modes.items() if m.kind == con.ASSOC_KIND}
    assert assoc
    bare = two_segment_input(derived=False)
    assert activate_associative(con, bare, identity) == assoc  # sources alone excite
    some = next(iter(assoc))
    sj = con.modes[some].sources[0]
    partial = {s: gi for s, gi in identity.items() if s != sj}
    assert some not in activate_associative(con, bare, partial)
    for i in assoc:
        con.modes[i].aw.clear()
    assert activate_associative(con, bare, identity) == set()


def test_mark_type():
    m = AttentionMark(1, 0)
    assert (m.seq, m.exposure_id) == (1, 0)
