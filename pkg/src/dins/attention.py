"""Attention marks over critical points and the analyzer neurons.

An exposure walks the critical points in traversal order from a seeded
start.  Consecutive marks bind the segment groups leaving the marked points;
analyzers compare their characteristic values and emit derived modes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .contour import StrokeGraph, chain_points
from .errors import ScaleMismatch, TooFewPoints
from .features import (
    CHARACTERISTIC,
    DERIVED,
    ORIENTATION,
    QUAL,
    QUANT,
    Mode,
    ModalGroup,
    decode_address,
    derived_address,
    directed_orientation,
)
from .spatial import SpatialIndex

LT, EQ, GT = 0, 1, 2
RELATION_NAMES = {LT: "lt", EQ: "eq", GT: "gt"}
_MIRROR = {LT: GT, EQ: EQ, GT: LT}


@dataclass(frozen=True)
class AttentionMark:
    seq: int
    exposure_id: int


def mirror(rel: int) -> int:
    return _MIRROR[rel]


def attend(g: StrokeGraph, seed: int = 0, budget: int = 16, exposure_id: int = 0) -> list:
    """Marks ``(critical point id, AttentionMark)`` along the traversal.

    The start position is drawn from ``seed``; the walk proceeds forward and
    wraps around once.  Consecutive repeats of a point are skipped.
    """
    if len(g.critical_points) < 2:
        raise TooFewPoints(f"need at least 2 critical points, got {len(g.critical_points)}")
    walk = list(g.traversal) or list(range(len(g.critical_points)))
    start = random.Random(seed).randrange(len(walk))
    order = walk[start:] + walk[:start]
    marks = []
    for cp in order:
        if len(marks) >= budget:
            break
        if marks and marks[-1][0] == cp:
            continue
        marks.append((cp, AttentionMark(len(marks) + 1, exposure_id)))
    return marks


def _reading(y):
    """(scale, ordinal) of a characteristic reaction or a plain pair."""
    if isinstance(y, tuple):
        return y
    kind, scale, value = decode_address(y.a)
    if kind != CHARACTERISTIC:
        raise ScaleMismatch(f"address {y.a} is not a characteristic detector")
    return scale, value


def analyze_quant(yj, yl) -> int:
    """Absolute difference of two readings on the same scale."""
    (sj, aj), (sl, al) = _reading(yj), _reading(yl)
    if sj != sl:
        raise ScaleMismatch(f"scales differ: {sj} vs {sl}")
    return abs(aj - al)


def analyze_qual(yj, yl) -> int:
    """Order relation of two readings: ``GT`` if the first is larger, ``EQ``, else ``LT``."""
    (sj, aj), (sl, al) = _reading(yj), _reading(yl)
    if sj != sl:
        raise ScaleMismatch(f"scales differ: {sj} vs {sl}")
    if aj > al:
        return GT
    return EQ if aj == al else LT


def _departing_segment(g, u, v):
    for ch in g.chains:
        if ch.start == u and ch.end == v:
            return ch.segments[0], chain_points(g, ch)
        if ch.end == u and ch.start == v:
            return ch.segments[-1], chain_points(g, ch, reverse=True)
    return None, None


def _heading_bins(pts, width: float = 11.25) -> int:
    return int(round(directed_orientation(pts[0], pts[1]) / width))


def form_derived_modes(g: StrokeGraph, groups: list[ModalGroup], marks) -> list[Mode]:
    """Quantitative and qualitative derived modes for consecutive mark pairs."""
    seg_group = {}
    for gr in groups:
        if gr.element and gr.element[0] == "segment":
            seg_group.setdefault(gr.element[1], gr)
    # segment group leaving each mark, with the heading it leaves along
    leaving = []
    for (u, mu), (v, _) in zip(marks, marks[1:]):
        si, pts = _departing_segment(g, u, v)
        if si is None or si not in seg_group:
            leaving.append(None)
            continue
        leaving.append((seg_group[si], mu, _heading_bins(pts)))
    out = []
    for cur, nxt in zip(leaving, leaving[1:]):
        if cur is None or nxt is None:
            continue
        (gj, mj, hj), (gl, ml, hl) = cur, nxt
        if gj is gl:
            continue
        bins_j = {decode_address(m.address)[1]: m.value_bin for m in gj.characteristics}
        bins_l = {decode_address(m.address)[1]: m.value_bin for m in gl.characteristics}
        six = SpatialIndex(gj.structural.window, (), (mj, ml))
        src = (gj.structural.group, gl.structural.group)
        for scale in sorted(set(bins_j) & set(bins_l)):
            q = analyze_quant((scale, bins_j[scale]), (scale, bins_l[scale]))
            if scale == ORIENTATION:
                turn = (hl - hj + 16) % 32 - 16  # signed turn in bins, (-16, 16]
                rel = analyze_qual((scale, 0), (scale, turn))
            else:
                rel = analyze_qual((scale, bins_j[scale]), (scale, bins_l[scale]))
            out.append(Mode(DERIVED, derived_address(scale, QUANT, q), q, six, -1, src))
            out.append(Mode(DERIVED, derived_address(scale, QUAL, rel), rel, six, -1, src))
    return out


def aw_key(scale: int, group_j: ModalGroup, group_l: ModalGroup):
    """Source pair recorded in an associative mode's pair memory."""
    vj = vl = None
    for m in group_j.characteristics:
        if decode_address(m.address)[1] == scale:
            vj = m.value_bin
    for m in group_l.characteristics:
        if decode_address(m.address)[1] == scale:
            vl = m.value_bin
    if vj is None or vl is None:
        return None
    return (vj, vl)


def activate_associative(con, percept, mapping: dict) -> set:
    """Associative modes of ``con`` excited by ``percept`` under a structural mapping.

    A mode fires when both of its source groups are mapped and the mapped
    input groups carry a characteristic pair recorded in its pair memory.
    The explicit derived input is not needed.
    """
    fired = set()
    for mid, m in con.modes.items():
        if m.kind != con.ASSOC_KIND:
            continue
        sj, sl = m.sources
        if sj not in mapping or sl not in mapping:
            continue
        gj, gl = mapping[sj], mapping[sl]
        if not percept.bound[gj, gl]:
            continue
        key = aw_key(m.scale, percept.groups[gj], percept.groups[gl])
        if key is not None and key in m.aw:
            fired.add(mid)
    return fired

