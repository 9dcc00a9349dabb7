"""Primary feature alphabet: structural and characteristic modes of a stroke graph."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .contour import CORNER, ENDPOINT, JUNCTION, StrokeGraph, chain_points
from .errors import ConfigError, NoWindow
from .spatial import SpatialIndex, WindowHierarchy, index_angle, index_segment, is_bound

STRUCTURAL = 0
CHARACTERISTIC = 1
DERIVED = 2
ASSOCIATIVE = 3
KIND_NAMES = {STRUCTURAL: "structural", CHARACTERISTIC: "characteristic", DERIVED: "derived", ASSOCIATIVE: "associative"}

# element types of structural modes
SEGMENT, ANGLE, END, JOIN = 0, 1, 2, 3
ELEMENT_NAMES = {SEGMENT: "segment", ANGLE: "angle", END: "endpoint", JOIN: "junction"}

# characteristic scales
LENGTH, ORIENTATION, ANGLE_SIZE = 0, 1, 2
SCALE_NAMES = {LENGTH: "length", ORIENTATION: "orientation", ANGLE_SIZE: "angle"}

# derived relation families
QUANT, QUAL = 0, 1

_BLOCK = 64  # bins per scale block in the address space


def address(kind: int, etype: int, value_bin: int = 0) -> int:
    """Detector address of a primary mode: unique per (kind, type, bin)."""
    return (kind * 16 + etype) * 1024 + value_bin


def decode_address(a: int) -> tuple[int, int, int]:
    head, value_bin = divmod(a, 1024)
    kind, etype = divmod(head, 16)
    return kind, etype, value_bin


def derived_address(scale: int, family: int, value: int) -> int:
    return address(DERIVED, scale * 2 + family, value)


def describe(a: int) -> str:
    kind, etype, value_bin = decode_address(a)
    if kind == STRUCTURAL:
        return ELEMENT_NAMES.get(etype, f"element{etype}")
    if kind == CHARACTERISTIC:
        return f"{SCALE_NAMES.get(etype, etype)}[{value_bin}]"
    scale, family = divmod(etype, 2)
    fam = "quant" if family == QUANT else "qual"
    return f"{'assoc' if kind == ASSOCIATIVE else 'derived'}:{SCALE_NAMES.get(scale, scale)}:{fam}[{value_bin}]"


@dataclass(slots=True)
class Mode:
    kind: int
    address: int
    value_bin: int
    sindex: SpatialIndex
    group: int = -1
    sources: tuple = ()

    @property
    def window(self):
        return self.sindex.window


@dataclass
class ModalGroup:
    structural: Mode
    characteristics: list = field(default_factory=list)
    element: tuple = ()

    def modes(self):
        return [self.structural, *self.characteristics]


# ---------------------------------------------------------------------------
# quantizers


@dataclass(frozen=True)
class QuantizerTables:
    length_edges: tuple = tuple(round(40 ** (i / 8), 6) for i in range(1, 8))
    orientation_bins: int = 16
    angle_bins: int = 12

    def __post_init__(self):
        edges = list(self.length_edges)
        if edges != sorted(edges) or len(set(edges)) != len(edges):
            raise ConfigError("length bin edges must be strictly increasing")
        if self.orientation_bins < 1 or self.angle_bins < 1:
            raise ConfigError("bin counts must be positive")
        if len(edges) + 1 > _BLOCK or self.orientation_bins > _BLOCK or self.angle_bins > _BLOCK:
            raise ConfigError(f"at most {_BLOCK} bins per scale")

    @property
    def length_bins(self) -> int:
        return len(self.length_edges) + 1

    def table_hash(self) -> str:
        blob = json.dumps(
            {"length": list(self.length_edges), "orientation": self.orientation_bins, "angle": self.angle_bins},
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def scale_size(self, scale: int) -> int:
        return {LENGTH: self.length_bins, ORIENTATION: self.orientation_bins, ANGLE_SIZE: self.angle_bins}[scale]


DEFAULT_TABLES = QuantizerTables()


def quantize_length(length: float, tables: QuantizerTables = DEFAULT_TABLES) -> int:
    """Right-open bins: ``edges[i-1] <= length < edges[i]`` maps to ``i``."""
    return int(np.searchsorted(tables.length_edges, length, side="right"))


def quantize_orientation(dx: float, dy: float, tables: QuantizerTables = DEFAULT_TABLES) -> int:
    """Undirected orientation folded to [0, 180), bins centred on multiples of the bin width."""
    if dx == 0 and dy == 0:
        raise ValueError("orientation of a zero vector")
    theta = math.degrees(math.atan2(dy, dx)) % 180.0
    width = 180.0 / tables.orientation_bins
    return int(math.floor(theta / width + 0.5)) % tables.orientation_bins


def quantize_angle(deg: float, tables: QuantizerTables = DEFAULT_TABLES) -> int:
    width = 360.0 / tables.angle_bins
    return min(int(deg // width), tables.angle_bins - 1)


def directed_orientation(p, q) -> float:
    """Heading of ``p -> q`` in degrees, counter-clockwise from +x with y pointing up."""
    return math.degrees(math.atan2(-(q[0] - p[0]), q[1] - p[1])) % 360.0


def corner_angle(prev_pt, corner, next_pt) -> float:
    """Angle swept counter-clockwise from ``corner -> next_pt`` to ``corner -> prev_pt``."""
    a = directed_orientation(corner, prev_pt)
    b = directed_orientation(corner, next_pt)
    d = (a - b) % 360.0
    return d if d > 0 else 360.0


# ---------------------------------------------------------------------------
# emission


def _split_until_indexable(seg, h):
    try:
        return [(seg, index_segment(seg, h))]
    except NoWindow:
        (r1, c1), (r2, c2) = seg
        if abs(r1 - r2) <= 1 and abs(c1 - c2) <= 1:
            raise AssertionError("unit segment cannot be indexed")
        mid = ((r1 + r2) // 2, (c1 + c2) // 2)
        return _split_until_indexable((seg[0], mid), h) + _split_until_indexable((mid, seg[1]), h)


def _segment_group(seg, six, tables, gid, element):
    (r1, c1), (r2, c2) = seg
    length = math.hypot(r2 - r1, c2 - c1)
    s = Mode(STRUCTURAL, address(STRUCTURAL, SEGMENT), 0, six, gid)
    chars = [Mode(CHARACTERISTIC, address(CHARACTERISTIC, LENGTH, lb), lb, six, gid)
             for lb in [quantize_length(max(length, 1e-9), tables)]]
    if length > 0:
        ob = quantize_orientation(c2 - c1, -(r2 - r1), tables)
        chars.append(Mode(CHARACTERISTIC, address(CHARACTERISTIC, ORIENTATION, ob), ob, six, gid))
    return ModalGroup(s, chars, element)


def emit_modal_groups(g: StrokeGraph, h: WindowHierarchy, tables: QuantizerTables = DEFAULT_TABLES) -> list[ModalGroup]:
    """Modal groups of a vectorized stroke graph.

    Order: segment groups (in segment order), then angle groups at corners,
    then bare endpoint and junction modes, each in critical-point order.
    """
    groups: list[ModalGroup] = []
    seg_window = {}
    for si, seg in enumerate(g.segments):
        for piece, six in _split_until_indexable(seg, h):
            groups.append(_segment_group(piece, six, tables, len(groups), ("segment", si)))
            seg_window.setdefault(si, six)

    # neighbour vertex of each critical point along every incident chain
    around: dict[int, list] = {}
    for ch in g.chains:
        pts = chain_points(g, ch)
        around.setdefault(ch.start, []).append((pts[1], ch.segments[0]))
        around.setdefault(ch.end, []).append((pts[-2], ch.segments[-1]))

    order = {cp: i for i, cp in enumerate(g.traversal)}
    for ci, cp in enumerate(g.critical_points):
        if cp.kind != CORNER or len(around.get(ci, [])) != 2:
            continue
        (p, _), (q, _) = around[ci]
        if p == q:
            continue
        six = index_angle(cp.point, h)
        deg = corner_angle(p, cp.point, q)
        ab = quantize_angle(deg, tables)
        s = Mode(STRUCTURAL, address(STRUCTURAL, ANGLE), 0, six, len(groups))
        c = Mode(CHARACTERISTIC, address(CHARACTERISTIC, ANGLE_SIZE, ab), ab, six, len(groups))
        groups.append(ModalGroup(s, [c], ("corner", ci, order.get(ci, -1))))

    for ci, cp in enumerate(g.critical_points):
        if cp.kind == ENDPOINT:
            inc = around.get(ci, [])
            if inc:
                base = seg_window[inc[0][1]]
                six = SpatialIndex(base.window, (cp.point,))
            else:
                six = index_angle(cp.point, h)
            groups.append(ModalGroup(Mode(STRUCTURAL, address(STRUCTURAL, END), 0, six, len(groups)), [], ("endpoint", ci)))
        elif cp.kind == JUNCTION:
            six = index_angle(cp.point, h)
            groups.append(ModalGroup(Mode(STRUCTURAL, address(STRUCTURAL, JOIN), 0, six, len(groups)), [], ("junction", ci)))
    return groups


def group_members_bound(group: ModalGroup, h: WindowHierarchy) -> bool:
    return all(is_bound(group.structural.sindex, m.sindex, h) for m in group.characteristics)


DIRECT, ASSOC = 0, 1


@dataclass
class ModeGraph:
    """Bound input vector of one presentation.

    ``bound[i, j]`` tells whether the structural modes of groups ``i`` and
    ``j`` are spatially bound.  ``derived`` holds derived characteristic
    modes whose ``sources`` are ordered pairs of group ids.
    """

    groups: list
    bound: np.ndarray
    derived: list = field(default_factory=list)
    assoc_groups: frozenset = frozenset()
    _masks: list = field(default=None, repr=False, compare=False)
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def build(cls, groups: list[ModalGroup], h: WindowHierarchy, derived=()) -> "ModeGraph":
        n = len(groups)
        if n:
            R = np.array([h.rects[h._pos[gr.structural.window]] for gr in groups])
            bound = (
                (R[:, None, 0] < R[None, :, 1]) & (R[None, :, 0] < R[:, None, 1])
                & (R[:, None, 2] < R[None, :, 3]) & (R[None, :, 2] < R[:, None, 3])
            )
        else:
            bound = np.zeros((0, 0), dtype=bool)
        return cls(list(groups), bound, list(derived))

    def __len__(self):
        return self.size

    def bound_masks(self) -> list:
        """Per group, an int bitmask of the groups it is bound to."""
        if self._masks is None:
            self._masks = [
                sum(1 << j for j in np.nonzero(row)[0].tolist()) for row in self.bound
            ]
        return self._masks

    @property
    def size(self) -> int:
        """Number of input modes (structural, characteristic and derived)."""
        return sum(1 + len(gr.characteristics) for gr in self.groups) + len(self.derived)

    def modes(self) -> list[Mode]:
        out = []
        for gr in self.groups:
            out.extend(gr.modes())
        out.extend(self.derived)
        return out

    def contributor_type(self, gid: int) -> int:
        """Excitation type of the primary reactions making up group ``gid``."""
        return ASSOC if gid in self.assoc_groups else DIRECT
