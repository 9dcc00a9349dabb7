"""Raster glyph to stroke graph: thinning, straight-segment fitting, traversal.

Points are ``(row, col)`` integer pairs throughout.  The text record written by
:func:`format_stroke_graph` uses ``x = col`` and ``y = row``.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DataError, EmptyImage

Point = tuple[int, int]

ENDPOINT = "endpoint"
CORNER = "corner"
JUNCTION = "junction"
CLOCKWISE = "clockwise"
COUNTERCLOCKWISE = "counterclockwise"

_ORTHO = ((-1, 0), (0, 1), (1, 0), (0, -1))
_DIAG = ((-1, 1), (1, 1), (1, -1), (-1, -1))


def as_raster(img) -> np.ndarray:
    """Validate a binary raster and return it as a ``uint8`` array."""
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DataError(f"raster must be a non-empty 2-D grid, got shape {arr.shape}")
    if arr.dtype != bool and not np.isin(arr, (0, 1)).all():
        raise DataError("raster pixels must be 0 or 1")
    return arr.astype(np.uint8)


def binarize(gray, threshold: int = 128) -> np.ndarray:
    """Fixed-threshold binarization of a grayscale glyph (``pixel >= threshold``)."""
    return (np.asarray(gray) >= threshold).astype(np.uint8)


# ---------------------------------------------------------------------------
# thinning


def _build_thinning_luts() -> tuple[np.ndarray, np.ndarray]:
    # bit k of the code is neighbour P(k+2): N, NE, E, SE, S, SW, W, NW
    first = np.zeros(256, dtype=bool)
    second = np.zeros(256, dtype=bool)
    for code in range(256):
        p = [(code >> k) & 1 for k in range(8)]
        n, e, s, w = p[0], p[2], p[4], p[6]
        b = sum(p)
        a = sum(1 for k in range(8) if p[k] == 0 and p[(k + 1) % 8] == 1)
        if 2 <= b <= 6 and a == 1:
            first[code] = n * e * s == 0 and e * s * w == 0
            second[code] = n * e * w == 0 and n * s * w == 0
    return first, second


_LUT_FIRST, _LUT_SECOND = _build_thinning_luts()
_CODE_WEIGHTS = np.array([[128, 1, 2], [64, 0, 4], [32, 16, 8]], dtype=np.int32)


def _neighbour_codes(img: np.ndarray) -> np.ndarray:
    return ndimage.correlate(img.astype(np.int32), _CODE_WEIGHTS, mode="constant", cval=0)


_EIGHT = np.ones((3, 3), dtype=int)


def _thin(img: np.ndarray) -> np.ndarray:
    img = img.copy()
    while True:
        changed = False
        for lut in (_LUT_FIRST, _LUT_SECOND):
            remove = (img == 1) & lut[_neighbour_codes(img)]
            if not remove.any():
                continue
            # a component must never vanish entirely (2x2 blocks do under the raw rule)
            labels, count = ndimage.label(img, structure=_EIGHT)
            keep = img.astype(bool) & ~remove
            survivors = np.unique(labels[keep])
            for comp in set(range(1, count + 1)) - set(survivors.tolist()):
                rows, cols = np.nonzero(labels == comp)
                remove[rows[0], cols[0]] = False
            img[remove] = 0
            changed = True
        if not changed:
            return img


def _pixel_neighbours(img: np.ndarray, r: int, c: int) -> list[Point]:
    h, w = img.shape
    out = []
    for dr, dc in _ORTHO:
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w and img[rr, cc]:
            out.append((rr, cc))
    for dr, dc in _DIAG:
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w and img[rr, cc]:
            # a diagonal step shortcut by an orthogonal path is not an edge
            if not img[r + dr, c] and not img[r, c + dc]:
                out.append((rr, cc))
    return out


def pixel_degree(img: np.ndarray, point: Point) -> int:
    """Degree of a skeleton pixel in the stroke pixel graph."""
    return len(_pixel_neighbours(img, *point))


def _prune_spurs(img: np.ndarray, max_len: int) -> bool:
    """Remove endpoint branches of at most ``max_len`` pixels hanging off a junction."""
    if max_len <= 0:
        return False
    pts = list(zip(*np.nonzero(img)))
    deg = {p: pixel_degree(img, p) for p in pts}
    spurs: dict[Point, list[list[Point]]] = {}
    for p in pts:
        if deg[p] != 1:
            continue
        branch = [p]
        prev, cur = None, p
        while True:
            nxt = [q for q in _pixel_neighbours(img, *cur) if q != prev]
            if len(nxt) != 1:
                break
            prev, cur = cur, nxt[0]
            if deg[cur] >= 3:
                if len(branch) <= max_len:
                    spurs.setdefault(cur, []).append(branch)
                break
            if deg[cur] == 1:
                break
            branch.append(cur)
    changed = False
    for junction in sorted(spurs):
        branches = sorted(spurs[junction], key=lambda b: (len(b), b[0]))
        # keep at least two branches at every junction
        removable = max(0, min(len(branches), deg[junction] - 2))
        for branch in branches[:removable]:
            for q in branch:
                img[q] = 0
            changed = True
    return changed


def skeletonize(img, spur_length: int = 0) -> np.ndarray:
    """Thin a binary raster to unit-width strokes.

    Two-subiteration parallel thinning, repeated with optional spur pruning
    until neither step changes the image.  The result is a fixed point, so the
    operation is idempotent.
    """
    arr = as_raster(img)
    if not arr.any():
        raise EmptyImage("image has no foreground pixels")
    out = arr.copy()
    while True:
        out = _thin(out)
        if not _prune_spurs(out, spur_length):
            return out


# ---------------------------------------------------------------------------
# vectorization


@dataclass
class CriticalPoint:
    point: Point
    kind: str


@dataclass
class Chain:
    """Polyline between two critical points, as an ordered list of segment ids."""

    start: int
    end: int
    segments: list[int]


@dataclass
class StrokeGraph:
    shape: tuple[int, int]
    segments: list[tuple[Point, Point]] = field(default_factory=list)
    critical_points: list[CriticalPoint] = field(default_factory=list)
    chains: list[Chain] = field(default_factory=list)
    traversal: list[int] = field(default_factory=list)
    direction: str | None = None
    capture_point: int | None = None

    def kinds(self, kind: str) -> list[int]:
        return [i for i, cp in enumerate(self.critical_points) if cp.kind == kind]

    def translated(self, dr: int, dc: int) -> "StrokeGraph":
        def mv(p):
            return (p[0] + dr, p[1] + dc)

        return StrokeGraph(
            shape=self.shape,
            segments=[(mv(a), mv(b)) for a, b in self.segments],
            critical_points=[CriticalPoint(mv(cp.point), cp.kind) for cp in self.critical_points],
            chains=[Chain(ch.start, ch.end, list(ch.segments)) for ch in self.chains],
            traversal=list(self.traversal),
            direction=self.direction,
            capture_point=self.capture_point,
        )


def point_segment_distance(p, a, b) -> float:
    (pr, pc), (ar, ac), (br, bc) = p, a, b
    dr, dc = br - ar, bc - ac
    denom = dr * dr + dc * dc
    if denom == 0:
        return math.hypot(pr - ar, pc - ac)
    t = max(0.0, min(1.0, ((pr - ar) * dr + (pc - ac) * dc) / denom))
    return math.hypot(pr - (ar + t * dr), pc - (ac + t * dc))


def split_polyline(points: list[Point], tol: float) -> list[Point]:
    """Recursive max-deviation split; returns the retained vertices."""
    if len(points) <= 2:
        return list(points)
    a, b = points[0], points[-1]
    best, index = -1.0, 0
    for i in range(1, len(points) - 1):
        d = point_segment_distance(points[i], a, b)
        if d > best:
            best, index = d, i
    if best <= tol:
        return [a, b]
    left = split_polyline(points[: index + 1], tol)
    right = split_polyline(points[index:], tol)
    return left[:-1] + right


def direction_change(a: Point, b: Point, c: Point) -> float:
    """Unsigned change of heading at ``b`` in degrees (0 = straight on)."""
    h1 = math.atan2(b[0] - a[0], b[1] - a[1])
    h2 = math.atan2(c[0] - b[0], c[1] - b[1])
    d = abs(math.degrees(h2 - h1)) % 360.0
    return min(d, 360.0 - d)


def _cluster_junctions(junction_pixels: list[Point]) -> list[list[Point]]:
    remaining = set(junction_pixels)
    clusters = []
    for seed in sorted(junction_pixels):
        if seed not in remaining:
            continue
        comp, queue = [], deque([seed])
        remaining.discard(seed)
        while queue:
            p = queue.popleft()
            comp.append(p)
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    q = (p[0] + dr, p[1] + dc)
                    # merged pixels stay within 1 px of the cluster seed
                    if q in remaining and max(abs(q[0] - seed[0]), abs(q[1] - seed[1])) <= 1:
                        remaining.discard(q)
                        queue.append(q)
        clusters.append(sorted(comp))
    return clusters


def _representative(cluster: list[Point], deg: dict[Point, int]) -> Point:
    def key(p):
        spread = max(max(abs(p[0] - q[0]), abs(p[1] - q[1])) for q in cluster)
        return (spread, -deg[p], p)

    return min(cluster, key=key)


def vectorize(skel, tol: float = 1.5, corner_deg: float = 30.0) -> StrokeGraph:
    """Fit straight segments to a unit-width skeleton and classify critical points."""
    img = as_raster(skel)
    pts = sorted(zip(*np.nonzero(img)))
    if not pts:
        raise EmptyImage("skeleton has no foreground pixels")
    pts = [(int(r), int(c)) for r, c in pts]
    nbrs = {p: _pixel_neighbours(img, *p) for p in pts}
    deg = {p: len(v) for p, v in nbrs.items()}

    node_of: dict[Point, int] = {}
    node_pos: list[Point] = []
    node_kind: list[str] = []
    for cluster in _cluster_junctions([p for p in pts if deg[p] >= 3]):
        nid = len(node_pos)
        node_pos.append(_representative(cluster, deg))
        node_kind.append(JUNCTION)
        for p in cluster:
            node_of[p] = nid
    for p in pts:
        if deg[p] <= 1:
            node_of[p] = len(node_pos)
            node_pos.append(p)
            node_kind.append(ENDPOINT)

    # trace pixel paths between nodes, then node-free loops
    paths: list[tuple[int, int | None, list[Point]]] = []
    used: set[frozenset] = set()
    for p in pts:
        if p not in node_of:
            continue
        start = node_of[p]
        for q in nbrs[p]:
            if node_of.get(q) == start or frozenset((p, q)) in used:
                continue
            used.add(frozenset((p, q)))
            line = [node_pos[start]]
            if p != node_pos[start]:
                line.append(p)
            prev, cur = p, q
            while cur not in node_of:
                line.append(cur)
                nxt = [x for x in nbrs[cur] if x != prev]
                prev, cur = cur, nxt[0]
                used.add(frozenset((prev, cur)))
            end = node_of[cur]
            if cur != node_pos[end]:
                line.append(cur)
            line.append(node_pos[end])
            line = [pt for i, pt in enumerate(line) if i == 0 or pt != line[i - 1]]
            paths.append((start, end, line))
    on_path = {pt for _, _, line in paths for pt in line} | set(node_of)
    loops = []
    for p in pts:
        if p in on_path:
            continue
        loop, prev, cur = [p], None, p
        while True:
            on_path.add(cur)
            nxt = [x for x in nbrs[cur] if x != prev and (x not in on_path or x == p)]
            if prev is None:
                nxt = nxt[:1]
            if not nxt or nxt[0] == p:
                break
            prev, cur = cur, nxt[0]
            loop.append(cur)
        loops.append(loop)

    polylines: list[tuple[int | None, int | None, list[Point]]] = []
    for start, end, line in paths:
        polylines.append((start, end, split_polyline(line, tol)))
    for p in pts:
        if deg[p] == 0:  # isolated dot: a zero-length segment
            polylines.append((node_of[p], node_of[p], [p, p]))
    for loop in loops:
        if len(loop) < 3:
            polylines.append((None, None, split_polyline(loop, tol)))
            continue
        far = max(range(len(loop)), key=lambda i: (math.dist(loop[0], loop[i]), -i))
        verts = split_polyline(loop[: far + 1], tol)[:-1] + split_polyline(loop[far:] + [loop[0]], tol)
        polylines.append((-1, -1, verts))

    # corners at polyline joints, merged when within 1 px of another critical point
    crit: list[CriticalPoint] = [CriticalPoint(p, k) for p, k in zip(node_pos, node_kind)]
    plan = []
    for start, end, verts in polylines:
        closed = start == -1
        if closed:
            verts = verts[:-1] if verts[-1] == verts[0] else verts
            n = len(verts)
            turns = [direction_change(verts[i - 1], verts[i], verts[(i + 1) % n]) for i in range(n)]
        else:
            turns = [0.0] + [
                direction_change(verts[i - 1], verts[i], verts[i + 1]) for i in range(1, len(verts) - 1)
            ] + [0.0]
        plan.append((start, end, verts, turns, closed))

    candidates = []
    for pi, (_, _, verts, turns, closed) in enumerate(plan):
        idx = range(len(verts)) if closed else range(1, len(verts) - 1)
        for i in idx:
            if turns[i] >= corner_deg:
                candidates.append((-turns[i], verts[i], pi, i))
    taken = [cp.point for cp in crit]
    corner_at: dict[tuple[int, int], int] = {}
    for neg_turn, pt, pi, i in sorted(candidates):
        if any(max(abs(pt[0] - q[0]), abs(pt[1] - q[1])) <= 1 for q in taken):
            continue
        corner_at[(pi, i)] = len(crit)
        crit.append(CriticalPoint(pt, CORNER))
        taken.append(pt)
    for pi, (_, _, verts, turns, closed) in enumerate(plan):
        if closed and not any((pi, i) in corner_at for i in range(len(verts))):
            i = max(range(len(verts)), key=lambda j: (turns[j], -j))
            corner_at[(pi, i)] = len(crit)
            crit.append(CriticalPoint(verts[i], CORNER))

    # renumber critical points in (row, col) order for determinism
    order = sorted(range(len(crit)), key=lambda i: (crit[i].point, crit[i].kind))
    new_id = {old: new for new, old in enumerate(order)}
    g = StrokeGraph(shape=img.shape)
    g.critical_points = [crit[i] for i in order]

    for pi, (start, end, verts, turns, closed) in enumerate(plan):
        if closed:
            n = len(verts)
            first = min(i for i in range(n) if (pi, i) in corner_at)
            cyc = verts[first:] + verts[:first] + [verts[first]]
            cut = [k for k in range(n + 1) if (pi, (k + first) % n) in corner_at]
            cut_ids = [new_id[corner_at[(pi, (k + first) % n)]] for k in cut]
        else:
            if start is None:
                continue
            cyc = verts
            cut = [0] + [i for i in range(1, len(verts) - 1) if (pi, i) in corner_at] + [len(verts) - 1]
            cut_ids = [new_id[start]] + [new_id[corner_at[(pi, i)]] for i in cut[1:-1]] + [new_id[end]]
        for k in range(len(cut) - 1):
            seg_ids = []
            for i in range(cut[k], cut[k + 1]):
                seg_ids.append(len(g.segments))
                g.segments.append((cyc[i], cyc[i + 1]))
            if seg_ids:
                g.chains.append(Chain(cut_ids[k], cut_ids[k + 1], seg_ids))
    return g


# ---------------------------------------------------------------------------
# traversal


def _bearing(frm: Point, to: Point) -> float:
    """Screen bearing in degrees, clockwise from west (west=0, north=90, east=180)."""
    ang = math.degrees(math.atan2(-(to[0] - frm[0]), to[1] - frm[1]))  # ccw from east, y up
    return (180.0 - ang) % 360.0


def signed_area(points: list[Point]) -> float:
    """Shoelace area in screen coordinates; positive means clockwise on screen."""
    s = 0.0
    n = len(points)
    for i in range(n):
        (r1, c1), (r2, c2) = points[i], points[(i + 1) % n]
        s += c1 * r2 - c2 * r1
    return s / 2.0


def chain_points(g: StrokeGraph, chain: Chain, reverse: bool = False) -> list[Point]:
    pts = [g.segments[chain.segments[0]][0]] + [g.segments[s][1] for s in chain.segments]
    return pts[::-1] if reverse else pts


def traverse(g: StrokeGraph, seed: int = 0) -> StrokeGraph:
    """Fill ``traversal``, ``direction`` and ``capture_point`` of ``g`` in place.

    The walk starts at the left-most-then-topmost endpoint (or critical point
    when there are no endpoints).  At each critical point the untraversed
    chain met first when sweeping clockwise from the arrival bearing is taken;
    equal bearings are ordered by a ``seed``-driven shuffle.  When a branch is
    exhausted the walk returns to the last critical point with open chains.
    """
    if not g.critical_points:
        raise DataError("stroke graph has no critical points")
    rng = random.Random(seed)
    incident: dict[int, list[tuple[int, bool]]] = {i: [] for i in range(len(g.critical_points))}
    for ci, ch in enumerate(g.chains):
        incident[ch.start].append((ci, False))
        if ch.end != ch.start:
            incident[ch.end].append((ci, True))
        else:
            incident[ch.start].append((ci, True))

    def start_key(i):
        r, c = g.critical_points[i].point
        return (c, r)

    endpoints = g.kinds(ENDPOINT)
    unvisited_nodes = set(range(len(g.critical_points)))
    seq: list[int] = []
    walk_pts: list[Point] = []
    done: set[int] = set()
    capture = None
    while unvisited_nodes:
        pool = [i for i in endpoints if i in unvisited_nodes] or sorted(unvisited_nodes)
        start = min(pool, key=start_key)
        if capture is None:
            capture = start
        stack = [(start, 180.0)]  # arrival bearing: came from the west
        seq.append(start)
        walk_pts.append(g.critical_points[start].point)
        unvisited_nodes.discard(start)
        while stack:
            node, back = stack[-1]
            here = g.critical_points[node].point
            options = []
            for ci, rev in incident[node]:
                if ci in done:
                    continue
                pts = chain_points(g, g.chains[ci], rev)
                sweep = (_bearing(here, pts[1]) - back) % 360.0
                options.append((round(sweep, 6), rng.random(), ci, rev, pts))
            if not options:
                stack.pop()
                continue
            if seq[-1] != node:
                # resuming a branch point reached earlier
                seq.append(node)
                walk_pts.append(here)
            options.sort()
            _, _, ci, rev, pts = options[0]
            done.add(ci)
            ch = g.chains[ci]
            nxt = ch.start if rev else ch.end
            walk_pts.extend(pts[1:])
            seq.append(nxt)
            unvisited_nodes.discard(nxt)
            stack.append((nxt, _bearing(pts[-1], pts[-2])))
    g.traversal = seq
    g.capture_point = capture
    g.direction = CLOCKWISE if signed_area(walk_pts) >= 0 else COUNTERCLOCKWISE
    return g


def ingest(img, *, spur_length: int = 0, tol: float = 1.5, corner_deg: float = 30.0, seed: int = 0) -> StrokeGraph:
    """Binary raster to a traversed stroke graph."""
    g = vectorize(skeletonize(img, spur_length=spur_length), tol=tol, corner_deg=corner_deg)
    return traverse(g, seed=seed)


def format_stroke_graph(g: StrokeGraph) -> str:
    """Structured-text record of a stroke graph.

    ::

        segments <n>
        x1,y1,x2,y2          (one line per segment)
        critical <m>
        <id> <kind> x,y      (one line per critical point)
        traversal <dir> capture=<id> <id> <id> ...
    """
    lines = [f"segments {len(g.segments)}"]
    for (r1, c1), (r2, c2) in g.segments:
        lines.append(f"{c1},{r1},{c2},{r2}")
    lines.append(f"critical {len(g.critical_points)}")
    for i, cp in enumerate(g.critical_points):
        lines.append(f"{i} {cp.kind} {cp.point[1]},{cp.point[0]}")
    if g.traversal:
        ids = " ".join(str(i) for i in g.traversal)
        lines.append(f"traversal {g.direction} capture={g.capture_point} {ids}")
    return "\n".join(lines) + "\n"
