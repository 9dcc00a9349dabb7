"""Hierarchy of perception windows over a square receptor matrix.

Level ``i`` (1-based) holds square windows of side ``n + i - 1``.  Each level
tiles the matrix with base windows, adds copies shifted right or down by
``k = 1..n-1`` cells, and adds truncated windows obtained by shifting the
left-most (top-most) base windows further left (up) and clipping them to the
matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import BadGeometry, NoWindow

NONE, RIGHT, DOWN, LEFT, UP = 0, 1, 2, 3, 4
SHIFT_NAMES = {NONE: "none", RIGHT: "right", DOWN: "down", LEFT: "left", UP: "up"}


class WindowId(NamedTuple):
    level: int
    base: int
    shift_dir: int = NONE
    shift_k: int = 0


@dataclass(frozen=True)
class SpatialIndex:
    window: WindowId
    points: tuple = ()
    marks: tuple = ()

    def same_place(self, other: "SpatialIndex") -> bool:
        return self.window == other.window


def _base_starts(l: int, s: int) -> list[int]:
    starts = list(range(0, l - s + 1, s))
    if starts[-1] + s < l:
        starts.append(l - s)
    return starts


class WindowHierarchy:
    """Immutable enumeration of all windows for a matrix of side ``l``."""

    def __init__(self, l: int, n: int):
        if not (isinstance(l, (int, np.integer)) and isinstance(n, (int, np.integer))):
            raise BadGeometry("l and n must be integers")
        if n < 2 or n >= l:
            raise BadGeometry(f"need 2 <= n < l, got l={l}, n={n}")
        self.l, self.n = int(l), int(n)
        self.m = self.l - self.n + 1
        ids, rects = [], []
        for level in range(1, self.m + 1):
            s = self.n + level - 1
            starts = _base_starts(self.l, s)
            for bi, (r, c) in enumerate((r, c) for r in starts for c in starts):
                ids.append(WindowId(level, bi))
                rects.append((r, r + s, c, c + s))
                for k in range(1, self.n):
                    if c + k + s <= self.l:
                        ids.append(WindowId(level, bi, RIGHT, k))
                        rects.append((r, r + s, c + k, c + k + s))
                    if r + k + s <= self.l:
                        ids.append(WindowId(level, bi, DOWN, k))
                        rects.append((r + k, r + k + s, c, c + s))
                    if c == 0:
                        ids.append(WindowId(level, bi, LEFT, k))
                        rects.append((r, r + s, 0, s - k))
                    if r == 0:
                        ids.append(WindowId(level, bi, UP, k))
                        rects.append((0, s - k, c, c + s))
        order = sorted(range(len(ids)), key=lambda i: ids[i])
        self.ids: list[WindowId] = [ids[i] for i in order]
        self.rects = np.array([rects[i] for i in order], dtype=np.int32)
        self._pos = {w: i for i, w in enumerate(self.ids)}
        self.levels = np.array([w.level for w in self.ids], dtype=np.int32)
        # per level, windows of minimal size are first in id order
        self._level_slices = {}
        for lv in range(1, self.m + 1):
            idx = np.nonzero(self.levels == lv)[0]
            self._level_slices[lv] = (int(idx[0]), int(idx[-1]) + 1)
        self._cover = lru_cache(maxsize=200_000)(self._cover_uncached)

    def __len__(self):
        return len(self.ids)

    def rect(self, w: WindowId) -> tuple[int, int, int, int]:
        """Half-open ``(row0, row1, col0, col1)`` of a window."""
        return tuple(int(v) for v in self.rects[self._pos[w]])

    def windows(self, level: int) -> list[WindowId]:
        a, b = self._level_slices[level]
        return self.ids[a:b]

    def contains(self, w: WindowId, p) -> bool:
        r0, r1, c0, c1 = self.rect(w)
        return r0 <= p[0] < r1 and c0 <= p[1] < c1

    def _check_point(self, p):
        if not (0 <= p[0] < self.l and 0 <= p[1] < self.l):
            raise NoWindow(f"point {p} outside the {self.l}x{self.l} matrix")

    def _cover_uncached(self, rmin, rmax, cmin, cmax) -> WindowId:
        R = self.rects
        hit = (R[:, 0] <= rmin) & (rmax < R[:, 1]) & (R[:, 2] <= cmin) & (cmax < R[:, 3])
        i = int(np.argmax(hit))
        if not hit[i]:
            raise NoWindow("no window contains all points")
        return self.ids[i]

    def lowest_window(self, points) -> WindowId:
        """Smallest-id window of the lowest level containing every point."""
        for p in points:
            self._check_point(p)
        rows = [int(p[0]) for p in points]
        cols = [int(p[1]) for p in points]
        return self._cover(min(rows), max(rows), min(cols), max(cols))

    def overlaps(self, a: WindowId, b: WindowId) -> bool:
        ra, rb = self.rects[self._pos[a]], self.rects[self._pos[b]]
        return ra[0] < rb[1] and rb[0] < ra[1] and ra[2] < rb[3] and rb[2] < ra[3]


def build_hierarchy(l: int, n: int) -> WindowHierarchy:
    return WindowHierarchy(l, n)


def index_segment(seg, h: WindowHierarchy) -> SpatialIndex:
    p1, p2 = (tuple(int(v) for v in p) for p in seg)
    return SpatialIndex(h.lowest_window([p1, p2]), (p1, p2))


def index_angle(vertex, h: WindowHierarchy) -> SpatialIndex:
    v = tuple(int(x) for x in vertex)
    return SpatialIndex(h.lowest_window([v]), (v,))


def is_bound(a: SpatialIndex, b: SpatialIndex, h: WindowHierarchy) -> bool:
    """Windows are equal, nested or intersect."""
    if a.window == b.window:
        return True
    return bool(h.overlaps(a.window, b.window))


def resolve_where(stimuli, h: WindowHierarchy) -> list[WindowId]:
    """Per stimulus, the candidate window covering most of its points.

    ``stimuli`` is a sequence of ``(points, candidate_windows)``.  Ties go to
    the smallest window id.
    """
    out = []
    for points, candidates in stimuli:
        best = None
        for w in sorted(candidates):
            cover = sum(h.contains(w, p) for p in points)
            if best is None or cover > best[0]:
                best = (cover, w)
        if best is None:
            raise NoWindow("stimulus has no candidate windows")
        out.append(best[1])
    return out


def points_agree(pa, pb, tol: float) -> bool:
    """Carried points coincide within ``tol`` (Chebyshev); point pairs are unordered."""
    if len(pa) != len(pb):
        return False
    if len(pa) == 1:
        (r1, c1), (r2, c2) = pa[0], pb[0]
        return abs(r1 - r2) <= tol and abs(c1 - c2) <= tol
    if len(pa) == 2:
        (a, b), (c, d) = pa, pb

        def near(p, q):
            return abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol

        return (near(a, c) and near(b, d)) or (near(a, d) and near(b, c))
    return tuple(pa) == tuple(pb)


def index_agrees(a: SpatialIndex, b: SpatialIndex, tol: float | None = None) -> bool:
    """Spatial index equality: same window, or with ``tol`` set, coinciding points."""
    if tol is None:
        return a.window == b.window
    return points_agree(a.points, b.points, tol)
