"""Maps of detectors, novelty neurons, counter-training and parallel recognition."""

from __future__ import annotations

import random
from functools import lru_cache
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .attention import attend, form_derived_modes
from .concept import capture, concept_from_dict, concept_to_dict, match, update_membership
from .config import frontend_hash, make_config, tables_of
from .contour import ENDPOINT, JUNCTION, StrokeGraph, as_raster, binarize, ingest
from .detector import (
    ALTERNATIVE,
    CAPTURED,
    CLUSTER,
    EXAMPLE,
    SUBCLUSTER,
    TRAINED,
    DetectorState,
    Reaction,
    react,
)
from .errors import DataError, EmptyImage, ModelError, TooFewPoints, UnknownLabel
from .features import ASSOC, CHARACTERISTIC, DIRECT, STRUCTURAL, ModeGraph, address, emit_modal_groups
from .spatial import WindowHierarchy

CAPTURE_CLUSTER = "capture_cluster"
CAPTURE_SUBCLUSTER = "capture_subcluster"
CAPTURE_EXAMPLE = "capture_example"
CAPTURE_ALTERNATIVE = "capture_alternative"
TRAIN_EXISTING = "train_existing"
RECOGNIZE_DIRECT = "recognize_direct"
RECOGNIZE_ASSOCIATIVE = "recognize_associative"
NO_OP = "no_op"
ACTIONS = (CAPTURE_CLUSTER, CAPTURE_SUBCLUSTER, CAPTURE_EXAMPLE, CAPTURE_ALTERNATIVE, TRAIN_EXISTING,
           RECOGNIZE_DIRECT, RECOGNIZE_ASSOCIATIVE, NO_OP)
CAPTURES = {CAPTURE_CLUSTER: CLUSTER, CAPTURE_SUBCLUSTER: SUBCLUSTER, CAPTURE_EXAMPLE: EXAMPLE,
            CAPTURE_ALTERNATIVE: ALTERNATIVE}


def decide(trained: bool, has_input: bool, z_present: bool, z_known: bool, responded: bool, excess: int) -> tuple:
    """Novelty decision table.

    ``excess`` is the sign of (input size - winner level).  Returns the
    primary action, followed by ``capture_example`` when a trained detector
    responded to a larger input under a training signal.
    """
    if not has_input:
        return (RECOGNIZE_ASSOCIATIVE,) if z_present and trained else (NO_OP,)
    if z_present:
        if not trained:
            return (CAPTURE_CLUSTER,)
        if responded:
            return (TRAIN_EXISTING, CAPTURE_EXAMPLE) if excess > 0 else (TRAIN_EXISTING,)
        return (CAPTURE_ALTERNATIVE,) if z_known else (CAPTURE_SUBCLUSTER,)
    if not trained or not responded:
        return (NO_OP,)
    if excess > 0:
        return (CAPTURE_EXAMPLE,)
    return (RECOGNIZE_DIRECT,) if excess == 0 else (RECOGNIZE_ASSOCIATIVE,)


def style_signal(g: StrokeGraph) -> tuple:
    """Topological signature used as a class's sub-signal: endpoints, junctions, independent loops."""
    kinds = Counter(cp.kind for cp in g.critical_points)
    parent = list(range(len(g.critical_points)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for ch in g.chains:
        parent[find(ch.start)] = find(ch.end)
    parts = len({find(i) for i in range(len(parent))})
    loops = len(g.chains) - len(parent) + parts
    return (kinds[ENDPOINT], kinds[JUNCTION], loops)


# ---------------------------------------------------------------------------
# representational system


class RepSystemStub:
    """Label table of training signals and the reverse bindings to detectors."""

    def __init__(self, labels=range(10)):
        self.z_of = {int(lab): int(lab) for lab in labels}
        self.bindings: dict[int, list] = {z: [] for z in self.z_of.values()}

    def signal(self, label):
        try:
            return self.z_of[int(label)]
        except (KeyError, TypeError, ValueError):
            raise UnknownLabel(f"label {label!r} unknown to the representational system") from None

    def bind(self, z, a: int):
        if a not in self.bindings[z]:
            self.bindings[z].append(a)

    def unbind(self, a: int):
        for lst in self.bindings.values():
            if a in lst:
                lst.remove(a)


# ---------------------------------------------------------------------------
# maps


@lru_cache(maxsize=8)
def _ring_offsets(side: int):
    span = range(-(side - 1), side)
    return sorted(((dr, dc) for dr in span for dc in span), key=lambda t: (max(abs(t[0]), abs(t[1])), t[0], t[1]))


class NoveltyNeuron:
    """Memory of the style sub-signals seen by one map."""

    def __init__(self):
        self.Z: dict = {}  # sub-signal -> address of the detector it was first stored with

    def knows(self, sub) -> bool:
        return sub in self.Z


class DetectorMap:
    def __init__(self, index: int, z1, side: int = 64, seed: int = 0):
        self.index = index
        self.z1 = z1
        self.side = side
        self.seed = seed
        self.base = index * side * side
        self.detectors: dict[int, DetectorState] = {}
        self.novelty = NoveltyNeuron()
        self.center = self.base + (side // 2) * side + side // 2
        self.t = 0
        self.n_random = 0
        self._table = None
        self._blocks: dict = {}

    def __iter__(self):
        return iter(sorted(self.detectors))

    def trained(self):
        return [self.detectors[a] for a in sorted(self.detectors)]

    def __len__(self):
        return len(self.detectors)

    def count(self, kind=None) -> int:
        return sum(1 for d in self.detectors.values() if kind is None or d.kind == kind)

    def touch(self):
        self._table = None

    # -- placement ---------------------------------------------------------

    def _free(self, a: int) -> bool:
        return a not in self.detectors

    def nearest_free(self, ref: int) -> int:
        r0, c0 = divmod(ref - self.base, self.side)
        for dr, dc in _ring_offsets(self.side):
            r, c = r0 + dr, c0 + dc
            if 0 <= r < self.side and 0 <= c < self.side:
                a = self.base + r * self.side + c
                if self._free(a):
                    return a
        raise ModelError(f"map {self.index} has no free detector left")

    def random_free(self) -> int:
        rng = random.Random(self.seed * 1_000_003 + self.index * 7919 + self.n_random)
        self.n_random += 1
        for _ in range(64):
            a = self.base + rng.randrange(self.side * self.side)
            if self._free(a):
                return a
        return self.nearest_free(self.center)

    def place(self, kind: str, ref: int | None = None) -> int:
        if kind == CLUSTER:
            return self.center if self._free(self.center) else self.nearest_free(self.center)
        if kind == SUBCLUSTER:
            return self.random_free()
        return self.nearest_free(self.center if ref is None else ref)

    def add(self, d: DetectorState):
        self.detectors[d.a] = d
        self.touch()

    def remove(self, a: int):
        del self.detectors[a]
        self._blocks.pop(a, None)
        self.touch()


# ---------------------------------------------------------------------------
# per-map bound tables used to order and prune the matcher


class _Columns:
    def __init__(self, tables, h=None, tol=None):
        self.h, self.tol = h, tol
        cols = []
        for etype in range(4):
            cols.append(address(STRUCTURAL, etype))
        for scale in range(3):
            for v in range(tables.scale_size(scale)):
                cols.append(address(CHARACTERISTIC, scale, v))
        self.of = {a: i for i, a in enumerate(cols)}
        self.n = len(cols)
        self.n_struct = 4

    def percept_vector(self, percept: ModeGraph) -> np.ndarray:
        x = np.zeros(self.n, dtype=np.int32)
        for gr in percept.groups:
            x[self.of[gr.structural.address]] += 1
            for a in {m.address for m in gr.characteristics}:
                x[self.of[a]] += 1
        return x


def _padded_points(points):
    pts = list(points)[:2] or [(-99, -99)]
    if len(pts) == 1:
        pts = pts * 2
    return [*pts[0], *pts[1]]


def _detector_block(d: DetectorState, cols: _Columns, h: WindowHierarchy) -> dict:
    con = d.concept
    structs, chars, assoc, _ = con.compiled()
    row = {sid: r for r, sid in enumerate(structs)}
    counts = np.zeros(cols.n, dtype=np.int32)
    s_rows, c_rows = [], []
    for sid in structs:
        m = con.modes[sid]
        s_rows.append([m.address, m.wi, len(m.points), *_padded_points(m.points), h._pos[m.window]])
        counts[cols.of[m.address]] += 1
        for ci in chars[sid]:
            c_rows.append([row[sid], cols.of[con.modes[ci].address]])
            counts[cols.of[con.modes[ci].address]] += 1
    a_rows = [[row[x] for x in con.modes[ai].sources] for ai in assoc]
    return {
        "key": structs,
        "counts": counts,
        "g": con.g,
        "s": np.array(s_rows, dtype=np.int64).reshape(-1, 8),
        "c": np.array(c_rows, dtype=np.int64).reshape(-1, 2),
        "a": np.array(a_rows, dtype=np.int64).reshape(-1, 2),
    }


class _MapTable:
    """Flattened active modes of one map's detectors, for vectorized upper bounds on ``b``."""

    def __init__(self, dets, blocks, tol):
        self.dets = dets
        self.tol = tol
        n = len(dets)
        self.C = np.array([b["counts"] for b in blocks], dtype=np.int32).reshape(n, -1)
        self.g = np.array([b["g"] for b in blocks], dtype=np.int64)
        self.n_struct = np.array([len(b["s"]) for b in blocks], dtype=np.int64)
        self.n_assoc = np.array([len(b["a"]) for b in blocks], dtype=np.int64)
        offs = np.concatenate([[0], np.cumsum(self.n_struct)])
        S = np.concatenate([b["s"] for b in blocks]) if n else np.zeros((0, 8), dtype=np.int64)
        self.s_det = np.repeat(np.arange(n), self.n_struct)
        self.s_addr = S[:, 0]
        self.s_free = S[:, 1] == 0
        self.s_n = S[:, 2]
        self.s_pts = S[:, 3:7]
        self.s_win = S[:, 7]
        nc = [len(b["c"]) for b in blocks]
        na = [len(b["a"]) for b in blocks]
        self.c_det = np.repeat(np.arange(n), nc)
        self.a_det = np.repeat(np.arange(n), na)
        if sum(nc):
            Cr = np.concatenate([b["c"] for b in blocks])
            self.c_row = Cr[:, 0] + np.repeat(offs[:-1], nc)
            self.c_col = Cr[:, 1]
        else:
            self.c_row = self.c_col = np.zeros(0, dtype=np.int64)
        if sum(na):
            self.a_src = np.concatenate([b["a"] for b in blocks]) + np.repeat(offs[:-1], na)[:, None]
        else:
            self.a_src = np.zeros((0, 2), dtype=np.int64)

    def bounds(self, view):
        """Per detector: upper bound on ``b`` and on the number of mappable structural modes."""
        n = len(self.dets)
        x, g_addr, g_n, g_pts, g_win, g_char = view
        cnt_ub = np.minimum(self.C, x).sum(axis=1) + self.n_assoc
        if not len(self.s_det):
            return cnt_ub, np.zeros(n, dtype=np.int64)
        same = self.s_addr[:, None] == g_addr[None, :]
        if self.tol is None:
            placed = self.s_win[:, None] == g_win[None, :]
        else:
            t = self.tol
            P, Q = self.s_pts, g_pts

            def near(a, b):
                return (np.abs(P[:, None, a] - Q[None, :, b]) <= t) & (np.abs(P[:, None, a + 1] - Q[None, :, b + 1]) <= t)

            placed = (self.s_n[:, None] == g_n[None, :]) & (
                (near(0, 0) & near(2, 2)) | (near(0, 2) & near(2, 0))
            )
        ok = same & (placed | self.s_free[:, None])
        s_ok = ok.any(axis=1)
        ub = np.bincount(self.s_det, weights=s_ok, minlength=n)
        if len(self.c_det):
            c_ok = (ok[self.c_row] & g_char[:, self.c_col].T).any(axis=1)
            ub += np.bincount(self.c_det, weights=c_ok, minlength=n)
        if len(self.a_det):
            a_ok = s_ok[self.a_src[:, 0]] & s_ok[self.a_src[:, 1]]
            ub += np.bincount(self.a_det, weights=a_ok, minlength=n)
        sub = np.bincount(self.s_det, weights=s_ok, minlength=n).astype(np.int64)
        return np.minimum(ub.astype(np.int64), cnt_ub), sub


def percept_view(percept: ModeGraph, cols: _Columns, h: WindowHierarchy):
    view = percept.cache.get("view")
    if view is None:
        groups = percept.groups
        g_char = np.zeros((len(groups), cols.n), dtype=bool)
        for j, gr in enumerate(groups):
            for m in gr.characteristics:
                g_char[j, cols.of[m.address]] = True
        view = (
            cols.percept_vector(percept),
            np.array([gr.structural.address for gr in groups], dtype=np.int64),
            np.array([len(gr.structural.sindex.points) for gr in groups], dtype=np.int64),
            np.array([_padded_points(gr.structural.sindex.points) for gr in groups], dtype=np.int64).reshape(-1, 4),
            np.array([h._pos[gr.structural.window] for gr in groups], dtype=np.int64),
            g_char,
        )
        percept.cache["view"] = view
    return view


def _map_table(m: DetectorMap, cols: _Columns, h: WindowHierarchy, tol) -> _MapTable:
    if m._table is None or m._table.tol != tol:
        dets = m.trained()
        blocks = []
        for d in dets:
            key = d.concept.compiled()[0]
            blk = m._blocks.get(d.a)
            if blk is None or blk["key"] is not key:
                blk = m._blocks[d.a] = _detector_block(d, cols, h)
            blocks.append(blk)
        m._table = _MapTable(dets, blocks, tol)
    return m._table


@dataclass
class Winner:
    reaction: Reaction
    detector: DetectorState
    map_index: int
    result: object
    verdict: int = DIRECT

    def key(self):
        return (self.verdict != DIRECT, -self.reaction.b, self.map_index, self.reaction.a)


def _candidates(m: DetectorMap, percept: ModeGraph, cols: _Columns, ratio):
    """``(upper bound on b, g, detector, structural modes required)`` for detectors that may respond."""
    if not m.detectors:
        return []
    table = _map_table(m, cols, cols.h, cols.tol)
    dets, g, n_struct = table.dets, table.g, table.n_struct
    if not dets:
        return []
    ub, sub = table.bounds(percept_view(percept, cols, cols.h))
    if ratio is None:
        need = np.minimum(n_struct, 1)
    else:
        n_in = len(percept.groups)
        need = np.maximum(np.ceil(ratio * np.maximum(n_struct, n_in) - 1e-9).astype(np.int64), 2)
        need = np.where(need > n_struct, n_struct + 1, need)
    keep = np.nonzero((sub >= need) & (need <= n_struct))[0].tolist()
    return [(int(ub[i]), int(g[i]), dets[i], int(need[i])) for i in keep]


def _respond(d, percept, res, ratio, h, z_present):
    if res is None:
        return None
    if ratio is None:
        return react(d, percept, res, z_present, h)
    return Reaction(d.a, res.b, DIRECT if res.b == d.g and not res.associative_taint else ASSOC, None)


def _direct_winner(m, percept, cands, ratio, h, z_present):
    for ub, g, d, need in sorted((c for c in cands if c[0] >= c[1] > 0), key=lambda c: (-c[1], c[2].a)):
        res = match(percept, d.concept, floor=g - 1, min_structural=need)
        r = _respond(d, percept, res, ratio, h, z_present)
        if r is not None and r.c == DIRECT:
            return Winner(r, d, m.index, res)
    return None


def _associative_best(pool, percept, ratio, h, z_present, floor=-1):
    """Best non-direct response in ``pool`` [(map index, candidate)] with ``b > floor``, by (b, map, address)."""
    best = None
    for mi, (ub, g, d, need) in sorted(pool, key=lambda t: (-t[1][0], t[0], t[1][2].a)):
        lim = floor
        if best is not None:
            if ub < best.reaction.b:
                break
            lim = best.reaction.b - 1 if (mi, d.a) < (best.map_index, best.reaction.a) else best.reaction.b
        res = match(percept, d.concept, floor=lim, min_structural=need if ratio is not None else max(need, 2))
        r = _respond(d, percept, res, ratio, h, z_present)
        if r is None:
            continue
        w = Winner(r, d, mi, res, r.c)
        if best is None or w.key() < best.key():
            best = w
    return best


def map_winner(m: DetectorMap, percept: ModeGraph, cols: _Columns, *, ratio: float | None = None, h=None,
               z_present: bool = False) -> Winner | None:
    """Alpha-competition winner of one map.

    Direct reactions outrank associative ones, then the level, then the
    lower address.  With ``ratio`` set (a training presentation) a detector
    responds when its match maps at least that share of its own structural
    modes and of the input's, and at least two.
    """
    cands = _candidates(m, percept, cols, ratio)
    w = _direct_winner(m, percept, cands, ratio, h, z_present)
    if w is not None:
        return w
    return _associative_best([(m.index, c) for c in cands], percept, ratio, h, z_present)


def verdict(size: int, b: int) -> int:
    """Comparison of the input size with the winner's level: equal is direct recognition."""
    return DIRECT if size == b else ASSOC


def parallel_winner(maps, percept: ModeGraph, cols: _Columns, h=None) -> Winner | None:
    """Best map winner across ``maps``: direct verdicts first, then level, map, address."""
    size = percept.size
    winners, pool, rest = [], [], []
    for m in maps:
        cands = _candidates(m, percept, cols, None)
        w = _direct_winner(m, percept, cands, None, h, False)
        if w is not None:
            w.verdict = verdict(size, w.reaction.b)
            winners.append(w)
        elif cands:
            pool.extend((m.index, c) for c in cands)
            rest.append(m.index)
    floor = max((w.reaction.b for w in winners), default=0) - 1
    best = _associative_best(pool, percept, None, h, False, floor)
    if best is not None:
        best.verdict = verdict(size, best.reaction.b)
        winners.append(best)
    # a map whose own winner's level equals the input size is recognized directly even with a lower level
    if not any(w.verdict == DIRECT for w in winners):
        for mi in rest:
            if best is not None and mi == best.map_index:
                continue
            sub = [t for t in pool if t[0] == mi and t[1][0] >= size]
            if not sub:
                continue
            top = _associative_best([t for t in pool if t[0] == mi], percept, None, h, False, size - 1)
            if top is not None and top.reaction.b == size:
                top.verdict = DIRECT
                winners.append(top)
    return min(winners, key=Winner.key) if winners else None


# ---------------------------------------------------------------------------
# the network


@dataclass
class Presentation:
    percept: ModeGraph | None
    graph: StrokeGraph | None
    size: int


class Network:
    def __init__(self, config: dict | None = None, labels=range(10)):
        self.config = make_config(config) if config is None or "hierarchy" not in config else config
        cfg = self.config
        self.h = WindowHierarchy(cfg["hierarchy"]["l"], cfg["hierarchy"]["n"])
        self.tables = tables_of(cfg)
        self.cols = _Columns(self.tables, self.h, cfg["spatial"]["point_tolerance"])
        self.rep = RepSystemStub(labels)
        side = cfg["maps"]["grid"]
        self.maps = {z: DetectorMap(i, z, side, cfg["maps"]["seed"]) for i, z in enumerate(sorted(self.rep.z_of.values()))}
        self.presentations = 0
        self.actions = Counter()
        self._bind_h = self.h

    @property
    def fingerprint(self) -> str:
        return frontend_hash(self.config)

    # -- front end ---------------------------------------------------------

    def perceive(self, img, *, attention: bool, exposure: int = 0) -> Presentation:
        """Input modes of an image; ``percept`` is ``None`` for a blank image."""
        fe = self.config["frontend"]
        arr = np.asarray(img)
        if arr.shape != (self.h.l, self.h.l):
            raise DataError(f"image shape {arr.shape} does not match the {self.h.l}x{self.h.l} receptor matrix")
        if arr.dtype == bool or np.isin(arr, (0, 1)).all():
            raster = as_raster(arr)
        else:
            raster = binarize(arr, fe["threshold"])
        try:
            g = ingest(raster, spur_length=fe["spur_length"], tol=fe["tolerance"], corner_deg=fe["corner_deg"])
        except EmptyImage:
            return Presentation(None, None, 0)
        groups = emit_modal_groups(g, self.h, self.tables)
        derived = []
        if attention:
            att = self.config["attention"]
            try:
                marks = attend(g, att["seed"] + exposure, att["t_ex_budget"], exposure)
                derived = form_derived_modes(g, groups, marks)
            except TooFewPoints:
                derived = []
        percept = ModeGraph.build(groups, self.h, derived)
        return Presentation(percept, g, percept.size)

    # -- learning ----------------------------------------------------------

    def _concept_kw(self):
        lc = self.config["learning"]
        return {"sigma": lc["sigma"], "c": lc["exponent_c"], "tol": self.config["spatial"]["point_tolerance"]}

    def _capture(self, m: DetectorMap, kind: str, p: Presentation, z, ref=None, sub=None) -> DetectorState:
        a = m.place(kind, ref)
        con = capture(p.percept, z=None if kind == EXAMPLE else z, **self._concept_kw())
        d = DetectorState(a, CAPTURED, con, kind, sub, hits=1, last_hit=m.t)
        m.add(d)
        return d

    def counter_train(self, p: Presentation, label, exposure: int = 0) -> tuple:
        """One presentation with the training signal of ``label``; returns the actions taken."""
        z = self.rep.signal(label)
        m = self.maps[z]
        m.t += 1
        self.presentations += 1
        actions = self.novelty_step(m, p, z, exposure=exposure, learning=True)
        self.forget(m)
        return actions

    def novelty_step(self, m: DetectorMap, p: Presentation, z=None, *, exposure: int = 0, learning: bool = True):
        has_input = p.percept is not None and bool(p.percept.groups)
        sub = style_signal(p.graph) if p.graph is not None else None
        trained = len(m) > 0
        win = None
        if has_input and trained:
            if z is not None:
                win = map_winner(m, p.percept, self.cols, ratio=self.config["train"]["response_ratio"], h=self.h)
            else:
                win = map_winner(m, p.percept, self.cols, h=self.h)
        excess = 0
        if win is not None:
            excess = (p.size > win.reaction.b) - (p.size < win.reaction.b)
        acts = decide(trained, has_input, z is not None, z is not None and sub in m.novelty.Z, win is not None, excess)
        if learning:
            self._apply(m, acts, p, z, sub, win)
        self.actions.update(acts)
        return acts

    def _apply(self, m, acts, p, z, sub, win):
        for act in acts:
            if act == CAPTURE_CLUSTER or act == CAPTURE_SUBCLUSTER or act == CAPTURE_ALTERNATIVE:
                d = self._capture(m, CAPTURES[act], p, z, sub=sub if act != CAPTURE_ALTERNATIVE else None)
                if act != CAPTURE_ALTERNATIVE:
                    m.novelty.Z[sub] = d.a
                self.rep.bind(z, d.a)
            elif act == TRAIN_EXISTING:
                d = win.detector
                update_membership(d.concept, p.percept, win.result.mapping,
                                  self.config["learning"]["max_dormant_ratio"], self._bind_h)
                d.state = TRAINED
                d.hits += 1
                d.last_hit = m.t
                m.touch()
                self.rep.bind(z, d.a)
            elif act == CAPTURE_EXAMPLE:
                self._capture(m, EXAMPLE, p, z, ref=win.detector.a)
            elif act in (RECOGNIZE_DIRECT, RECOGNIZE_ASSOCIATIVE) and win is not None:
                win.detector.hits += 1
                win.detector.last_hit = m.t

    def forget(self, m: DetectorMap, min_hits: int | None = None, max_age: int | None = None) -> list:
        """Drop example detectors that were not re-excited in time."""
        fc = self.config["forgetting"]
        min_hits = fc["min_hits"] if min_hits is None else min_hits
        max_age = fc["max_age"] if max_age is None else max_age
        gone = [a for a, d in m.detectors.items()
                if d.kind == EXAMPLE and d.hits < min_hits and m.t - d.last_hit > max_age]
        for a in gone:
            m.remove(a)
            self.rep.unbind(a)
        return gone

    def train_image(self, img, label, exposure: int = 0) -> tuple:
        return self.counter_train(self.perceive(img, attention=True, exposure=exposure), label, exposure)

    # -- recognition -------------------------------------------------------

    def recognize_image(self, img):
        """``(label, excitation type, winner address)``; all ``None`` when no map responds."""
        p = self.perceive(img, attention=False)
        return self.recognize(p)

    def recognize(self, p: Presentation):
        if p.percept is None or not p.percept.groups:
            return None, None, None
        maps = [self.maps[z] for z in sorted(self.maps)]
        win = parallel_winner(maps, p.percept, self.cols, self.h)
        if win is None:
            return None, None, None
        return maps[win.map_index].z1, win.verdict, win.reaction.a

    def map_reactions(self, p: Presentation, z):
        """All reactions of one map to an input (slow path, for inspection)."""
        m = self.maps[z]
        out = []
        for d in m.trained():
            res = match(p.percept, d.concept, use_index=True)
            r = react(d, p.percept, res, False, self.h)
            if r is not None:
                out.append(r)
        return out

    # -- summaries ---------------------------------------------------------

    def detector_counts(self) -> dict:
        return {z: len(m) for z, m in sorted(self.maps.items())}

    def kind_counts(self) -> dict:
        out = Counter()
        for m in self.maps.values():
            for d in m.detectors.values():
                out[d.kind] += 1
        return dict(out)

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        maps = []
        for z, m in sorted(self.maps.items()):
            maps.append({
                "index": m.index, "z1": m.z1, "side": m.side, "seed": m.seed, "t": m.t, "n_random": m.n_random,
                "novelty": [[list(k), a] for k, a in sorted(m.novelty.Z.items())],
                "detectors": [
                    {"a": d.a, "state": d.state, "kind": d.kind, "sub": list(d.sub) if d.sub is not None else None,
                     "hits": d.hits, "last_hit": d.last_hit, "concept": concept_to_dict(d.concept)}
                    for d in m.trained()
                ],
            })
        return {
            "config": self.config,
            "fingerprint": self.fingerprint,
            "labels": sorted(self.rep.z_of),
            "bindings": [[z, list(v)] for z, v in sorted(self.rep.bindings.items())],
            "presentations": self.presentations,
            "actions": dict(sorted(self.actions.items())),
            "maps": maps,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        net = cls(d["config"], d["labels"])
        net.rep.bindings = {z: list(v) for z, v in d["bindings"]}
        net.presentations = d["presentations"]
        net.actions = Counter(d["actions"])
        for md in d["maps"]:
            m = net.maps[md["z1"]]
            m.t, m.n_random = md["t"], md["n_random"]
            m.novelty.Z = {tuple(k): a for k, a in md["novelty"]}
            for dd in md["detectors"]:
                con = concept_from_dict(dd["concept"])
                sub = tuple(dd["sub"]) if dd["sub"] is not None else None
                m.detectors[dd["a"]] = DetectorState(dd["a"], dd["state"], con, dd["kind"], sub,
                                                     dd["hits"], dd["last_hit"])
        return net
