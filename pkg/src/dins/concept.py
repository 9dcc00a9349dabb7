"""Concept graphs with statistical membership.

A concept stores modes in three layers: structural modes (graph vertices,
bound by edges), characteristic modes hanging off one structural mode, and
associative modes defined on an ordered pair of structural modes.  Each
mode keeps two hit counters, one for its address and one for its spatial
index, against the shared cycle count ``k``.  A component belongs to the
concept while ``(hits / k) ** c >= sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .attention import aw_key
from .errors import ConfigError
from .features import ASSOC, ASSOCIATIVE, CHARACTERISTIC, DERIVED, DIRECT, STRUCTURAL, ModeGraph, decode_address
from .spatial import WindowId, points_agree


def membership(hits: int, k: int, c: float) -> float:
    """Nonlinear membership statistic ``q = (I / k) ** c``."""
    if k <= 0:
        raise ValueError("cycle count must be positive")
    return (hits / k) ** c


@dataclass(slots=True)
class CMode:
    kind: int
    address: int
    window: WindowId
    points: tuple = ()
    parent: int = -1
    sources: tuple = ()
    hits_a: int = 1
    hits_i: int = 1
    wa: int = 1
    wi: int = 1
    aw: set = field(default_factory=set)
    last: int = 0

    @property
    def scale(self) -> int:
        return decode_address(self.address)[1] // 2 if self.kind == ASSOCIATIVE else decode_address(self.address)[1]


@dataclass
class MatchResult:
    mapping: dict
    b: int
    contributions: list
    structural: int = 0
    bound_pair: bool = False

    @property
    def associative_taint(self) -> bool:
        return any(ct == ASSOC for _, ct in self.contributions)


class Concept:
    ASSOC_KIND = ASSOCIATIVE

    def __init__(self, sigma: float = 0.8, c: float = 0.5, z=None, tol: float | None = None):
        if not 0.6 <= sigma < 1:
            raise ConfigError(f"sigma must lie in [0.6, 1), got {sigma}")
        if not 0 < c < 1:
            raise ConfigError(f"exponent c must lie in (0, 1), got {c}")
        self.sigma = sigma
        self.c = c
        self.z = z
        self.tol = tol
        self.k = 0
        self.modes: dict[int, CMode] = {}
        self.edges: dict[tuple[int, int], list] = {}  # (s, t) -> [hits, w]
        self.next_id = 0
        self._cache = None

    # -- views -------------------------------------------------------------

    @property
    def g(self) -> int:
        """Excitation threshold: number of modes whose address weight is 1."""
        return sum(m.wa for m in self.modes.values())

    def active(self, kind=None):
        return [i for i, m in self.modes.items() if m.wa and (kind is None or m.kind == kind)]

    def children(self, sid: int):
        return [i for i, m in self.modes.items() if m.parent == sid]

    def _add(self, mode: CMode) -> int:
        mid = self.next_id
        self.next_id += 1
        self.modes[mid] = mode
        self._cache = None
        return mid

    def snapshot(self):
        w = tuple(sorted((i, m.wa, m.wi) for i, m in self.modes.items()))
        e = tuple(sorted(key for key, (_, ew) in self.edges.items() if ew))
        return w, e

    # -- compiled form used by the matcher ---------------------------------

    def compiled(self):
        if self._cache is not None:
            return self._cache
        structs = [i for i, m in self.modes.items() if m.kind == STRUCTURAL and m.wa]
        sset = set(structs)
        chars = {s: [] for s in structs}
        assoc = []
        for i, m in self.modes.items():
            if not m.wa:
                continue
            if m.kind == CHARACTERISTIC and m.parent in sset:
                chars[m.parent].append(i)
            elif m.kind == ASSOCIATIVE and m.sources[0] in sset and m.sources[1] in sset:
                assoc.append(i)
        constraints = [key for key, (_, w) in self.edges.items() if w and key[0] in sset and key[1] in sset]
        self._cache = (structs, chars, assoc, constraints)
        return self._cache

    def _invalidate(self):
        self._cache = None

    def agrees(self, m: CMode, six) -> bool:
        """Index test of a concept mode against an input spatial index."""
        if self.tol is None:
            return m.window == six.window
        return points_agree(m.points, six.points, self.tol)


# ---------------------------------------------------------------------------
# matching


def _percept_tables(percept: ModeGraph):
    t = percept.cache.get("match")
    if t is None:
        gchars = []
        for gr in percept.groups:
            d = {}
            for m in gr.characteristics:
                d.setdefault(m.address, m.sindex)
            gchars.append(d)
        dindex = {}
        for m in percept.derived:
            dindex.setdefault(tuple(m.sources), set()).add(m.address)
        t = percept.cache["match"] = (gchars, dindex)
    return t


def match(percept: ModeGraph, con: Concept, *, use_index: bool = True, full_structure: bool = False,
          floor: int = -1, min_structural: int = 0) -> MatchResult | None:
    """Best consistent embedding of the concept's active modes into the input.

    Structural modes map injectively onto input structural modes with the
    same address (and, while ``wi`` is set and ``use_index`` holds, the same
    window).  Active edges between mapped modes must be spatially bound in
    the input.  A characteristic mode counts when its structural mode is
    mapped and the input group holds the same address; an associative mode
    counts when both its sources are mapped and either the explicit derived
    input or a remembered source pair is present.

    ``b`` is maximised by branch and bound.  Only embeddings mapping at
    least ``min_structural`` structural modes (all of them with
    ``full_structure``) and reaching ``b > floor`` are sought; ``None`` is
    returned when there is none.
    """
    structs, chars, assoc, constraints = con.compiled()
    modes = con.modes
    groups = percept.groups
    gchars, dindex = _percept_tables(percept)
    bound = percept.bound

    cand: dict[int, list] = {}
    for s in structs:
        m = modes[s]
        lst = []
        for gi, gr in enumerate(groups):
            sm = gr.structural
            if sm.address != m.address:
                continue
            if use_index and m.wi and not con.agrees(m, sm.sindex):
                continue
            hit_chars = []
            for ci in chars[s]:
                cm = modes[ci]
                six = gchars[gi].get(cm.address)
                if six is not None and not (use_index and cm.wi and not con.agrees(cm, six)):
                    hit_chars.append(ci)
            lst.append((1 + len(hit_chars), gi, hit_chars))
        lst.sort(key=lambda t: (-t[0], t[1]))
        cand[s] = lst

    total = len(structs)
    need = total if full_structure else min_structural
    if need > total or sum(1 for s in structs if cand[s]) < need:
        return None

    order = sorted(structs, key=lambda s: (len(cand[s]), s))
    pos = {s: i for i, s in enumerate(order)}
    klass = [modes[s].address for s in order]
    cand_o = [cand[s] for s in order]
    cmask = [sum(1 << gi for _, gi, _ in c) for c in cand_o]
    later_nb = [[] for _ in order]
    for x, y in constraints:
        px, py = pos[x], pos[y]
        if px < py:
            later_nb[px].append(py)
        else:
            later_nb[py].append(px)
    # associative modes are scored when their later source is placed
    assoc_o = [[] for _ in order]
    for ai in assoc:
        sj, sl = modes[ai].sources
        assoc_o[max(pos[sj], pos[sl])].append(ai)
    assoc_suffix = [0] * (total + 1)
    for i in range(total - 1, -1, -1):
        assoc_suffix[i] = assoc_suffix[i + 1] + len(assoc_o[i])

    def assoc_ok(ai, mp):
        m = modes[ai]
        sj, sl = m.sources
        if sj not in mp or sl not in mp:
            return False
        gj, gl = mp[sj], mp[sl]
        if _derived_of(m.address) in dindex.get((gj, gl), ()):
            return True
        if not bound[gj, gl]:
            return False
        key = aw_key(m.scale, groups[gj], groups[gl])
        return key is not None and key in m.aw

    def upper(i, used, allowed, placed):
        # optimistic gain of positions >= i; -1 when too few structural modes can still be placed
        ub = assoc_suffix[i]
        per_class: dict = {}
        for p in range(i, total):
            free = allowed[p] & ~used & cmask[p]
            if not free:
                continue
            for gain, gi, _ in cand_o[p]:
                if (free >> gi) & 1:
                    break
            entry = per_class.get(klass[p])
            if entry is None:
                per_class[klass[p]] = [free, [gain]]
            else:
                entry[0] |= free
                entry[1].append(gain)
        possible = 0
        for union, gains in per_class.values():
            n = bin(union).count("1")
            if n >= len(gains):
                ub += sum(gains)
                possible += len(gains)
            else:
                ub += sum(sorted(gains, reverse=True)[:n])
                possible += n
        if placed + possible < need:
            return -1
        return ub

    ceiling = sum(c[0][0] for c in cand_o if c) + len(assoc)
    bmask = percept.bound_masks()
    best = {"b": floor, "map": None}
    mp: dict[int, int] = {}
    memo: dict = {}

    def rec(i, cur, used, allowed, placed):
        if best["b"] >= ceiling:
            return
        if i == total:
            if cur > best["b"] and placed >= need:
                best["b"], best["map"] = cur, dict(mp)
            return
        ub = upper(i, used, allowed, placed)
        if ub < 0 or cur + ub <= best["b"]:
            return
        s = order[i]
        free = allowed[i] & ~used
        for gain, gi, _ in cand_o[i]:
            if not (free >> gi) & 1:
                continue
            mp[s] = gi
            extra = 0
            for ai in assoc_o[i]:
                src = modes[ai].sources
                key = (ai, mp.get(src[0]), mp.get(src[1]))
                ok = memo.get(key)
                if ok is None:
                    ok = memo[key] = assoc_ok(ai, mp)
                extra += ok
            nxt = allowed
            if later_nb[i]:
                nxt = list(allowed)
                m = bmask[gi]
                for p in later_nb[i]:
                    nxt[p] &= m
            rec(i + 1, cur + gain + extra, used | (1 << gi), nxt, placed + 1)
            del mp[s]
        rec(i + 1, cur, used, allowed, placed)

    rec(0, 0, 0, [(1 << len(groups)) - 1] * total, 0)
    if best["map"] is None:
        return None
    return _result(percept, con, best["map"], use_index, cand, assoc, assoc_ok)


def _result(percept, con, mapping, use_index, cand, assoc, assoc_ok):
    contributions = []
    for s, gi in mapping.items():
        ct = percept.contributor_type(gi)
        contributions.append((s, ct))
        hit = next(h for _, g2, h in cand[s] if g2 == gi)
        contributions.extend((ci, ct) for ci in hit)
    for ai in assoc:
        sj, sl = con.modes[ai].sources
        if sj in mapping and sl in mapping and assoc_ok(ai, mapping):
            contributions.append((ai, DIRECT))
    gis = sorted(mapping.values())
    bound_pair = any(percept.bound[a, b] for i, a in enumerate(gis) for b in gis[i + 1:])
    return MatchResult(dict(mapping), len(contributions), contributions, len(mapping), bound_pair)


# ---------------------------------------------------------------------------
# learning


def capture(percept: ModeGraph, sigma: float = 0.8, c: float = 0.5, z=None, tol: float | None = None) -> Concept:
    """New concept equal to the input: every component with ``Q = (1, 1)`` and ``w = 1``."""
    con = Concept(sigma, c, z, tol)
    con.k = 1
    sid = {}
    for gi, gr in enumerate(percept.groups):
        sm = gr.structural
        sid[gi] = con._add(CMode(STRUCTURAL, sm.address, sm.window, sm.sindex.points, last=1))
        seen = set()
        for m in gr.characteristics:
            if m.address in seen:
                continue
            seen.add(m.address)
            con._add(CMode(CHARACTERISTIC, m.address, m.window, m.sindex.points, parent=sid[gi], last=1))
    n = len(percept.groups)
    for i in range(n):
        for j in range(i + 1, n):
            if percept.bound[i, j]:
                con.edges[(sid[i], sid[j])] = [1, 1]
    _add_derived(con, percept, sid, new_hits=1, start=True)
    return con


_ASSOC_OFFSET = (ASSOCIATIVE - DERIVED) * 16 * 1024


def _assoc_address(derived_address: int) -> int:
    return derived_address + _ASSOC_OFFSET


def _derived_of(assoc_address: int) -> int:
    return assoc_address - _ASSOC_OFFSET


def _add_derived(con, percept, sid, new_hits, start=False, present=None):
    existing = {}
    for i, m in con.modes.items():
        if m.kind == ASSOCIATIVE:
            existing[(m.sources, m.address)] = i
    for dm in percept.derived:
        gj, gl = dm.sources
        if gj not in sid or gl not in sid:
            continue
        key = ((sid[gj], sid[gl]), _assoc_address(dm.address))
        if key in existing:
            continue
        m = CMode(ASSOCIATIVE, key[1], dm.window, sources=key[0], hits_a=new_hits, hits_i=new_hits, last=con.k)
        pair = aw_key(m.scale, percept.groups[gj], percept.groups[gl])
        if pair is not None:
            m.aw.add(pair)
        if not start:
            q = membership(new_hits, con.k, con.c)
            m.wa = m.wi = int(q >= con.sigma)
        existing[key] = con._add(m)
        if present is not None:
            present.add(existing[key])


def _edge_key(a, b):
    return (a, b) if a < b else (b, a)


def _centre(points):
    if not points:
        return (0.0, 0.0)
    return (sum(p[0] for p in points) / len(points), sum(p[1] for p in points) / len(points))


def extend_mapping(percept: ModeGraph, con: Concept, mapping: dict, h=None) -> dict:
    """Pair the unmapped structural modes with free input elements of the same type, nearest first.

    Used when counting hits: a mode found elsewhere in the input scores an
    address hit without an index hit.  With a hierarchy ``h`` the element
    must lie in a window bound to the mode's own window.
    """
    mp = dict(mapping)
    used = set(mp.values())
    pairs = []
    for s, m in con.modes.items():
        if m.kind != STRUCTURAL or s in mp:
            continue
        cr, cc = _centre(m.points)
        for gi, gr in enumerate(percept.groups):
            if gi in used or gr.structural.address != m.address:
                continue
            if h is not None and not h.overlaps(m.window, gr.structural.window):
                continue
            gr_r, gr_c = _centre(gr.structural.sindex.points)
            pairs.append((max(abs(cr - gr_r), abs(cc - gr_c)), s, gi))
    for _, s, gi in sorted(pairs):
        if s in mp or gi in used:
            continue
        mp[s] = gi
        used.add(gi)
    return mp


def update_membership(con: Concept, percept: ModeGraph, mapping: dict, max_dormant_ratio: int = 4, h=None) -> Concept:
    """One training cycle: advance counters, recompute weights, absorb new modes."""
    con.k += 1
    k = con.k
    mp = extend_mapping(percept, con, mapping, h)
    gchars, dindex = _percept_tables(percept)
    for i, m in con.modes.items():
        pa = pi = False
        if m.kind == STRUCTURAL:
            if i in mp:
                pa = True
                pi = con.agrees(m, percept.groups[mp[i]].structural.sindex)
        elif m.kind == CHARACTERISTIC:
            if m.parent in mp:
                six = gchars[mp[m.parent]].get(m.address)
                if six is not None:
                    pa, pi = True, con.agrees(m, six)
        else:
            sj, sl = m.sources
            if sj in mp and sl in mp:
                gj, gl = mp[sj], mp[sl]
                if _derived_of(m.address) in dindex.get((gj, gl), ()):
                    pa = True
                    pair = aw_key(m.scale, percept.groups[gj], percept.groups[gl])
                    if pair is not None:
                        m.aw.add(pair)
                    pi = any(
                        con.agrees(m, d.sindex) for d in percept.derived
                        if tuple(d.sources) == (gj, gl) and _assoc_address(d.address) == m.address
                    )
        if pa:
            m.hits_a += 1
            m.last = k
        if pi:
            m.hits_i += 1
        m.wa = int(membership(m.hits_a, k, con.c) >= con.sigma)
        m.wi = int(membership(m.hits_i, k, con.c) >= con.sigma)
    for (a, b), ew in con.edges.items():
        if a in mp and b in mp and percept.bound[mp[a], mp[b]]:
            ew[0] += 1
        ew[1] = int(membership(ew[0], k, con.c) >= con.sigma)

    # absorb components never seen before
    new = set()
    sid = {gi: s for s, gi in mp.items()}
    q1 = int(membership(1, k, con.c) >= con.sigma)
    for gi, gr in enumerate(percept.groups):
        if gi not in sid:
            sm = gr.structural
            sid[gi] = con._add(CMode(STRUCTURAL, sm.address, sm.window, sm.sindex.points, wa=q1, wi=q1, last=k))
            new.add(sid[gi])
        have = {con.modes[c].address for c in con.children(sid[gi])}
        for m in gr.characteristics:
            if m.address not in have:
                have.add(m.address)
                con._add(CMode(CHARACTERISTIC, m.address, m.window, m.sindex.points, parent=sid[gi],
                               wa=q1, wi=q1, last=k))
    n = len(percept.groups)
    for i in range(n):
        for j in range(i + 1, n):
            key = _edge_key(sid[i], sid[j])
            if percept.bound[i, j] and key not in con.edges:
                con.edges[key] = [1, q1]
    _add_derived(con, percept, sid, new_hits=1)
    _evict_dormant(con, max_dormant_ratio)
    con._invalidate()
    return con


def _evict_dormant(con: Concept, ratio: int):
    active = sum(1 for m in con.modes.values() if m.wa)
    dormant = [(m.last, i) for i, m in con.modes.items() if not m.wa]
    excess = len(dormant) - ratio * max(active, 1)
    if excess <= 0:
        return
    for _, i in sorted(dormant)[:excess]:
        if i in con.modes:
            _remove_mode(con, i)


def _remove_mode(con: Concept, i: int):
    m = con.modes.pop(i)
    if m.kind == STRUCTURAL:
        for j in [j for j, x in con.modes.items() if x.parent == i or i in x.sources]:
            con.modes.pop(j, None)
        for key in [key for key in con.edges if i in key]:
            del con.edges[key]


def integrate(con: Concept | None, percept: ModeGraph, mapping: dict | None = None, **kw) -> Concept:
    """Capture on the first call, otherwise one membership update."""
    if con is None:
        return capture(percept, **kw)
    if mapping is None:
        res = match(percept, con, use_index=False)
        mapping = res.mapping if res is not None else {}
    return update_membership(con, percept, mapping)


def is_attractor(history, n_stab: int = 10) -> bool:
    """True when the last ``n_stab`` snapshots agree (all of them if fewer)."""
    if len(history) < 2:
        raise ValueError("need at least two snapshots")
    tail = history[-n_stab:]
    return all(s == tail[0] for s in tail[1:])


# ---------------------------------------------------------------------------
# serialization


def concept_to_dict(con: Concept) -> dict:
    return {
        "sigma": con.sigma,
        "c": con.c,
        "z": con.z,
        "tol": con.tol,
        "k": con.k,
        "next_id": con.next_id,
        "modes": [
            [i, m.kind, m.address, list(m.window), [list(p) for p in m.points], m.parent, list(m.sources), m.hits_a, m.hits_i,
             m.wa, m.wi, sorted(list(p) for p in m.aw), m.last]
            for i, m in sorted(con.modes.items())
        ],
        "edges": [[a, b, h, w] for (a, b), (h, w) in sorted(con.edges.items())],
    }


def _tuplify(x):
    return tuple(_tuplify(v) for v in x) if isinstance(x, list) else x


def concept_from_dict(d: dict) -> Concept:
    con = Concept(d["sigma"], d["c"], _tuplify(d["z"]), d.get("tol"))
    con.k = d["k"]
    con.next_id = d["next_id"]
    for i, kind, addr, win, pts, parent, sources, ha, hi, wa, wi, aw, last in d["modes"]:
        con.modes[i] = CMode(kind, addr, WindowId(*win), tuple(tuple(p) for p in pts), parent, tuple(sources),
                             ha, hi, wa, wi, {tuple(p) for p in aw}, last)
    for a, b, h, w in d["edges"]:
        con.edges[(a, b)] = [h, w]
    return con
