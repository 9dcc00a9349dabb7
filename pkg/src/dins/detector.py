"""Detector neurons: reactions, the capture/correct state machine and alpha-competition."""

from __future__ import annotations

from dataclasses import dataclass

from .concept import Concept, MatchResult, capture, match, update_membership
from .errors import CaptureWithoutSignal, EmptyField, NoWindow
from .features import ASSOC, DIRECT, ModeGraph

FREE, CAPTURED, TRAINED = "free", "captured", "trained"
CLUSTER, SUBCLUSTER, EXAMPLE, ALTERNATIVE = "cluster", "subcluster", "example", "alternative"
KINDS = (CLUSTER, SUBCLUSTER, EXAMPLE, ALTERNATIVE)
TYPE_NAMES = {DIRECT: "direct", ASSOC: "associative"}


@dataclass(frozen=True)
class Reaction:
    a: int
    b: int
    c: int
    I: object = None

    def rank(self):
        """Sort key: direct first, then larger level, then lower address."""
        return (self.c != DIRECT, -self.b, self.a)


@dataclass
class DetectorState:
    a: int
    state: str = FREE
    concept: Concept | None = None
    kind: str | None = None
    sub: object = None  # style signal of a subcluster
    hits: int = 0
    last_hit: int = 0

    def __post_init__(self):
        if (self.state == FREE) != (self.concept is None):
            raise ValueError("a detector is free exactly when it holds no concept")

    @property
    def g(self) -> int:
        return 0 if self.concept is None else self.concept.g


def reaction_window(percept: ModeGraph, mapping: dict, h):
    """Lowest window covering the points of the matched structural modes."""
    pts = [p for gi in sorted(set(mapping.values())) for p in percept.groups[gi].structural.sindex.points]
    if not pts:
        return None
    if h is None:
        return percept.groups[min(mapping.values())].structural.window
    try:
        return h.lowest_window(pts)
    except NoWindow:
        return None


def react(d: DetectorState, percept: ModeGraph, res: MatchResult | None, z_present: bool = False, h=None):
    """Reaction of a detector given its match against the input, or ``None``."""
    g = d.g
    if res is None or res.b == 0:
        if z_present:
            return Reaction(d.a, g, ASSOC, None)
        return None
    where = reaction_window(percept, res.mapping, h)
    if res.b == g:
        return Reaction(d.a, g, ASSOC if res.associative_taint else DIRECT, where)
    if res.structural >= 2 and res.bound_pair:
        return Reaction(d.a, res.b, ASSOC, where)
    if z_present:
        return Reaction(d.a, g, ASSOC, where)
    return None


def recognize(d: DetectorState, percept: ModeGraph | None, z_present: bool = False, h=None, use_index: bool = True):
    """Reaction of ``d`` to an input; free detectors never react."""
    if d.state == FREE:
        return None
    res = None
    if percept is not None and percept.groups:
        res = match(percept, d.concept, use_index=use_index)
    return react(d, percept, res, z_present, h)


def learn(d: DetectorState, percept: ModeGraph | None, z=None, v=None, *, mapping: dict | None = None,
          sigma: float = 0.8, c: float = 0.5, tol=None) -> DetectorState:
    """Capture a free detector, or correct a trained one under its own training signal.

    A trained detector bound to a different signal is inhibited and left
    unchanged, as is one whose concept shares no structure with the input.
    """
    has_input = percept is not None and bool(percept.groups)
    if v is not None and z is None and not has_input:
        raise CaptureWithoutSignal("capture signal without a training signal or an input")
    if d.state == FREE:
        if v is not None and z is not None and has_input:
            d.concept = capture(percept, sigma, c, z, tol)
            d.state = CAPTURED
        return d
    if z is None or not has_input:
        return d
    if d.concept.z is not None and d.concept.z != z:
        return d
    if mapping is None:
        res = match(percept, d.concept, use_index=False)
        if res is None or res.structural == 0:
            return d
        mapping = res.mapping
    update_membership(d.concept, percept, mapping)
    d.state = TRAINED
    return d


def alpha_compete(reactions):
    """Winner-take-all within one map: ``(winner, inhibited)``."""
    reactions = [r for r in reactions if r is not None]
    if not reactions:
        raise EmptyField("no reactions to compete")
    ordered = sorted(reactions, key=Reaction.rank)
    return ordered[0], ordered[1:]
