"""Synthetic Contour World glyphs: straight unit-width strokes on a square matrix."""

import random

from conftest import draw

SHAPES = {
    "ell": [((0, 0), (7, 0)), ((7, 0), (7, 5))],
    "tee": [((0, 0), (0, 6)), ((0, 3), (7, 3))],
    "tri": [((0, 0), (0, 7)), ((0, 7), (7, 0)), ((7, 0), (0, 0))],
}


def extent(strokes):
    rows = [p[0] for s in strokes for p in s]
    cols = [p[1] for s in strokes for p in s]
    return max(rows) + 1, max(cols) + 1


def render(strokes, dr=0, dc=0, side=28):
    return draw((side, side), *[((a + dr, b + dc), (c + dr, d + dc)) for (a, b), (c, d) in strokes])


def translations(strokes, side):
    h, w = extent(strokes)
    return [(dr, dc) for dr in range(side - h + 1) for dc in range(side - w + 1)]


def jittered(strokes, rng, amount=1):
    """Stroke end points moved by up to ``amount`` pixels (shared points move together)."""
    pts = sorted({p for s in strokes for p in s})
    move = {p: (p[0] + rng.randint(0, amount), p[1] + rng.randint(0, amount)) for p in pts}
    return [(move[a], move[b]) for a, b in strokes]


def toy_stream(n, seed=0, classes=3):
    rng = random.Random(seed)
    names = list(SHAPES)[:classes]
    for i in range(n):
        z = i % classes
        yield render(jittered(SHAPES[names[z]], rng, 2), rng.randint(2, 16), rng.randint(2, 16)), z
