import os
from pathlib import Path

import numpy as np
import pytest

MNIST_DIR = os.environ.get("DINS_MNIST", "/root/data/mnist")


def line_pixels(p, q):
    """Integer points of a straight stroke by Bresenham's rule."""
    (r0, c0), (r1, c1) = p, q
    dr, dc = abs(r1 - r0), abs(c1 - c0)
    sr, sc = (1 if r1 > r0 else -1), (1 if c1 > c0 else -1)
    err = dc - dr
    out = [(r0, c0)]
    while (r0, c0) != (r1, c1):
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c0 += sc
        if e2 < dc:
            err += dc
            r0 += sr
        out.append((r0, c0))
    return out


def draw(shape, *strokes):
    img = np.zeros(shape, dtype=np.uint8)
    for p, q in strokes:
        for r, c in line_pixels(p, q):
            img[r, c] = 1
    return img


def polygon(shape, *vertices):
    return draw(shape, *zip(vertices, vertices[1:] + vertices[:1]))


@pytest.fixture(scope="session")
def mnist_dir():
    if not os.path.exists(os.path.join(MNIST_DIR, "train-images-idx3-ubyte")):
        pytest.skip(f"MNIST IDX files not found in {MNIST_DIR}")
    return Path(MNIST_DIR)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
