"""Reader for big-endian IDX image and label files."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadMagic, DataError, DimensionMismatch, TruncatedFile

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


@dataclass
class Dataset:
    images: np.ndarray  # (n, rows, cols) uint8
    labels: np.ndarray  # (n,) uint8

    def __len__(self):
        return len(self.labels)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.images[idx], self.labels[idx])


def _read(path) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def parse_images(blob: bytes, name: str = "images") -> np.ndarray:
    if len(blob) < 16:
        raise TruncatedFile(f"{name}: header needs 16 bytes, file has {len(blob)}")
    magic, n, rows, cols = struct.unpack(">IIII", blob[:16])
    if magic != IMAGE_MAGIC:
        raise BadMagic(f"{name}: magic 0x{magic:08x}, expected 0x{IMAGE_MAGIC:08x}")
    need = 16 + n * rows * cols
    if len(blob) < need:
        raise TruncatedFile(f"{name}: expected {need} bytes, file has {len(blob)}")
    if len(blob) > need:
        raise DimensionMismatch(f"{name}: {len(blob) - need} bytes beyond the declared {n}x{rows}x{cols}")
    return np.frombuffer(blob, dtype=np.uint8, offset=16).reshape(n, rows, cols).copy()


def parse_labels(blob: bytes, name: str = "labels") -> np.ndarray:
    if len(blob) < 8:
        raise TruncatedFile(f"{name}: header needs 8 bytes, file has {len(blob)}")
    magic, n = struct.unpack(">II", blob[:8])
    if magic != LABEL_MAGIC:
        raise BadMagic(f"{name}: magic 0x{magic:08x}, expected 0x{LABEL_MAGIC:08x}")
    if len(blob) < 8 + n:
        raise TruncatedFile(f"{name}: expected {8 + n} bytes, file has {len(blob)}")
    if len(blob) > 8 + n:
        raise DimensionMismatch(f"{name}: {len(blob) - 8 - n} bytes beyond the declared {n} labels")
    labels = np.frombuffer(blob, dtype=np.uint8, offset=8).copy()
    if labels.size and labels.max() > 9:
        raise DataError(f"{name}: label {int(labels.max())} outside 0..9")
    return labels


def load_idx(images_path, labels_path) -> Dataset:
    images = parse_images(_read(images_path), str(images_path))
    labels = parse_labels(_read(labels_path), str(labels_path))
    if len(images) != len(labels):
        raise DimensionMismatch(f"{len(images)} images but {len(labels)} labels")
    return Dataset(images, labels)


def write_idx(images_path, labels_path, images, labels):
    """Write a dataset in the same format (used for fixtures and subsets)."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        fh.write(images.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", LABEL_MAGIC, len(labels)))
        fh.write(labels.tobytes())


def seeded_subset(n_total: int, size: int, seed: int) -> np.ndarray:
    """Sorted indices of a reproducible random subset."""
    if size >= n_total:
        return np.arange(n_total)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n_total, size=size, replace=False))
