"""Training and evaluation runs over IDX datasets."""

from __future__ import annotations

import logging
import os
import time

from .errors import DinsError
from .idx import Dataset, load_idx, seeded_subset
from .network import Network
from .report import MetricsReport

log = logging.getLogger("dins")


def _tagged(exc: DinsError, i: int) -> DinsError:
    out = type(exc)(f"image {i}: {exc}")
    out.image_index = i
    return out


def dataset_paths(cfg: dict, split: str, data_dir=None):
    ds = cfg["dataset"]
    paths = ds[f"{split}_images"], ds[f"{split}_labels"]
    if data_dir is not None:
        paths = tuple(os.path.join(data_dir, os.path.basename(p)) for p in paths)
    return paths


def load_split(cfg: dict, split: str, data_dir=None, size=None) -> Dataset:
    """Seeded subset of the train or test split named in the config."""
    data = load_idx(*dataset_paths(cfg, split, data_dir))
    size = cfg["subset"][split] if size is None else size
    return data.subset(seeded_subset(len(data), size, cfg["subset"]["seed"]))


def train_network(cfg: dict, data: Dataset, net: Network | None = None, progress=None) -> Network:
    """One pass over ``data`` in order; pass ``net`` to continue training an existing model."""
    net = Network(cfg) if net is None else net
    if len(data) == 0:
        log.warning("empty training set, writing an empty model")
    start = time.perf_counter()
    for i in range(len(data)):
        try:
            net.train_image(data.images[i], int(data.labels[i]), exposure=net.presentations)
        except DinsError as exc:
            raise _tagged(exc, i) from exc
        if progress and (i + 1) % progress == 0:
            log.info("trained %d/%d, %d detectors", i + 1, len(data), sum(net.detector_counts().values()))
    net.train_seconds = getattr(net, "train_seconds", 0.0) + time.perf_counter() - start
    return net


def predict(net: Network, data: Dataset) -> list:
    preds = []
    for i in range(len(data)):
        try:
            preds.append(net.recognize_image(data.images[i])[0])
        except DinsError as exc:
            raise _tagged(exc, i) from exc
    return preds


def evaluate(net: Network, data: Dataset) -> MetricsReport:
    start = time.perf_counter()
    preds = predict(net, data)
    seconds = {"eval": time.perf_counter() - start}
    if hasattr(net, "train_seconds"):
        seconds["train"] = net.train_seconds
    return MetricsReport.from_predictions(
        sorted(net.rep.z_of), data.labels, preds,
        detectors=net.detector_counts(), kinds=net.kind_counts(), actions=dict(net.actions), seconds=seconds,
    )
