"""scikit-learn style wrapper around :class:`~dins.network.Network`."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .config import make_config
from .errors import DataError
from .network import Network


def check_images(X, side: int = 28) -> np.ndarray:
    """Return ``X`` as an ``(n, side, side)`` uint8 array.

    Accepts flat rows of ``side * side`` pixels or square images; values must
    lie in 0..255.
    """
    X = np.asarray(X)
    if X.ndim == 2 and X.shape[1] == side * side:
        X = X.reshape(len(X), side, side)
    if X.ndim != 3 or X.shape[1:] != (side, side):
        raise DataError(f"expected images of shape (n, {side}, {side}) or (n, {side * side}), got {X.shape}")
    if X.dtype == bool:
        return X.astype(np.uint8)
    if not np.issubdtype(X.dtype, np.number) or not np.isfinite(X).all():
        raise DataError("pixel values must be finite numbers")
    if X.size and (X.min() < 0 or X.max() > 255):
        raise DataError("pixel values must lie in 0..255")
    return X.astype(np.uint8)


def check_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n:
        raise DataError(f"expected {n} labels, got shape {y.shape}")
    return y


class DINSClassifier(ClassifierMixin, BaseEstimator):
    """Detector network classifier trained in a single pass.

    Inputs no map answers are assigned the most frequent training class;
    :meth:`recognize` exposes them as ``None`` together with the excitation type.
    """

    def __init__(self, sigma=0.6, exponent_c=0.3, response_ratio=0.5, point_tolerance=3, t_ex_budget=2,
                 min_hits=2, max_age=30, threshold=128, side=28, seed=0):
        self.sigma = sigma
        self.exponent_c = exponent_c
        self.response_ratio = response_ratio
        self.point_tolerance = point_tolerance
        self.t_ex_budget = t_ex_budget
        self.min_hits = min_hits
        self.max_age = max_age
        self.threshold = threshold
        self.side = side
        self.seed = seed

    def _config(self):
        return make_config({
            "hierarchy": {"l": self.side},
            "frontend": {"threshold": self.threshold},
            "spatial": {"point_tolerance": self.point_tolerance},
            "learning": {"sigma": self.sigma, "exponent_c": self.exponent_c},
            "train": {"response_ratio": self.response_ratio},
            "forgetting": {"min_hits": self.min_hits, "max_age": self.max_age},
            "attention": {"t_ex_budget": self.t_ex_budget, "seed": self.seed},
            "maps": {"seed": self.seed},
        })

    def fit(self, X, y):
        X = check_images(X, self.side)
        y = check_labels(y, len(X))
        self.classes_, codes = np.unique(y, return_inverse=True)
        self.network_ = Network(self._config(), labels=range(len(self.classes_)))
        for i, (img, z) in enumerate(zip(X, codes)):
            self.network_.train_image(img, int(z), exposure=i)
        self.fallback_ = self.classes_[np.bincount(codes).argmax()] if len(codes) else None
        return self

    def recognize(self, X):
        """``(labels, excitation types)``; unanswered inputs give ``None`` in both."""
        check_is_fitted(self, "network_")
        labels, kinds = [], []
        for img in check_images(X, self.side):
            z, kind, _ = self.network_.recognize_image(img)
            labels.append(None if z is None else self.classes_[z])
            kinds.append(kind)
        return labels, kinds

    def predict(self, X):
        labels, _ = self.recognize(X)
        return np.array([self.fallback_ if lab is None else lab for lab in labels])
