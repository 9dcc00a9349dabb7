"""Evaluation report: error counts, confusion table, detector counts, timings.

Text format, one ``key: value`` per line, then the confusion table::

    n_test: 2000
    errors: 231
    error_rate: 0.115500
    rejected: 3
    class.0.count: 196
    class.0.errors: 9
    class.0.error_rate: 0.045918
    ...
    detectors.total: 1863
    detectors.map.0: 204
    ...
    kinds.example: 1726
    actions.capture_cluster: 10
    seconds.train: 77.2
    seconds.eval: 61.0
    reference.detectors: 249

    confusion (rows true, columns predicted, last column no response)
         0    1  ...    9    -
    0  187    0  ...    1    0

Classes with no test items are listed with zero counts and a zero rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

REFERENCE_DETECTORS = 249


@dataclass
class MetricsReport:
    labels: list
    confusion: np.ndarray  # (k, k + 1), last column counts inputs no map answered
    detectors: dict = field(default_factory=dict)
    kinds: dict = field(default_factory=dict)
    actions: dict = field(default_factory=dict)
    seconds: dict = field(default_factory=dict)

    @classmethod
    def empty(cls, labels):
        k = len(labels)
        return cls(list(labels), np.zeros((k, k + 1), dtype=np.int64))

    @classmethod
    def from_predictions(cls, labels, truth, predicted, **kw):
        rep = cls.empty(labels)
        col = {lab: i for i, lab in enumerate(rep.labels)}
        for t, p in zip(truth, predicted):
            rep.confusion[col[int(t)], col[int(p)] if p is not None else len(rep.labels)] += 1
        for key, val in kw.items():
            setattr(rep, key, val)
        return rep

    @property
    def n(self) -> int:
        return int(self.confusion.sum())

    def class_counts(self) -> np.ndarray:
        return self.confusion.sum(axis=1)

    def class_errors(self) -> np.ndarray:
        return self.class_counts() - np.diag(self.confusion[:, :-1])

    @property
    def errors(self) -> int:
        return int(self.class_errors().sum())

    @property
    def error_rate(self) -> float:
        return self.errors / self.n if self.n else 0.0

    @property
    def rejected(self) -> int:
        return int(self.confusion[:, -1].sum())

    @property
    def total_detectors(self) -> int:
        return int(sum(self.detectors.values()))

    def to_text(self) -> str:
        lines = [f"n_test: {self.n}", f"errors: {self.errors}", f"error_rate: {self.error_rate:.6f}",
                 f"rejected: {self.rejected}"]
        counts, errs = self.class_counts(), self.class_errors()
        for lab, c, e in zip(self.labels, counts, errs):
            lines += [f"class.{lab}.count: {int(c)}", f"class.{lab}.errors: {int(e)}",
                      f"class.{lab}.error_rate: {(e / c if c else 0.0):.6f}"]
        lines.append(f"detectors.total: {self.total_detectors}")
        lines += [f"detectors.map.{z}: {n}" for z, n in sorted(self.detectors.items())]
        lines += [f"kinds.{k}: {n}" for k, n in sorted(self.kinds.items())]
        lines += [f"actions.{k}: {n}" for k, n in sorted(self.actions.items())]
        lines += [f"seconds.{k}: {v:.1f}" for k, v in sorted(self.seconds.items())]
        lines.append(f"reference.detectors: {REFERENCE_DETECTORS}")
        lines += ["", "confusion (rows true, columns predicted, last column no response)"]
        heads = [str(lab) for lab in self.labels] + ["-"]
        width = max(4, len(str(int(self.confusion.max(initial=0)))) + 1)
        lines.append(" " * 3 + "".join(h.rjust(width) for h in heads))
        for lab, row in zip(self.labels, self.confusion):
            lines.append(str(lab).ljust(3) + "".join(str(int(v)).rjust(width) for v in row))
        return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict:
    """Key/value part of a report as a dict of strings."""
    out = {}
    for line in text.splitlines():
        if not line.strip():
            break
        key, _, val = line.partition(": ")
        out[key] = val
    return out
