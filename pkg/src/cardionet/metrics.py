"""Classification metrics: accuracy, confusion matrix, per-class P/R/F1."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    # undefined when the denominator was zero; the value is reported as 0.0
    precision_defined: bool = True
    recall_defined: bool = True


@dataclass
class MetricsReport:
    accuracy: float
    confusion: list[list[int]]  # rows = true class, cols = predicted class
    per_class: list[ClassMetrics] = field(default_factory=list)
    num_samples: int = 0

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "num_samples": self.num_samples,
            "confusion_matrix": self.confusion,
            "per_class": [vars(m) for m in self.per_class],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent, sort_keys=True)


def compute_metrics(predicted, actual, num_classes: int = 3) -> MetricsReport:
    """Tally a confusion matrix and derive accuracy and per-class scores.

    precision_c = CM[c,c] / column_sum(c), recall_c = CM[c,c] / row_sum(c).
    A zero denominator yields 0.0 with the matching *_defined flag cleared.
    """
    predicted = np.asarray(predicted, dtype=np.int64)
    actual = np.asarray(actual, dtype=np.int64)
    if predicted.shape != actual.shape or predicted.ndim != 1:
        raise ValueError(
            f"compute_metrics: predicted and actual must be equal-length 1-d sequences, "
            f"got {predicted.shape} and {actual.shape}")
    if predicted.size == 0:
        raise ValueError("compute_metrics: empty input")
    for name, arr in (("predicted", predicted), ("actual", actual)):
        if arr.min() < 0 or arr.max() >= num_classes:
            raise ValueError(f"compute_metrics: {name} labels out of range [0, {num_classes})")

    confusion = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(confusion, (actual, predicted), 1)

    total = predicted.size
    accuracy = float(np.trace(confusion)) / total

    per_class = []
    for c in range(num_classes):
        tp = int(confusion[c, c])
        col = int(confusion[:, c].sum())
        row = int(confusion[c, :].sum())
        p_ok, r_ok = col > 0, row > 0
        precision = tp / col if p_ok else 0.0
        recall = tp / row if r_ok else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class.append(ClassMetrics(precision, recall, f1, support=row,
                                      precision_defined=p_ok, recall_defined=r_ok))

    return MetricsReport(accuracy=accuracy,
                         confusion=confusion.tolist(),
                         per_class=per_class,
                         num_samples=total)
