"""Confusion-matrix metrics with fraud (label 1) as the positive class."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_counts(cls, tp: int, fp: int, tn: int, fn: int) -> MetricSet:
        # ratios of integers, rounded once when converted to float
        def ratio(num, den):
            return float(Fraction(num, den)) if den else 0.0

        return cls(
            accuracy=ratio(tp + tn, tp + fp + tn + fn),
            precision=ratio(tp, tp + fp),
            recall=ratio(tp, tp + fn),
            # 2PR/(P+R) reduces to 2tp/(2tp+fp+fn), and is 0 whenever P+R is
            f1=ratio(2 * tp, 2 * tp + fp + fn) if tp else 0.0,
            tp=tp, fp=fp, tn=tn, fn=fn,
        )


def compute_metrics(true_labels, predicted_labels) -> MetricSet:
    y = np.asarray(true_labels)
    yhat = np.asarray(predicted_labels)
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise ValueError("no labels")
    for arr in (y, yhat):
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError("labels must be 0 or 1")
    y = y.astype(bool)
    yhat = yhat.astype(bool)
    tp = int(np.sum(y & yhat))
    fp = int(np.sum(~y & yhat))
    tn = int(np.sum(~y & ~yhat))
    fn = int(np.sum(y & ~yhat))
    return MetricSet.from_counts(tp, fp, tn, fn)
