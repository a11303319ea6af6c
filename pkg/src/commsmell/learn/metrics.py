"""Support-weighted classification metrics and rank-based AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f_measure: float
    auc: float
    # undefined ratios (x/0) that were set to 0, plus an undefined AUC set to 0.5
    zero_division: int = 0

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "auc": self.auc,
        }


def roc_auc(truth, scores) -> float:
    """Mann-Whitney estimate of the AUC with average ranks for tied scores.

    Returns NaN when only one class is present.
    """
    truth = np.asarray(truth).astype(bool)
    scores = np.asarray(scores, dtype=float)
    n_pos = int(truth.sum())
    n_neg = len(truth) - n_pos
    if n_pos == 0 or n_neg == 0:
        return float("nan")
    ranks = rankdata(scores)
    u = ranks[truth].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def compute_metrics(truth, predictions, scores=None) -> Metrics:
    """Precision, recall and F-measure per class, averaged with class-support
    weights, plus the AUC of ``scores`` for the positive class."""
    truth = np.asarray(truth).astype(int)
    predictions = np.asarray(predictions).astype(int)
    if truth.size == 0:
        raise ValueError("cannot compute metrics on empty input")
    if truth.shape != predictions.shape:
        raise ValueError("truth and predictions differ in length")
    n = truth.size
    zero_div = 0
    prec = rec = f1 = 0.0
    for c in (0, 1):
        support = int((truth == c).sum())
        if support == 0:
            continue
        tp = int(((truth == c) & (predictions == c)).sum())
        predicted = int((predictions == c).sum())
        if predicted:
            p = tp / predicted
        else:
            p = 0.0
            zero_div += 1
        r = tp / support
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        w = support / n
        prec += w * p
        rec += w * r
        f1 += w * f
    if scores is None:
        scores = predictions
    auc = roc_auc(truth, scores)
    if np.isnan(auc):
        auc = 0.5
        zero_div += 1
    return Metrics(prec, rec, f1, auc, zero_div)
