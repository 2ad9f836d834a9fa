"""Discrimination, log-loss and equal-count calibration bins."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from scipy.stats import rankdata

LOG_LOSS_CLAMP = 1e-12


def _pair(labels, scores):
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    if y.shape != s.shape or y.ndim != 1:
        raise ValueError(f"length mismatch: {y.shape} vs {s.shape}")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1")
    return y.astype(np.int64), s


def auc(labels, scores) -> float:
    """Mann-Whitney AUC: share of (positive, negative) pairs ranked correctly, ties worth 1/2.

    Computed from midranks; twice the U statistic is an integer, so the
    result equals the pairwise count exactly for moderate n.
    """
    y, s = _pair(labels, scores)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined: labels contain a single class")
    # doubled midranks are integers
    ranks2 = np.rint(2 * rankdata(s, method="average")).astype(np.int64)
    u2 = int(ranks2[y == 1].sum()) - n_pos * (n_pos + 1)
    return u2 / (2 * n_pos * n_neg)


def log_loss(labels, probs) -> float:
    """Mean binary cross-entropy; probabilities are clamped to [1e-12, 1 - 1e-12]."""
    y, p = _pair(labels, probs)
    if len(y) == 0:
        raise ValueError("log_loss of nothing")
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    p = np.clip(p, LOG_LOSS_CLAMP, 1 - LOG_LOSS_CLAMP)
    return float(-np.mean(np.where(y == 1, np.log(p), np.log1p(-p))))


@dataclass(frozen=True)
class CalibrationTable:
    bin_index: np.ndarray
    count: np.ndarray
    mean_predicted: np.ndarray
    observed_fraction: np.ndarray

    @property
    def max_gap(self) -> float:
        return float(np.max(np.abs(self.observed_fraction - self.mean_predicted)))

    def rows(self):
        return zip(self.bin_index.tolist(), self.count.tolist(), self.mean_predicted.tolist(), self.observed_fraction.tolist())

    def to_csv(self, stream: TextIO) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["bin_index", "count", "mean_predicted", "observed_fraction"])
        for b, c, m, o in self.rows():
            w.writerow([b, c, repr(m), repr(o)])


def calibration(labels, probs, num_bins: int = 10) -> CalibrationTable:
    """Reliability table over equal-count bins of the sorted predictions.

    Records are stably sorted by predicted probability and cut into
    ``num_bins`` contiguous groups whose sizes differ by at most one (the
    larger groups come first).
    """
    if num_bins < 1:
        raise ValueError("num_bins must be >= 1")
    y, p = _pair(labels, probs)
    if len(y) < num_bins:
        raise ValueError(f"need at least {num_bins} records, got {len(y)}")
    order = np.argsort(p, kind="stable")
    groups = np.array_split(order, num_bins)
    return CalibrationTable(
        bin_index=np.arange(num_bins),
        count=np.array([len(g) for g in groups]),
        mean_predicted=np.array([p[g].mean() for g in groups]),
        observed_fraction=np.array([y[g].mean() for g in groups]),
    )
