"""Confusion matrices and underestimation / disparity metrics.

All metrics consume hard 0/1 predictions. Degenerate ratios (no actual
positives, an empty group, a zero majority rate) are returned as ``None``
rather than 0 or NaN, so downstream reports stay machine readable.

``minority_mask`` marks rows of the sensitive minority (S != 1).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def actual_pos(self) -> int:
        return self.tp + self.fn

    @property
    def predicted_pos(self) -> int:
        return self.tp + self.fp

    @property
    def actual_neg(self) -> int:
        return self.fp + self.tn

    @property
    def predicted_neg(self) -> int:
        return self.fn + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def _binary(v, name):
    a = np.asarray(v)
    if a.ndim != 1:
        raise MetricError(f"{name} must be one-dimensional")
    if a.dtype != bool and not np.isin(a, (0, 1)).all():
        raise MetricError(f"{name} must contain only 0/1 values")
    return a.astype(bool)


def _check(y_true, y_pred, mask=None):
    t = _binary(y_true, "y_true")
    p = _binary(y_pred, "y_pred")
    if len(t) != len(p):
        raise MetricError(f"length mismatch: y_true has {len(t)}, y_pred has {len(p)}")
    if len(t) == 0:
        raise MetricError("empty input")
    if mask is None:
        return t, p, None
    m = _binary(mask, "mask")
    if len(m) != len(t):
        raise MetricError(f"length mismatch: mask has {len(m)}, expected {len(t)}")
    return t, p, m


def confusion(y_true, y_pred, mask=None) -> ConfusionMatrix:
    """Count TP/FP/FN/TN over the rows selected by ``mask`` (all rows if None)."""
    t, p, m = _check(y_true, y_pred, mask)
    if m is not None:
        if not m.any():
            raise MetricError("mask selects no rows")
        t, p = t[m], p[m]
    return _counts(t, p)


def _counts(t, p) -> ConfusionMatrix:
    tp = int(np.count_nonzero(t & p))
    fp = int(np.count_nonzero(~t & p))
    fn = int(np.count_nonzero(t & ~p))
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=len(t) - tp - fp - fn)


def accuracy(cm: ConfusionMatrix) -> float:
    # the usual (TP + TN) / total; total includes TN once and FN once
    return (cm.tp + cm.tn) / cm.total


def underestimation(cm: ConfusionMatrix) -> float | None:
    """Predicted positives over actual positives, P'/P; None when P = 0."""
    if cm.actual_pos == 0:
        return None
    return cm.predicted_pos / cm.actual_pos


def underestimation_group(y_true, y_pred, minority_mask) -> float | None:
    """P'/P restricted to the minority rows; None if they hold no positives."""
    t, p, m = _check(y_true, y_pred, minority_mask)
    if not m.any():
        return None
    return underestimation(_counts(t[m], p[m]))


def _group_counts(y_pred, minority_mask):
    """(predicted positives, size) for the majority and the minority group."""
    p = _binary(y_pred, "y_pred")
    m = _binary(minority_mask, "minority_mask")
    if len(p) != len(m):
        raise MetricError(f"length mismatch: y_pred has {len(p)}, minority_mask has {len(m)}")
    n_min = int(m.sum())
    return (int(np.count_nonzero(p & ~m)), len(m) - n_min,
            int(np.count_nonzero(p & m)), n_min)


# Both scores are formed as one division of exact integers, so they are the
# correctly rounded value of the underlying rational (0.32 / 0.40 gives 0.8,
# not 0.7999999999999999).

def cv_score(y_pred, minority_mask) -> float | None:
    """Calders-Verwer discrimination: P[pred=1 | majority] - P[pred=1 | minority]."""
    a, n_maj, b, n_min = _group_counts(y_pred, minority_mask)
    if n_maj == 0 or n_min == 0:
        return None
    return (a * n_min - b * n_maj) / (n_maj * n_min)


def disparate_impact(y_pred, minority_mask, tau: float = 0.8) -> tuple[float | None, bool | None]:
    """Ratio of minority to majority positive-prediction rates, and ``ratio >= tau``."""
    a, n_maj, b, n_min = _group_counts(y_pred, minority_mask)
    if n_maj == 0 or n_min == 0 or a == 0:
        return None, None
    ratio = (b * n_maj) / (a * n_min)
    return ratio, bool(ratio >= tau)


@dataclass(frozen=True)
class BiasReport:
    accuracy: float
    us: float | None
    us_s: float | None
    cv: float | None
    di_s: float | None
    di_pass_80: bool | None
    overall_cm: ConfusionMatrix
    minority_cm: ConfusionMatrix
    majority_cm: ConfusionMatrix

    METRICS = ("accuracy", "us", "us_s", "cv", "di_s")

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "us": self.us,
            "us_s": self.us_s,
            "cv": self.cv,
            "di_s": self.di_s,
            "di_pass_80": self.di_pass_80,
            "overall_cm": self.overall_cm.to_dict(),
            "minority_cm": self.minority_cm.to_dict(),
            "majority_cm": self.majority_cm.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BiasReport":
        return cls(
            accuracy=d["accuracy"], us=d["us"], us_s=d["us_s"], cv=d["cv"],
            di_s=d["di_s"], di_pass_80=d["di_pass_80"],
            overall_cm=ConfusionMatrix(**d["overall_cm"]),
            minority_cm=ConfusionMatrix(**d["minority_cm"]),
            majority_cm=ConfusionMatrix(**d["majority_cm"]),
        )


def bias_report(y_true, y_pred, minority_mask, tau: float = 0.8) -> BiasReport:
    t, p, m = _check(y_true, y_pred, minority_mask)
    overall = _counts(t, p)
    minority = _counts(t[m], p[m])
    majority = _counts(t[~m], p[~m])
    ratio, passes = disparate_impact(p, m, tau)
    return BiasReport(
        accuracy=accuracy(overall),
        us=underestimation(overall),
        us_s=underestimation(minority),
        cv=cv_score(p, m),
        di_s=ratio,
        di_pass_80=passes,
        overall_cm=overall,
        minority_cm=minority,
        majority_cm=majority,
    )


def positive_rate(y) -> float:
    y = np.asarray(y)
    return float(np.count_nonzero(y)) / len(y)
