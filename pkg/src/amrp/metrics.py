"""Confusion-matrix metrics and rank-based AUC."""

from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np
from scipy.stats import rankdata

from .errors import EmptyInputError, LengthMismatchError, SingleClassError, UndefinedF1Error


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int
    positive_class: object = 1

    def __post_init__(self):
        for name in ("tp", "fn", "fp", "tn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v}")
            object.__setattr__(self, name, int(v))
        if self.n == 0:
            raise EmptyInputError("confusion matrix has no observations")

    @property
    def n(self):
        return self.tp + self.fn + self.fp + self.tn

    def scaled(self, k):
        return ConfusionMatrix(self.tp * k, self.fn * k, self.fp * k, self.tn * k,
                               self.positive_class)

    def swapped(self):
        """Same table with the other class treated as positive."""
        return ConfusionMatrix(self.tn, self.fp, self.fn, self.tp, None)


def confusion(predicted, actual, positive_class=0):
    """Counts with ``positive_class`` as the positive label.

    The default positive class is 0, the first-listed class of each target
    (Least Like, Least Excitement, Disgust).
    """
    p = np.asarray(predicted)
    a = np.asarray(actual)
    if p.shape != a.shape:
        raise LengthMismatchError(f"{p.shape[0] if p.ndim else 0} predictions vs "
                                  f"{a.shape[0] if a.ndim else 0} labels")
    if p.size == 0:
        raise EmptyInputError("no labels")
    pp, ap = p == positive_class, a == positive_class
    return ConfusionMatrix(int(np.sum(pp & ap)), int(np.sum(~pp & ap)),
                           int(np.sum(pp & ~ap)), int(np.sum(~pp & ~ap)), positive_class)


def accuracy(cm):
    return (cm.tp + cm.tn) / cm.n


def misclassification(cm):
    return (cm.fp + cm.fn) / cm.n


def accuracy_exact(cm):
    return Fraction(cm.tp + cm.tn, cm.n)


def misclassification_exact(cm):
    return Fraction(cm.fp + cm.fn, cm.n)


def precision(cm):
    if cm.tp + cm.fp == 0:
        raise UndefinedF1Error("no predicted positives")
    return cm.tp / (cm.tp + cm.fp)


def recall(cm):
    if cm.tp + cm.fn == 0:
        raise UndefinedF1Error("no actual positives")
    return cm.tp / (cm.tp + cm.fn)


def f1(cm):
    """Harmonic mean of precision and recall."""
    p, r = precision(cm), recall(cm)
    if p + r == 0:
        return 0.0
    return 2.0 * p * r / (p + r)


def auc(scores, actual, positive_class=1):
    """P(score of a random positive > score of a random negative), ties count half.

    ``positive_class`` names the label whose scores should rank high; the
    classifier scores are class-1 affinities, so the default is 1.
    """
    s = np.asarray(scores, dtype=np.float64)
    a = np.asarray(actual)
    if s.shape != a.shape:
        raise LengthMismatchError("scores and labels differ in length")
    if s.size == 0:
        raise EmptyInputError("no scores")
    pos = a == positive_class
    n1, n0 = int(pos.sum()), int((~pos).sum())
    if n1 == 0 or n0 == 0:
        raise SingleClassError("AUC needs both classes")
    ranks = rankdata(s)  # average ranks for ties
    return float((ranks[pos].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def roc_curve(scores, actual, positive_class=1):
    """(fpr, tpr) at every distinct threshold, from (0, 0) to (1, 1)."""
    s = np.asarray(scores, dtype=np.float64)
    pos = np.asarray(actual) == positive_class
    order = np.argsort(-s, kind="stable")
    s, pos = s[order], pos[order]
    last = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tps = np.cumsum(pos)[last]
    fps = np.cumsum(~pos)[last]
    tpr = np.r_[0.0, tps / max(pos.sum(), 1)]
    fpr = np.r_[0.0, fps / max((~pos).sum(), 1)]
    return fpr, tpr


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    misclassification: float
    f1: float
    auc: float
    confusion: ConfusionMatrix

    @classmethod
    def build(cls, predicted, actual, scores, positive_class=0):
        cm = confusion(predicted, actual, positive_class)
        try:
            f = f1(cm)
        except UndefinedF1Error:
            f = 0.0
        try:
            a = auc(scores, actual)
        except SingleClassError:
            a = float("nan")
        return cls(accuracy(cm), misclassification(cm), f, a, cm)

    def to_dict(self):
        cm = asdict(self.confusion)
        return {"accuracy": self.accuracy, "misclassification": self.misclassification,
                "f1": self.f1, "auc": self.auc,
                "confusion": {k: cm[k] for k in ("tp", "fn", "fp", "tn", "positive_class")}}
