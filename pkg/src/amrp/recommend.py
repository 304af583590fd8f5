"""TOPSIS ranking of foods by closeness to the ideal affectivity profile."""

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveWeightError, WeightDimensionMismatchError, ZeroColumnError

log = logging.getLogger(__name__)

DEFAULT_WEIGHTS = (0.4, 0.3, 0.3)
CRITERIA = ("like", "excitement", "feelings")


@dataclass(frozen=True)
class DecisionMatrix:
    values: np.ndarray
    alternatives: tuple = None
    criteria: tuple = CRITERIA
    benefit: tuple = None  # True for larger-is-better; defaults to all benefit

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 1:
            raise ValueError("decision matrix needs m >= 2 rows and n >= 1 columns")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("decision matrix entries must be finite and >= 0")
        if np.any(np.all(v == 0, axis=0)):
            raise ZeroColumnError("a criterion column is all zero")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        m, n = v.shape
        if self.alternatives is None:
            object.__setattr__(self, "alternatives", tuple(range(m)))
        if len(self.criteria) != n:
            object.__setattr__(self, "criteria", tuple(f"c{j}" for j in range(n)))
        if self.benefit is None:
            object.__setattr__(self, "benefit", (True,) * n)


@dataclass(frozen=True)
class TopsisResult:
    normalized: np.ndarray
    weighted: np.ndarray
    ideal_best: np.ndarray
    ideal_worst: np.ndarray
    s_best: np.ndarray
    s_worst: np.ndarray
    closeness: np.ndarray
    ranking: np.ndarray


def normalize(matrix):
    """Divide every column by its Euclidean norm."""
    x = np.asarray(getattr(matrix, "values", matrix), dtype=np.float64)
    norms = np.sqrt((x * x).sum(axis=0))
    if np.any(norms == 0):
        raise ZeroColumnError("a criterion column is all zero")
    return x / norms


def apply_weights(R, weights):
    R = np.asarray(R, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] != R.shape[1]:
        raise WeightDimensionMismatchError(
            f"{w.shape[0] if w.ndim else 1} weights for {R.shape[1]} criteria")
    if np.any(w <= 0):
        raise NonPositiveWeightError("weights must be strictly positive")
    total = w.sum()
    if abs(total - 1.0) > 1e-12:
        log.info("renormalizing weights %s (sum %.6g) to sum to 1", w.tolist(), total)
        w = w / total
    return R * w


def score(V, benefit=None):
    """Ideal points, separations, closeness and ranking for a weighted matrix."""
    V = np.asarray(V, dtype=np.float64)
    n = V.shape[1]
    benefit = np.ones(n, dtype=bool) if benefit is None else np.asarray(benefit, dtype=bool)
    hi, lo = V.max(axis=0), V.min(axis=0)
    best = np.where(benefit, hi, lo)
    worst = np.where(benefit, lo, hi)
    s_best = np.sqrt(((V - best) ** 2).sum(axis=1))
    s_worst = np.sqrt(((V - worst) ** 2).sum(axis=1))
    den = s_best + s_worst
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(den > 0, s_worst / den, 0.5)
    ranking = np.lexsort((np.arange(V.shape[0]), -c))
    return TopsisResult(None, V, best, worst, s_best, s_worst, c, ranking)


def topsis(matrix, weights=DEFAULT_WEIGHTS, benefit=None):
    dm = matrix if isinstance(matrix, DecisionMatrix) else DecisionMatrix(matrix)
    R = normalize(dm)
    V = apply_weights(R, weights)
    res = score(V, dm.benefit if benefit is None else benefit)
    return TopsisResult(R, V, res.ideal_best, res.ideal_worst, res.s_best, res.s_worst,
                        res.closeness, res.ranking)


def rank_foods(table, weights=DEFAULT_WEIGHTS, k=5, names=None):
    """Top-``k`` (food, closeness) pairs from a foods x criteria table.

    ``table`` is an (m, n) array or a mapping food -> criterion tuple.
    """
    if isinstance(table, dict):
        names = list(table)
        values = np.array([table[f] for f in names], dtype=np.float64)
    else:
        values = np.asarray(table, dtype=np.float64)
        names = list(names) if names is not None else list(range(values.shape[0]))
    m = values.shape[0]
    if k > m:
        warnings.warn(f"top-{k} requested from {m} foods; returning {m}", stacklevel=2)
        k = m
    if k < 1:
        raise ValueError("k must be >= 1")
    res = topsis(values, weights)
    return [(names[i], float(res.closeness[i])) for i in res.ranking[:k]], res


def criterion_values(labels, mode="label", scores=None):
    """Per-food criterion value: ``1 + label`` or the mean class-1 score."""
    if mode == "label":
        return 1.0 + np.asarray(labels, dtype=np.float64)
    if mode == "score":
        if scores is None:
            raise ValueError("score mode needs scores")
        return np.asarray(scores, dtype=np.float64)
    raise ValueError(f"unknown criterion mode {mode!r}")
