"""Uniform wrapper over the four classifier families."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatchError, SingleClassTrainingSetWarning
from .boosting import AdaBoost, GradientBoosting
from .forest import RandomForest
from .svm import SVM

KINDS = ("forest", "max-margin", "adaptive-boost", "gradient-boost")

DEFAULT_HYPERPARAMS = {
    "forest": {"n_trees": 100, "max_features": "sqrt"},
    "max-margin": {"C": 1.0, "gamma": None, "tol": 1e-3},
    "adaptive-boost": {"n_rounds": 100},
    "gradient-boost": {"n_rounds": 100, "max_depth": 3, "learning_rate": 0.1,
                       "reg_lambda": 1.0},
}

_IMPL = {"forest": RandomForest, "max-margin": SVM, "adaptive-boost": AdaBoost,
         "gradient-boost": GradientBoosting}


@dataclass(frozen=True)
class Constant:
    label: int

    def score(self, X):
        return np.full(np.asarray(X).shape[0], float(self.label))

    def to_dict(self):
        return {"label": self.label}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["label"]))


@dataclass(frozen=True)
class ClassifierModel:
    kind: str
    dim: int
    seed: int
    hyperparams: dict
    impl: object = field(repr=False)
    degenerate: bool = False

    def scores(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise DimensionMismatchError(
                f"{self.kind} model expects {self.dim} features, got {X.shape[1]}")
        return np.clip(self.impl.score(X), 0.0, 1.0)

    def to_dict(self):
        return {"kind": self.kind, "dim": self.dim, "seed": self.seed,
                "hyperparams": self.hyperparams, "degenerate": self.degenerate,
                "params": self.impl.to_dict()}

    @classmethod
    def from_dict(cls, d):
        impl_cls = Constant if d["degenerate"] else _IMPL[d["kind"]]
        return cls(d["kind"], int(d["dim"]), int(d["seed"]), dict(d["hyperparams"]),
                   impl_cls.from_dict(d["params"]), bool(d["degenerate"]))


def canonical_order(X, y):
    """Row permutation that depends only on the multiset of (row, label) pairs."""
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys[::-1])


def train_classifier(kind, X, y, hyperparams=None, seed=0):
    if kind not in _IMPL:
        raise ValueError(f"unknown classifier kind {kind!r}; expected one of {KINDS}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise ValueError("X must be (n, d) with one label per row")
    params = dict(DEFAULT_HYPERPARAMS[kind])
    params.update(hyperparams or {})
    classes = np.unique(y)
    if classes.size < 2:
        warnings.warn(f"{kind}: training labels contain only class {classes[0]}",
                      SingleClassTrainingSetWarning, stacklevel=2)
        return ClassifierModel(kind, X.shape[1], seed, params, Constant(int(classes[0])), True)
    order = canonical_order(X, y)
    X, y = X[order], y[order]
    if kind == "forest":
        impl = RandomForest(seed=seed, **params)
    else:
        impl = _IMPL[kind](**params)
    impl.fit(X, y)
    return ClassifierModel(kind, X.shape[1], seed, params, impl)


def predict(model, vector):
    """(label, score) for one feature vector."""
    v = np.asarray(getattr(vector, "values", vector), dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError("predict takes a single vector")
    s = float(model.scores(v[None, :])[0])
    return int(s >= 0.5), s


def predict_batch(model, X):
    s = model.scores(X)
    return (s >= 0.5).astype(np.int64), s
