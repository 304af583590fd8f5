"""Stratified splitting, two-level majority voting and the model bundle."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import (
    DimensionMismatchError,
    EmptyClassError,
    MisalignedRowsError,
    MissingMethodError,
)
from ..features import METHODS
from ..metrics import MetricsReport
from .models import KINDS, ClassifierModel, train_classifier

BUNDLE_FORMAT = "amrp-model"
BUNDLE_VERSION = 1


@dataclass(frozen=True)
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray
    method: str
    target: str
    subject: np.ndarray = None
    food: np.ndarray = None
    epoch: np.ndarray = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError("X must be (n, d) with one label per row")
        if np.any((y != 0) & (y != 1)):
            raise ValueError("labels must be binary")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self):
        return self.X.shape[0]

    def subset(self, idx):
        pick = (lambda a: None if a is None else np.asarray(a)[idx])
        return LabeledDataset(self.X[idx], self.y[idx], self.method, self.target,
                              pick(self.subject), pick(self.food), pick(self.epoch))


def _largest_remainder(total, counts):
    quota = total * counts / counts.sum()
    base = np.floor(quota).astype(np.int64)
    short = total - base.sum()
    order = np.lexsort((np.arange(counts.size), -(quota - base)))
    base[order[:short]] += 1
    return np.minimum(base, counts)


def train_test_split(strata, train_fraction=0.7, seed=0, groups=None, labels=None):
    """Stratified (train_idx, test_idx) over ``len(strata)`` rows.

    The training side holds ``min(floor(n * f), n - 1)`` rows, allocated to
    each stratum by floor plus largest remainder. With ``groups`` the split
    holds out whole groups instead (e.g. subjects). Every class of
    ``labels`` (columns checked separately; defaults to ``strata``) must keep
    at least one training row.
    """
    strata = np.asarray(strata)
    n = strata.shape[0]
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    if n == 0:
        raise ValueError("empty dataset")
    rng = np.random.default_rng(seed)
    if groups is not None:
        groups = np.asarray(groups)
        ids = np.unique(groups)
        if ids.size < 2:
            raise EmptyClassError("need at least two groups to hold one out")
        k = min(max(int(np.floor(ids.size * train_fraction)), 1), ids.size - 1)
        chosen = rng.permutation(ids)[:k]
        train = np.isin(groups, chosen)
        tr, te = np.flatnonzero(train), np.flatnonzero(~train)
    else:
        total = min(int(np.floor(n * train_fraction)), n - 1)
        classes, inverse = np.unique(strata, return_inverse=True)
        counts = np.bincount(inverse)
        alloc = _largest_remainder(total, counts)
        picks = []
        for c in range(classes.size):
            rows = np.flatnonzero(inverse == c)
            picks.append(rng.permutation(rows)[: alloc[c]])
        tr = np.sort(np.concatenate(picks))
        te = np.setdiff1d(np.arange(n), tr)
    check = strata if labels is None else np.asarray(labels)
    cols = check.reshape(n, -1)
    for c in range(cols.shape[1]):
        if np.setdiff1d(np.unique(cols[:, c]), np.unique(cols[tr, c])).size:
            raise EmptyClassError("a class has no training rows")
    return tr, te


def majority_vote(labels, scores=None):
    """Modal label; a tie goes to the side with higher mean confidence, then to 0.

    ``scores`` are class-1 affinities. A 1-voter's confidence is its score,
    a 0-voter's confidence is one minus its score.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("cannot vote on an empty list")
    ones = int(labels.sum())
    zeros = labels.size - ones
    if ones != zeros:
        return int(ones > zeros)
    if scores is None:
        return 0
    scores = np.asarray(scores, dtype=np.float64)
    c1 = scores[labels == 1].mean()
    c0 = (1.0 - scores[labels == 0]).mean()
    return int(c1 > c0)


def majority_vote_rows(labels, scores):
    """Row-wise :func:`majority_vote` over (n, k) tables."""
    labels = np.asarray(labels, dtype=np.int64)
    scores = np.asarray(scores, dtype=np.float64)
    k = labels.shape[1]
    ones = labels.sum(axis=1)
    out = (2 * ones > k).astype(np.int64)
    tie = 2 * ones == k
    if tie.any():
        with np.errstate(invalid="ignore", divide="ignore"):
            c1 = np.where(labels == 1, scores, 0.0).sum(1) / ones
            c0 = np.where(labels == 0, 1.0 - scores, 0.0).sum(1) / (k - ones)
        out[tie] = (c1[tie] > c0[tie]).astype(np.int64)
    return out


@dataclass
class TrainedEnsemble:
    target: str
    models: dict  # method -> {kind: ClassifierModel}
    tie_rule: str = "confidence"
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [m for m in METHODS if m not in self.models]
        if missing:
            raise MissingMethodError(f"ensemble lacks methods {missing}")
        for m in METHODS:
            if sorted(self.models[m]) != sorted(KINDS):
                raise ValueError(f"method {m} must hold exactly the kinds {KINDS}")

    def dims(self):
        return {m: self.models[m][KINDS[0]].dim for m in METHODS}

    def base_outputs(self, features):
        """Per method: (labels (n, 4), scores (n, 4))."""
        missing = [m for m in METHODS if m not in features]
        if missing:
            raise MissingMethodError(f"no feature vectors for methods {missing}")
        out = {}
        n = None
        for m in METHODS:
            X = np.atleast_2d(np.asarray(getattr(features[m], "values", features[m]),
                                         dtype=np.float64))
            if n is not None and X.shape[0] != n:
                raise MisalignedRowsError("methods disagree on the number of rows")
            n = X.shape[0]
            scores = np.stack([self.models[m][k].scores(X) for k in KINDS], axis=1)
            out[m] = ((scores >= 0.5).astype(np.int64), scores)
        return out

    def predict_rows(self, features):
        """(level-2 labels, ranking scores, level-1 verdicts (n, 3))."""
        base = self.base_outputs(features)
        verdicts = np.stack([majority_vote_rows(*base[m]) for m in METHODS], axis=1)
        mscores = np.stack([base[m][1].mean(axis=1) for m in METHODS], axis=1)
        final = majority_vote_rows(verdicts, mscores)
        agree = verdicts == final[:, None]
        score = np.where(agree, mscores, 0.0).sum(1) / agree.sum(1)
        return final, score, verdicts

    def to_dict(self):
        return {"target": self.target, "tie_rule": self.tie_rule, "seed": self.seed,
                "meta": self.meta,
                "models": {m: {k: self.models[m][k].to_dict() for k in KINDS}
                           for m in METHODS}}

    @classmethod
    def from_dict(cls, d):
        models = {m: {k: ClassifierModel.from_dict(v) for k, v in d["models"][m].items()}
                  for m in d["models"]}
        return cls(d["target"], models, d.get("tie_rule", "confidence"), d.get("seed", 0),
                   d.get("meta", {}))


def hierarchical_predict(ensemble, vectors):
    """Level-2 label for one epoch given one feature vector per method."""
    missing = [m for m in METHODS if m not in vectors]
    if missing:
        raise MissingMethodError(f"no feature vector for methods {missing}")
    dims = ensemble.dims()
    for m in METHODS:
        v = np.asarray(getattr(vectors[m], "values", vectors[m]))
        if v.ndim != 1 or v.shape[0] != dims[m]:
            raise DimensionMismatchError(f"{m}: expected a {dims[m]}-vector")
    final, _, _ = ensemble.predict_rows(vectors)
    return int(final[0])


def train_ensemble(train_sets, target, hyperparams=None, seed=0):
    """Fit the 12 base models; ``train_sets`` maps method -> (X, y)."""
    missing = [m for m in METHODS if m not in train_sets]
    if missing:
        raise MissingMethodError(f"no training data for methods {missing}")
    ys = [np.asarray(train_sets[m][1]) for m in METHODS]
    if any(not np.array_equal(ys[0], y) for y in ys[1:]):
        raise MisalignedRowsError("methods were not trained on the same rows")
    hyperparams = hyperparams or {}
    children = np.random.SeedSequence(seed).spawn(len(METHODS) * len(KINDS))
    models = {}
    for i, m in enumerate(METHODS):
        X, y = train_sets[m]
        models[m] = {}
        for j, k in enumerate(KINDS):
            s = int(children[i * len(KINDS) + j].generate_state(1)[0])
            models[m][k] = train_classifier(k, X, y, hyperparams.get(k), seed=s)
    return TrainedEnsemble(target, models, seed=seed)


def evaluate_ensemble(ensemble, test_sets, positive_class=0):
    """MetricsReport for aligned per-method test sets (method -> (X, y[, ids]))."""
    missing = [m for m in METHODS if m not in test_sets]
    if missing:
        raise MissingMethodError(f"no test data for methods {missing}")
    ref = test_sets[METHODS[0]]
    for m in METHODS[1:]:
        cur = test_sets[m]
        if len(cur[1]) != len(ref[1]) or not np.array_equal(cur[1], ref[1]):
            raise MisalignedRowsError(f"{m} test rows do not match {METHODS[0]}")
        if len(cur) > 2 and len(ref) > 2 and not np.array_equal(cur[2], ref[2]):
            raise MisalignedRowsError(f"{m} row ids do not match {METHODS[0]}")
    y = np.asarray(ref[1], dtype=np.int64)
    final, score, _ = ensemble.predict_rows({m: test_sets[m][0] for m in METHODS})
    return MetricsReport.build(final, y, score, positive_class)


def save_bundle(path, ensembles, meta=None):
    doc = {"format": BUNDLE_FORMAT, "version": BUNDLE_VERSION, "meta": meta or {},
           "targets": {t: e.to_dict() for t, e in ensembles.items()}}
    Path(path).write_text(json.dumps(doc, separators=(",", ":")), encoding="utf-8")
    return Path(path)


def load_bundle(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != BUNDLE_FORMAT or doc.get("version") != BUNDLE_VERSION:
        raise ValueError(f"{path}: not an {BUNDLE_FORMAT} v{BUNDLE_VERSION} bundle")
    return {t: TrainedEnsemble.from_dict(e) for t, e in doc["targets"].items()}, doc["meta"]
