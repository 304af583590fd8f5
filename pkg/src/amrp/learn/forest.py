"""Bagged Gini trees."""

from dataclasses import dataclass, field

import numpy as np

from .trees import Binner, Tree, gini_gain, grow_tree


@dataclass
class RandomForest:
    n_trees: int = 100
    max_features: str = "sqrt"
    max_depth: int = None
    seed: int = 0
    trees: list = field(default_factory=list)

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n, d = X.shape
        binner = Binner.fit(X)
        Xb = binner.transform(X)
        k = max(1, int(np.sqrt(d))) if self.max_features == "sqrt" else d
        rng = np.random.default_rng(self.seed)
        onehot = np.stack([y == 0, y == 1], axis=1).astype(np.float64)
        self.trees = []
        for _ in range(self.n_trees):
            mult = np.bincount(rng.integers(0, n, n), minlength=n).astype(np.float64)
            rows = np.flatnonzero(mult)
            stats = onehot[rows] * mult[rows, None]
            tree = grow_tree(Xb[rows], stats, binner, gini_gain,
                             lambda t: float(t[1] > t[0]),
                             max_depth=self.max_depth, n_features=k, rng=rng,
                             splittable=lambda t: (t[0] > 0) & (t[1] > 0))
            self.trees.append(tree)
        return self

    def votes(self, X):
        X = np.asarray(X, dtype=np.float64)
        return np.stack([t.predict(X) for t in self.trees])

    def score(self, X):
        """Fraction of trees voting for class 1."""
        return self.votes(X).mean(axis=0)

    def to_dict(self):
        return {"n_trees": self.n_trees, "max_features": self.max_features,
                "max_depth": self.max_depth, "seed": self.seed,
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["n_trees"], d["max_features"], d["max_depth"], d["seed"],
                   [Tree.from_dict(t) for t in d["trees"]])
