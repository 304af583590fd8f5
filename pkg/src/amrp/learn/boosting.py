"""Discrete AdaBoost over stumps and second-order gradient boosting."""

from dataclasses import dataclass, field

import numpy as np

from .trees import Binner, Tree, grow_tree, newton_gain


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class Stump:
    feature: int
    threshold: float
    left: int  # vote (+1/-1) for x < threshold
    right: int

    def predict(self, X):
        if self.feature < 0:
            return np.full(X.shape[0], self.left, dtype=np.float64)
        return np.where(X[:, self.feature] < self.threshold, self.left, self.right).astype(float)


@dataclass
class AdaBoost:
    n_rounds: int = 100
    stumps: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    loss_history: list = field(default_factory=list)  # mean exp(-y F) after each round
    error_history: list = field(default_factory=list)  # training 0-1 error after each round

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        s = np.where(np.asarray(y) == 1, 1.0, -1.0)
        n, d = X.shape
        binner = Binner.fit(X)
        Xb = binner.transform(X).astype(np.int64)
        nb = binner.n_bins
        n_edges = np.array([len(e) for e in binner.edges])
        keys = (np.arange(d)[None, :] * nb + Xb).ravel()
        pos, neg = s > 0, s < 0
        w = np.full(n, 1.0 / n)
        F = np.zeros(n)
        self.stumps, self.alphas = [], []
        self.loss_history, self.error_history = [], []
        for _ in range(self.n_rounds):
            wp = np.bincount(keys, np.repeat(w * pos, d), d * nb).reshape(d, nb)
            wn = np.bincount(keys, np.repeat(w * neg, d), d * nb).reshape(d, nb)
            lp, ln_ = np.cumsum(wp, 1)[:, :-1], np.cumsum(wn, 1)[:, :-1]
            tp, tn = wp.sum(1)[:, None], wn.sum(1)[:, None]
            # weighted accuracy of predicting each side's majority
            acc = np.maximum(lp, ln_) + np.maximum(tp - lp, tn - ln_)
            acc = np.where(np.arange(nb - 1)[None, :] < n_edges[:, None], acc, -np.inf)
            total = w.sum()
            if acc.size and np.isfinite(acc.max()):
                f, b = np.unravel_index(np.argmax(acc), acc.shape)
                stump = Stump(int(f), binner.threshold(f, b),
                              1 if lp[f, b] > ln_[f, b] else -1,
                              1 if tp[f, 0] - lp[f, b] > tn[f, 0] - ln_[f, b] else -1)
            else:
                stump = Stump(-1, 0.0, 1 if (w * pos).sum() > (w * neg).sum() else -1, 0)
            h = stump.predict(X)
            eps = float(w[h != s].sum() / total)
            if eps >= 0.5:
                break
            eps = max(eps, 1e-10)
            alpha = 0.5 * np.log((1.0 - eps) / eps)
            self.stumps.append(stump)
            self.alphas.append(float(alpha))
            F += alpha * h
            w = w * np.exp(-alpha * s * h)
            w /= w.sum()
            self.loss_history.append(float(np.mean(np.exp(-s * F))))
            self.error_history.append(float(np.mean(np.where(F >= 0, 1.0, -1.0) != s)))
            if eps <= 1e-10:
                break
        return self

    def decision(self, X):
        X = np.asarray(X, dtype=np.float64)
        F = np.zeros(X.shape[0])
        for a, st in zip(self.alphas, self.stumps):
            F += a * st.predict(X)
        return F

    def score(self, X):
        # the additive score estimates half the log-odds
        return sigmoid(2.0 * self.decision(X))

    def to_dict(self):
        return {"n_rounds": self.n_rounds, "alphas": self.alphas,
                "stumps": [[s.feature, s.threshold, s.left, s.right] for s in self.stumps]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["n_rounds"], [Stump(int(a), float(b), int(c), int(e))
                                   for a, b, c, e in d["stumps"]], list(d["alphas"]))


@dataclass
class GradientBoosting:
    n_rounds: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0
    base_score: float = 0.0
    trees: list = field(default_factory=list)

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        p0 = np.clip(y.mean(), 1e-6, 1 - 1e-6)
        self.base_score = float(np.log(p0 / (1 - p0)))
        binner = Binner.fit(X)
        Xb = binner.transform(X)
        lam, mcw, eta = self.reg_lambda, self.min_child_weight, self.learning_rate

        def gain(L, T):
            return newton_gain(L, T, lam, mcw)

        def leaf(t):
            return -eta * t[0] / (t[1] + lam)

        F = np.full(X.shape[0], self.base_score)
        self.trees = []
        for _ in range(self.n_rounds):
            p = sigmoid(F)
            stats = np.stack([p - y, p * (1 - p)], axis=1)
            tree = grow_tree(Xb, stats, binner, gain, leaf, max_depth=self.max_depth,
                             splittable=lambda t: t[1] >= 2 * mcw)
            self.trees.append(tree)
            F += tree.predict(X)
        return self

    def decision(self, X):
        X = np.asarray(X, dtype=np.float64)
        F = np.full(X.shape[0], self.base_score)
        for t in self.trees:
            F += t.predict(X)
        return F

    def score(self, X):
        return sigmoid(self.decision(X))

    def to_dict(self):
        return {"n_rounds": self.n_rounds, "max_depth": self.max_depth,
                "learning_rate": self.learning_rate, "reg_lambda": self.reg_lambda,
                "min_child_weight": self.min_child_weight, "base_score": self.base_score,
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["n_rounds"], d["max_depth"], d["learning_rate"], d["reg_lambda"],
                   d["min_child_weight"], d["base_score"],
                   [Tree.from_dict(t) for t in d["trees"]])
