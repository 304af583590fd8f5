"""Soft-margin RBF support vector machine trained by SMO.

Working pairs are chosen with second-order information (maximal violating
``i``, then the ``j`` giving the largest guaranteed decrease of the dual), and
the two-variable subproblem is solved and clipped in closed form.
"""

from dataclasses import dataclass

import numpy as np

from .boosting import sigmoid

TAU = 1e-12
PRECOMPUTE_LIMIT = 8000


class _Kernel:
    def __init__(self, X, gamma):
        self.X = X
        self.gamma = gamma
        self.sq = np.einsum("ij,ij->i", X, X)
        n = X.shape[0]
        self.full = None
        self.cache = {}
        if n <= PRECOMPUTE_LIMIT:
            G = X @ X.T
            D = self.sq[:, None] + self.sq[None, :] - 2.0 * G
            np.maximum(D, 0.0, out=D)
            D *= -gamma
            self.full = np.exp(D, out=D)

    def column(self, i):
        if self.full is not None:
            return self.full[:, i]
        col = self.cache.get(i)
        if col is None:
            d = self.sq + self.sq[i] - 2.0 * (self.X @ self.X[i])
            col = np.exp(-self.gamma * np.maximum(d, 0.0))
            if len(self.cache) > 512:
                self.cache.pop(next(iter(self.cache)))
            self.cache[i] = col
        return col


def rbf(A, B, gamma):
    d = (np.einsum("ij,ij->i", A, A)[:, None] + np.einsum("ij,ij->i", B, B)[None, :]
         - 2.0 * A @ B.T)
    return np.exp(-gamma * np.maximum(d, 0.0))


@dataclass
class SVM:
    C: float = 1.0
    gamma: float = None  # None -> 1 / n_features
    tol: float = 1e-3
    max_iter: int = None
    mean: np.ndarray = None
    scale: np.ndarray = None
    support: np.ndarray = None
    coef: np.ndarray = None  # alpha_i * y_i for support vectors
    rho: float = 0.0
    n_iter: int = 0

    def _standardize(self, X):
        return (X - self.mean) / self.scale

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        s = np.where(np.asarray(y) == 1, 1.0, -1.0)
        n, d = X.shape
        self.mean = X.mean(axis=0)
        sd = X.std(axis=0)
        self.scale = np.where(sd > 0, sd, 1.0)
        Z = self._standardize(X)
        gamma = self.gamma if self.gamma is not None else 1.0 / d
        self.gamma = float(gamma)
        K = _Kernel(Z, gamma)
        diag = np.ones(n)  # RBF kernel has unit diagonal
        C = self.C
        alpha = np.zeros(n)
        grad = -np.ones(n)  # gradient of 1/2 a'Qa - e'a
        max_iter = self.max_iter or max(10_000_000, 100 * n)

        it = 0
        while it < max_iter:
            up = ((s > 0) & (alpha < C)) | ((s < 0) & (alpha > 0))
            low = ((s > 0) & (alpha > 0)) | ((s < 0) & (alpha < C))
            v = -s * grad
            if not up.any() or not low.any():
                break
            vu = np.where(up, v, -np.inf)
            i = int(np.argmax(vu))
            gmax = vu[i]
            gmin = np.min(np.where(low, v, np.inf))
            if gmax - gmin < self.tol:
                break
            Ki = K.column(i)
            b = gmax - v
            cand = low & (b > 0)
            a = diag[i] + diag - 2.0 * Ki
            a = np.where(a > 0, a, TAU)
            obj = np.where(cand, -(b * b) / a, np.inf)
            j = int(np.argmin(obj))
            if not np.isfinite(obj[j]):
                break
            Kj = K.column(j)
            self._update(i, j, s, alpha, grad, Ki, Kj, C)
            it += 1
        self.n_iter = it

        free = (alpha > 0) & (alpha < C)
        sg = s * grad
        if free.any():
            rho = float(sg[free].mean())
        else:
            at_c, at_0 = alpha >= C, alpha <= 0
            ub_mask = ((s < 0) & at_c) | ((s > 0) & at_0)
            lb_mask = ((s > 0) & at_c) | ((s < 0) & at_0)
            ub = np.min(sg[ub_mask], initial=np.inf)
            lb = np.max(sg[lb_mask], initial=-np.inf)
            if np.isfinite(ub) and np.isfinite(lb):
                rho = float((ub + lb) / 2.0)
            else:
                rho = float(ub if np.isfinite(ub) else lb)
        sv = alpha > 0
        self.support = Z[sv]
        self.coef = alpha[sv] * s[sv]
        self.rho = rho
        return self

    @staticmethod
    def _update(i, j, s, alpha, grad, Ki, Kj, C):
        yi, yj = s[i], s[j]
        old_i, old_j = alpha[i], alpha[j]
        Kij = Ki[j]
        if yi != yj:
            quad = max(2.0 - 2.0 * Kij, TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            ai, aj = alpha[i] + delta, alpha[j] + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = max(2.0 - 2.0 * Kij, TAU)
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            ai, aj = alpha[i] - delta, alpha[j] + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        di, dj = ai - old_i, aj - old_j
        # Q[:, k] = s * s[k] * K[:, k]
        grad += s * (yi * di * Ki + yj * dj * Kj)

    def decision(self, X):
        Z = self._standardize(np.asarray(X, dtype=np.float64))
        if self.support is None or len(self.coef) == 0:
            return np.full(Z.shape[0], -self.rho)
        out = np.empty(Z.shape[0])
        for s in range(0, Z.shape[0], 2048):
            out[s:s + 2048] = rbf(Z[s:s + 2048], self.support, self.gamma) @ self.coef
        return out - self.rho

    def score(self, X):
        return sigmoid(self.decision(X))

    def to_dict(self):
        return {"C": self.C, "gamma": self.gamma, "tol": self.tol,
                "mean": self.mean.tolist(), "scale": self.scale.tolist(),
                "support": self.support.tolist(), "coef": self.coef.tolist(),
                "rho": self.rho, "n_iter": self.n_iter}

    @classmethod
    def from_dict(cls, d):
        m = cls(d["C"], d["gamma"], d["tol"])
        m.mean = np.array(d["mean"])
        m.scale = np.array(d["scale"])
        m.support = np.array(d["support"], dtype=np.float64).reshape(-1, len(m.mean))
        m.coef = np.array(d["coef"])
        m.rho = d["rho"]
        m.n_iter = d["n_iter"]
        return m
