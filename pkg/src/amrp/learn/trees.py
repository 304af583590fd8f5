"""Histogram-based decision trees grown one level at a time.

Features are quantile-binned once per fit (at most 64 bins, stored as
uint8). A split "bin <= b" is stored with the real threshold ``edges[b]`` and
applied at prediction time as ``x < threshold``, which is equivalent on the
training data and well defined on new data.
"""

from dataclasses import dataclass

import numpy as np

MAX_BINS = 64


@dataclass
class Binner:
    edges: list

    @classmethod
    def fit(cls, X, max_bins=MAX_BINS):
        edges = []
        for col in np.asarray(X, dtype=np.float64).T:
            u = np.unique(col)
            if u.size <= max_bins:
                e = (u[:-1] + u[1:]) / 2.0
            else:
                q = np.quantile(col, np.linspace(0.0, 1.0, max_bins + 1)[1:-1])
                e = np.unique(q)
                # keep edges strictly inside the data range
                e = e[(e > u[0]) & (e <= u[-1])]
            edges.append(e)
        return cls(edges)

    @property
    def n_bins(self):
        return max((len(e) + 1 for e in self.edges), default=1)

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(X.shape, dtype=np.uint8)
        for j, e in enumerate(self.edges):
            out[:, j] = np.searchsorted(e, X[:, j], side="right")
        return out

    def threshold(self, feature, b):
        return float(self.edges[feature][b])


@dataclass
class Tree:
    feature: np.ndarray  # -1 for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X):
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            r, n, ff = rows[inner], node[inner], f[inner]
            go_left = X[r, ff] < self.threshold[n]
            node[inner] = np.where(go_left, self.left[n], self.right[n])

    def predict(self, X):
        return self.value[self.apply(X)]

    @property
    def depth(self):
        d = np.zeros(len(self.feature), dtype=np.int64)
        for i in range(len(self.feature)):
            if self.feature[i] >= 0:
                d[self.left[i]] = d[i] + 1
                d[self.right[i]] = d[i] + 1
        return int(d.max()) if d.size else 0

    def to_dict(self):
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "value": self.value.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["feature"], dtype=np.int64),
                   np.array(d["threshold"], dtype=np.float64),
                   np.array(d["left"], dtype=np.int64),
                   np.array(d["right"], dtype=np.int64),
                   np.array(d["value"], dtype=np.float64))


def gini_gain(L, T):
    """Weighted Gini decrease for left class sums ``L`` (2, ...) against totals ``T``."""
    l0, l1 = L[0], L[1]
    t0, t1 = T[0], T[1]
    r0, r1 = t0 - l0, t1 - l1
    nl, nr = l0 + l1, r0 + r1
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (l0 * l0 + l1 * l1) / nl + (r0 * r0 + r1 * r1) / nr \
            - (t0 * t0 + t1 * t1) / (t0 + t1)
    g[~((nl > 0) & (nr > 0))] = -np.inf
    return g


def newton_gain(L, T, lam=1.0, min_child_weight=1.0):
    """Second-order gain for left (grad, hess) sums (2, ...) against node totals."""
    gl, hl, gt, ht = L[0], L[1], T[0], T[1]
    gr, hr = gt - gl, ht - hl
    g = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - gt * gt / (ht + lam))
    g[~((hl >= min_child_weight) & (hr >= min_child_weight))] = -np.inf
    return g


def grow_tree(Xb, stats, binner, gain_fn, leaf_fn, max_depth=None, n_features=None,
              rng=None, min_gain=1e-12, splittable=None):
    """Grow one tree on binned rows ``Xb`` with per-row statistics ``stats``.

    ``gain_fn(left_sums, totals)`` scores every candidate split;
    ``leaf_fn(totals)`` maps node totals to leaf values. When ``n_features``
    is set, each node draws that many candidate features without replacement
    from ``rng``; if none of them separates the node, all features are tried.
    ``splittable(totals)`` marks nodes worth searching (e.g. impure ones).
    """
    n, d = Xb.shape
    k = stats.shape[1]
    Xb = Xb.astype(np.int64)

    feature, threshold, left, right, totals = [-1], [0.0], [-1], [-1], [None]
    node_of = np.zeros(n, dtype=np.int64)  # global node id per row, -1 once fixed
    frontier = np.array([0])
    depth = 0
    while frontier.size and (max_depth is None or depth < max_depth):
        local = np.full(len(feature), -1, dtype=np.int64)
        local[frontier] = np.arange(frontier.size)
        active = np.flatnonzero(node_of >= 0)
        ln = local[node_of[active]]
        m = frontier.size
        tot = np.stack([np.bincount(ln, weights=stats[active, c], minlength=m)
                        for c in range(k)], axis=1)
        for i, node in enumerate(frontier):
            totals[node] = tot[i]

        if n_features is None or n_features >= d:
            feats = np.broadcast_to(np.arange(d), (m, d))
        else:
            feats = np.argsort(rng.random((m, d)), axis=1)[:, :n_features]
        cand = np.ones(m, dtype=bool) if splittable is None else splittable(tot.T)
        best_gain = np.full(m, -np.inf)
        best_f = np.zeros(m, dtype=np.int64)
        best_b = np.zeros(m, dtype=np.int64)
        if cand.any():
            c_idx = np.flatnonzero(cand)
            sub = cand[ln]
            remap = np.full(m, -1)
            remap[c_idx] = np.arange(c_idx.size)
            g, f, b = _best(Xb, stats, active[sub], remap[ln[sub]], feats[c_idx],
                            tot[c_idx], binner, gain_fn)
            best_gain[c_idx], best_f[c_idx], best_b[c_idx] = g, f, b

        if n_features is not None and n_features < d:
            retry = np.flatnonzero(~np.isfinite(best_gain) & cand)
            if retry.size:
                sub = np.isin(ln, retry)
                remap = np.full(m, -1)
                remap[retry] = np.arange(retry.size)
                g2, f2, b2 = _best(Xb, stats, active[sub], remap[ln[sub]],
                                   np.broadcast_to(np.arange(d), (retry.size, d)),
                                   tot[retry], binner, gain_fn)
                best_gain[retry], best_f[retry], best_b[retry] = g2, f2, b2

        split = np.isfinite(best_gain) & (best_gain > min_gain)
        new_frontier = []
        child_of = np.full((m, 2), -1, dtype=np.int64)
        for i in np.flatnonzero(split):
            node = frontier[i]
            f, b = int(best_f[i]), int(best_b[i])
            feature[node] = f
            threshold[node] = binner.threshold(f, b)
            for side in range(2):
                child_of[i, side] = len(feature)
                feature.append(-1)
                threshold.append(0.0)
                left.append(-1)
                right.append(-1)
                totals.append(None)
            left[node], right[node] = child_of[i]
            new_frontier.extend(child_of[i])

        # route rows of split nodes; rows of finished nodes leave the pool
        is_split = split[ln]
        rows = active[is_split]
        lr = ln[is_split]
        go_right = Xb[rows, best_f[lr]] > best_b[lr]
        node_of[rows] = child_of[lr, go_right.astype(np.int64)]
        node_of[active[~is_split]] = -1
        frontier = np.array(new_frontier, dtype=np.int64)
        depth += 1

    if frontier.size:
        active = np.flatnonzero(node_of >= 0)
        local = np.full(len(feature), -1, dtype=np.int64)
        local[frontier] = np.arange(frontier.size)
        ln = local[node_of[active]]
        tot = np.stack([np.bincount(ln, weights=stats[active, c], minlength=frontier.size)
                        for c in range(k)], axis=1)
        for i, node in enumerate(frontier):
            totals[node] = tot[i]

    value = np.array([leaf_fn(t) if f < 0 else 0.0 for f, t in zip(feature, totals)])
    return Tree(np.array(feature, dtype=np.int64), np.array(threshold),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64), value)


def _best(Xb, stats, active, ln, feats, tot, binner, gain_fn):
    m, F = feats.shape
    nb = binner.n_bins
    n_edges = np.array([len(e) for e in binner.edges], dtype=np.int64)
    k = stats.shape[1]
    # one flat histogram over (node, candidate slot, bin)
    cols = feats[ln]  # (rows, F)
    keys = (ln[:, None] * F + np.arange(F)[None, :]) * nb + Xb[active[:, None], cols]
    keys = keys.ravel()
    size = m * F * nb
    hist = np.stack([np.bincount(keys, weights=np.repeat(stats[active, c], F), minlength=size)
                     for c in range(k)]).reshape(k, m, F, nb)
    left = np.ascontiguousarray(np.cumsum(hist, axis=3)[..., :-1])
    gain = gain_fn(left, tot.T[:, :, None, None])  # (m, F, nb-1)
    # a feature with fewer edges than nb-1 cannot split past its last edge
    gain = np.where(np.arange(nb - 1)[None, None, :] < n_edges[feats][:, :, None], gain, -np.inf)
    flat = gain.reshape(m, -1)
    if flat.shape[1] == 0:
        return np.full(m, -np.inf), np.zeros(m, dtype=np.int64), np.zeros(m, dtype=np.int64)
    idx = np.argmax(flat, axis=1)
    best = flat[np.arange(m), idx]
    slot, b = np.divmod(idx, nb - 1)
    return best, feats[np.arange(m), slot].astype(np.int64), b.astype(np.int64)
