"""Binary CART with Gini impurity, and a bagged random forest built on it."""

from __future__ import annotations

import math

import numpy as np


class DecisionTree:
    """Binary classification tree over numeric features.

    Nodes are stored in flat arrays. A split sends ``x <= threshold`` left.
    Split candidates are midpoints between consecutive distinct values; ties in
    impurity go to the lowest feature index, then the lowest threshold.
    """

    def __init__(self, max_depth=None, min_samples_leaf=1, max_features=None, rng=None):
        if min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        self.max_depth = max_depth
        self.min_samples_leaf = int(min_samples_leaf)
        self.max_features = max_features
        self.rng = rng

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        n, d = X.shape
        self.n_features_ = d
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(idx):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(float(y[idx].mean()))
            return len(value) - 1

        root = new_node(np.arange(n))
        stack = [(root, np.arange(n), 0)]
        while stack:
            node, idx, depth = stack.pop()
            p = value[node]
            if p in (0.0, 1.0) or len(idx) < 2 * self.min_samples_leaf:
                continue
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            split = self._best_split(X, y, idx)
            if split is None:
                continue
            f, thr = split
            mask = X[idx, f] <= thr
            li, ri = idx[mask], idx[~mask]
            feature[node], threshold[node] = f, thr
            left[node], right[node] = new_node(li), new_node(ri)
            # depth-first, left subtree expanded first
            stack.append((right[node], ri, depth + 1))
            stack.append((left[node], li, depth + 1))

        self.feature_ = np.array(feature, dtype=int)
        self.threshold_ = np.array(threshold, dtype=float)
        self.left_ = np.array(left, dtype=int)
        self.right_ = np.array(right, dtype=int)
        self.value_ = np.array(value, dtype=float)
        return self

    def _candidate_features(self) -> np.ndarray:
        d = self.n_features_
        k = d if self.max_features is None else min(d, int(self.max_features))
        if k >= d and self.rng is None:
            return np.arange(d)
        return np.sort(self.rng.choice(d, size=k, replace=False))

    def _best_split(self, X, y, idx):
        feats = self._candidate_features()
        xn = X[np.ix_(idx, feats)]
        order = np.argsort(xn, axis=0, kind="stable")
        xs = np.take_along_axis(xn, order, axis=0)
        ys = y[idx][order]
        n = len(idx)
        left_pos = np.cumsum(ys, axis=0)[:-1]
        total_pos = ys[:, 0].sum()
        n_left = np.arange(1, n, dtype=float)[:, None]
        n_right = n - n_left
        right_pos = total_pos - left_pos
        # n * weighted gini = 2*lp*(nl-lp)/nl + 2*rp*(nr-rp)/nr
        impurity = 2 * left_pos * (n_left - left_pos) / n_left + 2 * right_pos * (n_right - right_pos) / n_right
        valid = (xs[:-1] < xs[1:]) & (n_left >= self.min_samples_leaf) & (n_right >= self.min_samples_leaf)
        if not valid.any():
            return None
        impurity = np.where(valid, impurity, np.inf)
        flat = int(np.argmin(impurity.T))
        j, i = divmod(flat, n - 1)
        lo, hi = xs[i, j], xs[i + 1, j]
        thr = lo + (hi - lo) / 2
        if not lo <= thr < hi:
            thr = lo
        return int(feats[j]), float(thr)

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=int)
        rows = np.arange(X.shape[0])
        while True:
            internal = self.feature_[node] >= 0
            if not internal.any():
                return node
            r, nd = rows[internal], node[internal]
            go_left = X[r, self.feature_[nd]] <= self.threshold_[nd]
            node[internal] = np.where(go_left, self.left_[nd], self.right_[nd])

    def predict_proba(self, X) -> np.ndarray:
        return self.value_[self.apply(X)]

    @property
    def depth(self) -> int:
        depth = np.zeros(len(self.value_), dtype=int)
        for node in range(len(self.value_)):
            if self.feature_[node] >= 0:
                depth[self.left_[node]] = depth[self.right_[node]] = depth[node] + 1
        return int(depth.max())


class RandomForest:
    """Bagged CART trees with a random ``ceil(sqrt(d))`` feature subset per split."""

    def __init__(self, n_trees=100, max_depth=None, min_samples_leaf=1,
                 max_features="sqrt", bootstrap=True, seed=0):
        self.n_trees = int(n_trees)
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y)
        n, d = X.shape
        if self.max_features == "sqrt":
            k = math.ceil(math.sqrt(d))
        elif self.max_features is None:
            k = d
        else:
            k = int(self.max_features)
        rng = np.random.default_rng(self.seed)
        self.trees_ = []
        for _ in range(self.n_trees):
            idx = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            tree = DecisionTree(self.max_depth, self.min_samples_leaf, k, rng)
            self.trees_.append(tree.fit(X[idx], y[idx]))
        return self

    def predict_proba(self, X) -> np.ndarray:
        return np.mean([t.predict_proba(X) for t in self.trees_], axis=0)
