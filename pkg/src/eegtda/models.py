"""From-scratch binary classifiers: LR, linear SVM, CART, random forest, MLP.

All models share fit(X, y) / predict(X) / decision_scores(X) with y in {0, 1}
and are deterministic given their seed. They are intentionally dependency-free
(numpy only) with fixed, documented hyperparameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, InputError


def _check_xy(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or len(x) != len(y):
        raise InputError("X must be 2-D and aligned with y")
    if not np.all(np.isfinite(x)):
        raise InputError("non-finite features")
    if set(np.unique(y)) - {0, 1}:
        raise InputError("labels must be 0/1")
    if len(np.unique(y)) < 2:
        raise InputError("training set contains a single class")
    return x, y.astype(np.int64)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class LogisticRegressionGD:
    """L2-regularized logistic regression, full-batch gradient descent."""

    learning_rate: float = 0.5
    iters: int = 2000
    l2: float = 1e-3
    weights: Optional[np.ndarray] = None
    bias: float = 0.0

    def fit(self, x, y):
        x, y = _check_xy(x, y)
        n, p = x.shape
        w = np.zeros(p)
        b = 0.0
        for _ in range(self.iters):
            z = x @ w + b
            err = _sigmoid(z) - y
            grad_w = x.T @ err / n + self.l2 * w
            grad_b = err.mean()
            w -= self.learning_rate * grad_w
            b -= self.learning_rate * grad_b
        self.weights, self.bias = w, b
        return self

    def decision_scores(self, x):
        return np.asarray(x, dtype=np.float64) @ self.weights + self.bias

    def predict(self, x):
        return (self.decision_scores(x) >= 0).astype(np.int64)


@dataclass
class LinearSVM:
    """Soft-margin linear SVM via full-batch subgradient descent on hinge loss."""

    l2: float = 1e-2
    learning_rate: float = 0.1
    iters: int = 2000
    weights: Optional[np.ndarray] = None
    bias: float = 0.0

    def fit(self, x, y):
        x, y = _check_xy(x, y)
        n, p = x.shape
        s = 2.0 * y - 1.0  # {-1, +1}
        w = np.zeros(p)
        b = 0.0
        for t in range(1, self.iters + 1):
            lr = self.learning_rate / (1.0 + 1e-3 * t)
            margin = s * (x @ w + b)
            viol = margin < 1.0
            grad_w = self.l2 * w - (s[viol, None] * x[viol]).sum(axis=0) / n
            grad_b = -s[viol].sum() / n
            w -= lr * grad_w
            b -= lr * grad_b
        self.weights, self.bias = w, b
        return self

    def decision_scores(self, x):
        return np.asarray(x, dtype=np.float64) @ self.weights + self.bias

    def predict(self, x):
        return (self.decision_scores(x) >= 0).astype(np.int64)


class _TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "prob")

    def __init__(self, prob):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.prob = prob


def _gini_split(values: np.ndarray, labels: np.ndarray):
    """Best threshold for one feature: (weighted_gini, threshold) or None."""
    order = np.argsort(values, kind="stable")
    v, lab = values[order], labels[order]
    n = len(v)
    ones_left = np.cumsum(lab)[:-1]
    n_left = np.arange(1, n)
    n_right = n - n_left
    ones_right = ones_left[-1] + lab[-1] - ones_left

    p1l = ones_left / n_left
    p1r = ones_right / n_right
    gini = (n_left * 2 * p1l * (1 - p1l) + n_right * 2 * p1r * (1 - p1r)) / n

    valid = v[1:] > v[:-1]  # can only split between distinct values
    if not valid.any():
        return None
    gini = np.where(valid, gini, np.inf)
    best = int(np.argmin(gini))
    return float(gini[best]), float((v[best] + v[best + 1]) / 2.0)


class DecisionTree:
    """CART with Gini impurity and exact threshold search."""

    def __init__(self, max_depth: int = 10, min_samples_split: int = 2,
                 max_features: Optional[int] = None, seed: int = 0):
        if max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.seed = seed
        self.root: Optional[_TreeNode] = None

    def fit(self, x, y):
        x, y = _check_xy(x, y)
        self._rng = np.random.default_rng(self.seed)
        self.root = self._build(x, y, depth=0)
        del self._rng
        return self

    def _build(self, x, y, depth):
        node = _TreeNode(prob=float(y.mean()))
        if (depth >= self.max_depth or len(y) < self.min_samples_split
                or y.min() == y.max()):
            return node
        p = x.shape[1]
        if self.max_features is not None and self.max_features < p:
            feats = np.sort(self._rng.choice(p, self.max_features, replace=False))
        else:
            feats = np.arange(p)
        best = None
        for f in feats:
            res = _gini_split(x[:, f], y)
            if res is not None and (best is None or res[0] < best[0]):
                best = (res[0], int(f), res[1])
        if best is None:
            return node
        _, node.feature, node.threshold = best
        mask = x[:, node.feature] <= node.threshold
        node.left = self._build(x[mask], y[mask], depth + 1)
        node.right = self._build(x[~mask], y[~mask], depth + 1)
        return node

    def _prob_one(self, row):
        node = self.root
        while node.left is not None:
            node = node.left if row[node.feature] <= node.threshold else node.right
        return node.prob

    def predict_proba(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.array([self._prob_one(r) for r in x])

    def decision_scores(self, x):
        return self.predict_proba(x) - 0.5

    def predict(self, x):
        return (self.predict_proba(x) >= 0.5).astype(np.int64)


class RandomForest:
    """Bagged CART ensemble, sqrt(p) features per split, majority vote."""

    def __init__(self, n_trees: int = 100, max_depth: int = 10, seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.seed = seed
        self.trees: list[DecisionTree] = []

    def fit(self, x, y):
        x, y = _check_xy(x, y)
        n, p = x.shape
        max_features = max(1, int(np.sqrt(p)))
        boot_rng = np.random.default_rng([self.seed, 101])
        self.trees = []
        for t in range(self.n_trees):
            idx = boot_rng.integers(0, n, size=n)
            while len(np.unique(y[idx])) < 2:  # keep both classes in the bag
                idx = boot_rng.integers(0, n, size=n)
            tree = DecisionTree(max_depth=self.max_depth,
                                max_features=max_features,
                                seed=self.seed * 100003 + t)
            tree.fit(x[idx], y[idx])
            self.trees.append(tree)
        return self

    def predict_proba(self, x):
        votes = np.mean([t.predict_proba(x) for t in self.trees], axis=0)
        return votes

    def decision_scores(self, x):
        return self.predict_proba(x) - 0.5

    def predict(self, x):
        return (self.predict_proba(x) >= 0.5).astype(np.int64)


class MLP:
    """One hidden layer (tanh), sigmoid output, cross-entropy, full-batch GD."""

    def __init__(self, hidden: int = 32, learning_rate: float = 0.2,
                 iters: int = 2000, l2: float = 1e-4, seed: int = 0):
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.iters = iters
        self.l2 = l2
        self.seed = seed
        self.params: Optional[np.ndarray] = None
        self._p = None

    def _shapes(self, p):
        return [(p, self.hidden), (self.hidden,), (self.hidden, 1), (1,)]

    def _unpack(self, flat, p):
        out, ofs = [], 0
        for shape in self._shapes(p):
            size = int(np.prod(shape))
            out.append(flat[ofs:ofs + size].reshape(shape))
            ofs += size
        return out

    def init_params(self, p: int) -> np.ndarray:
        rng = np.random.default_rng([self.seed, 211])
        w1 = rng.standard_normal((p, self.hidden)) / np.sqrt(p)
        w2 = rng.standard_normal((self.hidden, 1)) / np.sqrt(self.hidden)
        return np.concatenate([w1.ravel(), np.zeros(self.hidden),
                               w2.ravel(), np.zeros(1)])

    def loss_and_grad(self, flat: np.ndarray, x: np.ndarray,
                      y: np.ndarray) -> tuple[float, np.ndarray]:
        """Cross-entropy + L2 loss and its analytic gradient (flattened)."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n = len(x)
        w1, b1, w2, b2 = self._unpack(flat, x.shape[1])
        h = np.tanh(x @ w1 + b1)
        z = (h @ w2).ravel() + b2[0]
        prob = _sigmoid(z)
        eps = 1e-12
        loss = -np.mean(y * np.log(prob + eps) + (1 - y) * np.log(1 - prob + eps))
        loss += 0.5 * self.l2 * (np.sum(w1 ** 2) + np.sum(w2 ** 2))

        dz = (prob - y)[:, None] / n
        gw2 = h.T @ dz + self.l2 * w2
        gb2 = dz.sum(axis=0)
        dh = dz @ w2.T * (1 - h ** 2)
        gw1 = x.T @ dh + self.l2 * w1
        gb1 = dh.sum(axis=0)
        grad = np.concatenate([gw1.ravel(), gb1, gw2.ravel(), gb2])
        return float(loss), grad

    def fit(self, x, y):
        x, y = _check_xy(x, y)
        self._p = x.shape[1]
        flat = self.init_params(self._p)
        for _ in range(self.iters):
            _, grad = self.loss_and_grad(flat, x, y)
            flat -= self.learning_rate * grad
        self.params = flat
        return self

    def decision_scores(self, x):
        x = np.asarray(x, dtype=np.float64)
        w1, b1, w2, b2 = self._unpack(self.params, self._p)
        h = np.tanh(x @ w1 + b1)
        return (h @ w2).ravel() + b2[0]

    def predict(self, x):
        return (self.decision_scores(x) >= 0).astype(np.int64)
