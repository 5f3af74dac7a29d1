"""From-scratch base classifiers composed by the ensemble strategies:
greedy CART decision trees (Gini), full-batch gradient-descent logistic
regression, and a linear SVM trained by subgradient descent with Platt
scaling for probability output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import FeatureSet

#: Every base-learner hyperparameter the ensembles rely on, in one block,
#: so reproduction sweeps only need to touch these values.
LEARNER_DEFAULTS = {
    "tree": dict(max_depth=16, min_samples_leaf=2),
    "logreg": dict(l2=1e-4, epochs=400, lr=0.5),
    "svm": dict(c=1.0, epochs=500, lr=0.1),
    "platt": dict(l2=1e-6, epochs=300, lr=0.5),
}


# ---------------------------------------------------------------------------
# decision tree


@dataclass
class DecisionTree:
    """CART tree in flat arrays. ``feature[i] < 0`` marks node i as a leaf;
    internal nodes route x[feature] <= threshold to ``left``."""

    feature: np.ndarray       # (nodes,) int, -1 for leaves
    threshold: np.ndarray     # (nodes,) float
    left: np.ndarray          # (nodes,) int child index, -1 for leaves
    right: np.ndarray
    class_counts: np.ndarray  # (nodes, 2) training label counts per node
    max_depth: int | None
    min_samples_leaf: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DecisionTree):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("feature", "threshold", "left", "right", "class_counts")
        )


def _gini_times_n(n0, n1):
    # n * gini([n0, n1]) = n - (n0^2 + n1^2) / n
    n = n0 + n1
    return n - (n0 * n0 + n1 * n1) / n


def _best_split(X, y, idx, feats, min_leaf):
    """Best (feature, threshold) over candidate features, or None.

    Minimizes weighted Gini impurity; candidate thresholds are midpoints
    between consecutive distinct sorted values. Ties break to the lowest
    feature index (``feats`` must be ascending), then the lowest threshold.
    """
    n = idx.size
    sub = X[np.ix_(idx, feats)]
    order = np.argsort(sub, axis=0, kind="stable")
    sx = np.take_along_axis(sub, order, axis=0)
    sy = y[idx][order]

    cum1 = np.cumsum(sy, axis=0, dtype=np.float64)
    total1 = cum1[-1]
    left_n = np.arange(1, n, dtype=np.float64)[:, None]
    left1 = cum1[:-1]
    right_n = n - left_n
    right1 = total1[None, :] - left1
    cost = _gini_times_n(left_n - left1, left1) + _gini_times_n(right_n - right1, right1)
    valid = (sx[1:] > sx[:-1]) & (left_n >= min_leaf) & (right_n >= min_leaf)
    cost[~valid] = np.inf

    col_pos = np.argmin(cost, axis=0)
    col_cost = cost[col_pos, np.arange(len(feats))]
    c = int(np.argmin(col_cost))
    if not np.isfinite(col_cost[c]):
        return None
    pos = int(col_pos[c])
    lo, hi = sx[pos, c], sx[pos + 1, c]
    threshold = (lo + hi) / 2.0
    if threshold >= hi:  # midpoint rounded up to hi; fall back so hi routes right
        threshold = lo
    return int(feats[c]), float(threshold), float(col_cost[c] / n)


def tree_fit(
    train: FeatureSet,
    max_depth: int | None = LEARNER_DEFAULTS["tree"]["max_depth"],
    min_samples_leaf: int = LEARNER_DEFAULTS["tree"]["min_samples_leaf"],
    features_per_split: int | None = None,
    rng: np.random.Generator | None = None,
) -> DecisionTree:
    """Greedy CART fit. ``features_per_split=None`` considers every feature;
    otherwise each node draws that many candidates from ``rng``.

    A node is split whenever it is impure and a valid split exists, even at
    zero Gini gain (needed to untangle XOR-like label patterns), so with
    unlimited depth and min_samples_leaf=1 any consistent dataset is fitted
    exactly.
    """
    if len(train) == 0:
        raise ValueError("cannot fit a tree on an empty set")
    if features_per_split is not None and rng is None:
        raise ValueError("features_per_split requires an rng")
    X, y = train.features, train.labels
    d = train.dim

    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        i = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(np.bincount(y[idx], minlength=2))
        return i

    root_idx = np.arange(len(train), dtype=np.intp)
    stack = [(new_node(root_idx), root_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        c = counts[node]
        pure = c[0] == 0 or c[1] == 0
        depth_ok = max_depth is None or depth < max_depth
        if pure or not depth_ok or idx.size < 2 * min_samples_leaf:
            continue
        if features_per_split is None or features_per_split >= d:
            feats = np.arange(d)
        else:
            feats = np.sort(rng.choice(d, size=features_per_split, replace=False))
        found = _best_split(X, y, idx, feats, min_samples_leaf)
        if found is None:
            continue
        f, t, _ = found
        go_left = X[idx, f] <= t
        feature[node] = f
        threshold[node] = t
        left_idx, right_idx = idx[go_left], idx[~go_left]
        left[node] = new_node(left_idx)
        right[node] = new_node(right_idx)
        stack.append((right[node], right_idx, depth + 1))
        stack.append((left[node], left_idx, depth + 1))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        class_counts=np.stack(counts).astype(np.int64),
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
    )


def _leaf_indices(tree: DecisionTree, X: np.ndarray) -> np.ndarray:
    node = np.zeros(X.shape[0], dtype=np.int64)
    while True:
        f = tree.feature[node]
        active = np.flatnonzero(f >= 0)
        if active.size == 0:
            return node
        cur = node[active]
        go_left = X[active, f[active]] <= tree.threshold[cur]
        node[active] = np.where(go_left, tree.left[cur], tree.right[cur])


def tree_predict_proba(tree: DecisionTree, x: np.ndarray) -> np.ndarray:
    """Leaf class frequencies for one input vector."""
    return tree_predict_proba_batch(tree, np.asarray(x, dtype=np.float64)[None, :])[0]


def tree_predict_proba_batch(tree: DecisionTree, X: np.ndarray) -> np.ndarray:
    leaves = _leaf_indices(tree, X)
    c = tree.class_counts[leaves].astype(np.float64)
    return c / c.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# logistic regression


@dataclass
class LogisticRegression:
    weights: np.ndarray
    bias: float
    l2: float


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _logloss_grad(w, b, X, y, l2):
    """Gradient of mean log loss + (l2/2)||w||^2 (bias unregularized)."""
    p = _sigmoid(X @ w + b)
    err = p - y
    gw = X.T @ err / len(y) + l2 * w
    gb = float(err.mean())
    return gw, gb


def _fit_logistic_raw(X, y, l2, epochs, lr):
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(epochs):
        gw, gb = _logloss_grad(w, b, X, y, l2)
        w = w - lr * gw
        b = b - lr * gb
    return w, b


def logreg_fit(
    train: FeatureSet,
    l2: float = LEARNER_DEFAULTS["logreg"]["l2"],
    epochs: int = LEARNER_DEFAULTS["logreg"]["epochs"],
    lr: float = LEARNER_DEFAULTS["logreg"]["lr"],
    seed: int = 0,
) -> LogisticRegression:
    """Full-batch gradient descent from zero init; deterministic (the seed
    is accepted for interface uniformity but full-batch GD draws nothing)."""
    if len(np.unique(train.labels)) < 2:
        raise ValueError("logistic regression needs both classes present")
    w, b = _fit_logistic_raw(train.features, train.labels.astype(np.float64), l2, epochs, lr)
    return LogisticRegression(weights=w, bias=b, l2=l2)


def logreg_predict_proba(model: LogisticRegression, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise ValueError(f"dim mismatch: x {x.shape} vs weights {model.weights.shape}")
    p1 = float(_sigmoid(np.array([x @ model.weights + model.bias]))[0])
    return np.array([1.0 - p1, p1])


def logreg_proba_batch(model: LogisticRegression, X: np.ndarray) -> np.ndarray:
    if X.shape[1] != model.weights.shape[0]:
        raise ValueError(f"dim mismatch: X {X.shape} vs weights {model.weights.shape}")
    p1 = _sigmoid(X @ model.weights + model.bias)
    return np.column_stack([1.0 - p1, p1])


# ---------------------------------------------------------------------------
# linear SVM with Platt scaling


@dataclass
class LinearSvm:
    weights: np.ndarray
    bias: float
    c: float
    platt_a: float
    platt_b: float


def svm_fit(
    train: FeatureSet,
    c: float = LEARNER_DEFAULTS["svm"]["c"],
    epochs: int = LEARNER_DEFAULTS["svm"]["epochs"],
    lr: float = LEARNER_DEFAULTS["svm"]["lr"],
    seed: int = 0,
) -> LinearSvm:
    """Full-batch subgradient descent on the scaled hinge objective
    lambda/2 ||w||^2 + mean(hinge), lambda = 1/(c*N) (same minimizer as
    0.5||w||^2 + c*sum(hinge)); then Platt coefficients are fitted by
    logistic regression on the training decision values. Deterministic;
    points already at margin >= 1 contribute nothing to the subgradient.
    """
    if len(np.unique(train.labels)) < 2:
        raise ValueError("SVM needs both classes present")
    X = train.features
    y_pm = 2.0 * train.labels - 1.0
    n = len(train)
    lam = 1.0 / (c * n)
    w = np.zeros(train.dim)
    b = 0.0
    for _ in range(epochs):
        margins = y_pm * (X @ w + b)
        viol = margins < 1.0
        gw = lam * w - (X[viol].T @ y_pm[viol]) / n
        gb = -float(y_pm[viol].sum()) / n
        w = w - lr * gw
        b = b - lr * gb
    scores = X @ w + b
    pw, pb = _fit_logistic_raw(
        scores[:, None], train.labels.astype(np.float64), **LEARNER_DEFAULTS["platt"]
    )
    return LinearSvm(weights=w, bias=b, c=c, platt_a=-float(pw[0]), platt_b=-pb)


def svm_decision(model: LinearSvm, X: np.ndarray) -> np.ndarray:
    return X @ model.weights + model.bias


def svm_predict_proba(model: LinearSvm, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.weights.shape:
        raise ValueError(f"dim mismatch: x {x.shape} vs weights {model.weights.shape}")
    return svm_proba_batch(model, x[None, :])[0]


def svm_proba_batch(model: LinearSvm, X: np.ndarray) -> np.ndarray:
    if X.shape[1] != model.weights.shape[0]:
        raise ValueError(f"dim mismatch: X {X.shape} vs weights {model.weights.shape}")
    s = svm_decision(model, X)
    p1 = _sigmoid(-(model.platt_a * s + model.platt_b))
    return np.column_stack([1.0 - p1, p1])
