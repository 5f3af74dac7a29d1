"""Seven decision-level ensemble strategies under one fit/predict contract:
bagging (random forest), boosting (gradient-boosted trees), soft voting,
cascading, blending, dual bagging-and-boosting, and a dynamic ensemble
with a decision threshold on averaged probabilities.

Checkpoints use a tagged envelope: magic b"ENSM", version u32 = 1, kind
tag u8 (index into ENSEMBLE_KINDS), then a u64-length-prefixed pickle of
the fitted members and config.
"""

from __future__ import annotations

import math
import pickle
import struct
from dataclasses import asdict, dataclass, replace

import numpy as np

from .base_learners import (
    LEARNER_DEFAULTS,
    DecisionTree,
    LinearSvm,
    LogisticRegression,
    _leaf_indices,
    _sigmoid,
    logreg_fit,
    logreg_proba_batch,
    svm_fit,
    svm_proba_batch,
    tree_fit,
    tree_predict_proba_batch,
)
from .data import FeatureSet, stratified_split, SplitConfig
from .numeric import derive_seed, spawn_rng

ENSEMBLE_KINDS = ("bagging", "boosting", "voting", "cascading", "blending", "dual_bb", "dynamic")

ENSM_MAGIC = b"ENSM"
ENSM_VERSION = 1

_BAGGING_MIN_LEAF = 1
_BOOSTING_MIN_LEAF = 5
_HESS_EPS = 1e-12  # guards Newton leaf values in near-pure leaves


@dataclass(frozen=True)
class EnsembleConfig:
    n_trees: int = 100
    tree_depth: int | None = None     # None: 12 for bagging trees, 3 for boosting trees
    boosting_rounds: int = 100        # 0 is allowed: prior-only model
    shrinkage: float = 0.1
    blend_holdout: float = 0.3
    dynamic_threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.boosting_rounds < 0:
            raise ValueError("boosting_rounds must be >= 0")
        if not 0.0 < self.blend_holdout < 1.0:
            raise ValueError("blend_holdout must be in (0, 1)")
        if not 0.0 < self.dynamic_threshold < 1.0:
            raise ValueError("dynamic_threshold must be in (0, 1)")
        if self.shrinkage <= 0:
            raise ValueError("shrinkage must be positive")

    @property
    def bagging_depth(self) -> int:
        return 12 if self.tree_depth is None else self.tree_depth

    @property
    def boosting_depth(self) -> int:
        return 3 if self.tree_depth is None else self.tree_depth


@dataclass
class EnsembleModel:
    kind: str
    members: dict
    config: EnsembleConfig
    input_dim: int


# ---------------------------------------------------------------------------
# regression trees for gradient boosting


@dataclass
class RegressionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # Newton leaf value (meaningful at leaves)


def _best_sse_split(X, r, idx, min_leaf):
    """Threshold minimizing the residual sum of squares over all features."""
    n = idx.size
    sub = X[idx]
    order = np.argsort(sub, axis=0, kind="stable")
    sx = np.take_along_axis(sub, order, axis=0)
    sr = r[idx][order]

    csum = np.cumsum(sr, axis=0)
    total = csum[-1]
    left_n = np.arange(1, n, dtype=np.float64)[:, None]
    right_n = n - left_n
    left_sum = csum[:-1]
    right_sum = total[None, :] - left_sum
    # SSE = sum(r^2) - (L^2/nL + R^2/nR); the first term is split-independent
    score = -(left_sum ** 2 / left_n + right_sum ** 2 / right_n)
    valid = (sx[1:] > sx[:-1]) & (left_n >= min_leaf) & (right_n >= min_leaf)
    score[~valid] = np.inf

    col_pos = np.argmin(score, axis=0)
    col_score = score[col_pos, np.arange(X.shape[1])]
    c = int(np.argmin(col_score))
    if not np.isfinite(col_score[c]):
        return None
    pos = int(col_pos[c])
    lo, hi = sx[pos, c], sx[pos + 1, c]
    threshold = (lo + hi) / 2.0
    if threshold >= hi:
        threshold = lo
    return c, float(threshold)


def _regression_tree_fit(X, resid, hess, max_depth, min_leaf) -> RegressionTree:
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        i = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(resid[idx].sum() / (hess[idx].sum() + _HESS_EPS)))
        return i

    root_idx = np.arange(X.shape[0], dtype=np.intp)
    stack = [(new_node(root_idx), root_idx, 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth >= max_depth or idx.size < 2 * min_leaf:
            continue
        found = _best_sse_split(X, resid, idx, min_leaf)
        if found is None:
            continue
        f, t = found
        go_left = X[idx, f] <= t
        feature[node] = f
        threshold[node] = t
        left_idx, right_idx = idx[go_left], idx[~go_left]
        left[node] = new_node(left_idx)
        right[node] = new_node(right_idx)
        stack.append((right[node], right_idx, depth + 1))
        stack.append((left[node], left_idx, depth + 1))

    return RegressionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64),
    )


def _regression_tree_apply(tree: RegressionTree, X: np.ndarray) -> np.ndarray:
    return tree.value[_leaf_indices(tree, X)]


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


# ---------------------------------------------------------------------------
# fitting


def rf_fit(train: FeatureSet, cfg: EnsembleConfig) -> EnsembleModel:
    """Random forest: n_trees CART trees, each on its own bootstrap resample
    with ceil(sqrt(d)) feature candidates per split."""
    if len(train) == 0:
        raise ValueError("cannot fit on an empty training set")
    n = len(train)
    fps = min(math.ceil(math.sqrt(train.dim)), train.dim)
    trees = []
    for i in range(cfg.n_trees):
        rng = spawn_rng(cfg.seed, 2, i)
        boot = rng.integers(0, n, size=n)
        trees.append(
            tree_fit(
                train.take(boot),
                max_depth=cfg.bagging_depth,
                min_samples_leaf=_BAGGING_MIN_LEAF,
                features_per_split=fps,
                rng=rng,
            )
        )
    return EnsembleModel("bagging", {"trees": trees}, cfg, train.dim)


def gbm_fit(train: FeatureSet, cfg: EnsembleConfig) -> EnsembleModel:
    """Binary log-loss gradient boosting: start from the base-rate log-odds,
    then each round fits a regression tree to the residuals y - sigmoid(F)
    with Newton-step leaf values, added with shrinkage."""
    if len(train) == 0:
        raise ValueError("cannot fit on an empty training set")
    y = train.labels.astype(np.float64)
    if len(np.unique(train.labels)) < 2:
        raise ValueError("boosting needs both classes present")
    X = train.features
    p_hat = float(y.mean())
    f0 = math.log(p_hat / (1.0 - p_hat))
    F = np.full(len(y), f0)
    trees = []
    loss_trace = [_log_loss(y, _sigmoid(F))]
    for _ in range(cfg.boosting_rounds):
        p = _sigmoid(F)
        resid = y - p
        hess = p * (1.0 - p)
        tree = _regression_tree_fit(X, resid, hess, cfg.boosting_depth, _BOOSTING_MIN_LEAF)
        F = F + cfg.shrinkage * _regression_tree_apply(tree, X)
        trees.append(tree)
        loss_trace.append(_log_loss(y, _sigmoid(F)))
    members = {"f0": f0, "trees": trees, "shrinkage": cfg.shrinkage, "loss_trace": loss_trace}
    return EnsembleModel("boosting", members, cfg, train.dim)


def _augment_with_probs(fset: FeatureSet, probs: np.ndarray) -> FeatureSet:
    return FeatureSet(
        features=np.concatenate([fset.features, probs], axis=1),
        power_loss=fset.power_loss,
        labels=fset.labels,
        source_ids=list(fset.source_ids),
    )


def ensemble_fit(kind: str, train: FeatureSet, cfg: EnsembleConfig) -> EnsembleModel:
    """Fit any of the seven strategies; sub-models get hashed sub-seeds so
    every member is independently reproducible."""
    if kind not in ENSEMBLE_KINDS:
        raise ValueError(f"unknown ensemble kind {kind!r}")
    if len(train) == 0:
        raise ValueError("cannot fit on an empty training set")

    def sub_cfg(tag: int) -> EnsembleConfig:
        return replace(cfg, seed=derive_seed(cfg.seed, 7, tag))

    if kind == "bagging":
        return rf_fit(train, cfg)
    if kind == "boosting":
        return gbm_fit(train, cfg)
    if kind == "voting":
        members = {
            "logreg": logreg_fit(train),
            "forest": rf_fit(train, sub_cfg(0)),
            "svm": svm_fit(train),
        }
        return EnsembleModel(kind, members, cfg, train.dim)
    if kind == "cascading":
        forest = rf_fit(train, sub_cfg(0))
        augmented = _augment_with_probs(train, ensemble_predict_proba(forest, train))
        meta = logreg_fit(augmented)
        return EnsembleModel(kind, {"forest": forest, "meta": meta}, cfg, train.dim)
    if kind == "blending":
        base, holdout = stratified_split(
            train, SplitConfig(test_fraction=cfg.blend_holdout, seed=derive_seed(cfg.seed, 7, 9))
        )
        if len(np.unique(holdout.labels)) < 2 or len(np.unique(base.labels)) < 2:
            raise ValueError("blending holdout too small to contain both classes")
        forest = rf_fit(base, sub_cfg(0))
        lr = logreg_fit(base)
        meta_X = np.concatenate(
            [ensemble_predict_proba(forest, holdout), logreg_proba_batch(lr, holdout.features)],
            axis=1,
        )
        meta_set = FeatureSet(meta_X, holdout.power_loss, holdout.labels, list(holdout.source_ids))
        meta = logreg_fit(meta_set)
        members = {"forest": forest, "logreg": lr, "meta": meta}
        return EnsembleModel(kind, members, cfg, train.dim)
    if kind == "dual_bb":
        members = {"forest": rf_fit(train, sub_cfg(0)), "gbm": gbm_fit(train, sub_cfg(1))}
        return EnsembleModel(kind, members, cfg, train.dim)
    # dynamic: fixed member list, uniform averaging unless weights are set
    members = {
        "forest": rf_fit(train, sub_cfg(0)),
        "gbm": gbm_fit(train, sub_cfg(1)),
        "logreg": logreg_fit(train),
        "threshold": cfg.dynamic_threshold,
        "weights": None,
    }
    return EnsembleModel("dynamic", members, cfg, train.dim)


# ---------------------------------------------------------------------------
# prediction


def combine_mean(prob_blocks: list[np.ndarray], weights=None) -> np.ndarray:
    """(Weighted) elementwise mean of member probability matrices."""
    return np.average(np.stack(prob_blocks), axis=0, weights=weights)


def ensemble_predict_proba(model: EnsembleModel, fset: FeatureSet) -> np.ndarray:
    if fset.dim != model.input_dim:
        raise ValueError(f"data dim {fset.dim} != model input dim {model.input_dim}")
    X = fset.features
    kind = model.kind
    m = model.members
    if kind == "bagging":
        return combine_mean([tree_predict_proba_batch(t, X) for t in m["trees"]])
    if kind == "boosting":
        F = np.full(len(fset), m["f0"])
        for tree in m["trees"]:
            F += m["shrinkage"] * _regression_tree_apply(tree, X)
        p1 = _sigmoid(F)
        return np.column_stack([1.0 - p1, p1])
    if kind == "voting":
        return combine_mean([
            logreg_proba_batch(m["logreg"], X),
            ensemble_predict_proba(m["forest"], fset),
            svm_proba_batch(m["svm"], X),
        ])
    if kind == "cascading":
        augmented = np.concatenate([X, ensemble_predict_proba(m["forest"], fset)], axis=1)
        return logreg_proba_batch(m["meta"], augmented)
    if kind == "blending":
        meta_X = np.concatenate(
            [ensemble_predict_proba(m["forest"], fset), logreg_proba_batch(m["logreg"], X)],
            axis=1,
        )
        return logreg_proba_batch(m["meta"], meta_X)
    if kind == "dual_bb":
        return combine_mean([
            ensemble_predict_proba(m["forest"], fset),
            ensemble_predict_proba(m["gbm"], fset),
        ])
    if kind == "dynamic":
        blocks = [
            ensemble_predict_proba(m["forest"], fset),
            ensemble_predict_proba(m["gbm"], fset),
            logreg_proba_batch(m["logreg"], X),
        ]
        return combine_mean(blocks, weights=m.get("weights"))
    raise ValueError(f"unknown ensemble kind {kind!r}")


def decide_labels(probs: np.ndarray, kind: str, dynamic_threshold: float = 0.5) -> np.ndarray:
    """Dynamic ensembles threshold the soiled probability; every other
    method takes the argmax with ties to class 0."""
    probs = np.asarray(probs)
    if kind == "dynamic":
        return (probs[:, 1] >= dynamic_threshold).astype(np.int64)
    return (probs[:, 1] > probs[:, 0]).astype(np.int64)


# ---------------------------------------------------------------------------
# persistence
#
# The member blob is a pickle of a plain structure (dicts/lists/ndarrays/
# scalars) rebuilt by the encoders below rather than of the live objects:
# that keeps the bytes a pure function of the model's values, so identical
# models serialize identically regardless of how their object graphs were
# constructed (fit vs loaded).


def _encode_ctree(tree: DecisionTree) -> dict:
    return {
        "feature": tree.feature, "threshold": tree.threshold,
        "left": tree.left, "right": tree.right, "class_counts": tree.class_counts,
        "max_depth": tree.max_depth, "min_samples_leaf": tree.min_samples_leaf,
    }


def _decode_ctree(d: dict) -> DecisionTree:
    return DecisionTree(**d)


def _encode_rtree(tree: RegressionTree) -> dict:
    return {"feature": tree.feature, "threshold": tree.threshold,
            "left": tree.left, "right": tree.right, "value": tree.value}


def _encode_logreg(m: LogisticRegression) -> dict:
    return {"weights": m.weights, "bias": m.bias, "l2": m.l2}


def _encode_svm(m: LinearSvm) -> dict:
    return {"weights": m.weights, "bias": m.bias, "c": m.c,
            "platt_a": m.platt_a, "platt_b": m.platt_b}


def _encode_model(model: EnsembleModel) -> dict:
    m = model.members
    if model.kind == "bagging":
        members = {"trees": [_encode_ctree(t) for t in m["trees"]]}
    elif model.kind == "boosting":
        members = {"f0": m["f0"], "trees": [_encode_rtree(t) for t in m["trees"]],
                   "shrinkage": m["shrinkage"], "loss_trace": list(m["loss_trace"])}
    elif model.kind == "voting":
        members = {"logreg": _encode_logreg(m["logreg"]), "forest": _encode_model(m["forest"]),
                   "svm": _encode_svm(m["svm"])}
    elif model.kind == "cascading":
        members = {"forest": _encode_model(m["forest"]), "meta": _encode_logreg(m["meta"])}
    elif model.kind == "blending":
        members = {"forest": _encode_model(m["forest"]), "logreg": _encode_logreg(m["logreg"]),
                   "meta": _encode_logreg(m["meta"])}
    elif model.kind == "dual_bb":
        members = {"forest": _encode_model(m["forest"]), "gbm": _encode_model(m["gbm"])}
    else:
        members = {"forest": _encode_model(m["forest"]), "gbm": _encode_model(m["gbm"]),
                   "logreg": _encode_logreg(m["logreg"]), "threshold": m["threshold"],
                   "weights": m["weights"]}
    return {"kind": model.kind, "members": members,
            "config": asdict(model.config), "input_dim": model.input_dim}


def _decode_model(d: dict) -> EnsembleModel:
    kind = d["kind"]
    m = d["members"]
    if kind == "bagging":
        members = {"trees": [_decode_ctree(t) for t in m["trees"]]}
    elif kind == "boosting":
        members = {"f0": m["f0"], "trees": [RegressionTree(**t) for t in m["trees"]],
                   "shrinkage": m["shrinkage"], "loss_trace": list(m["loss_trace"])}
    elif kind == "voting":
        members = {"logreg": LogisticRegression(**m["logreg"]),
                   "forest": _decode_model(m["forest"]), "svm": LinearSvm(**m["svm"])}
    elif kind == "cascading":
        members = {"forest": _decode_model(m["forest"]),
                   "meta": LogisticRegression(**m["meta"])}
    elif kind == "blending":
        members = {"forest": _decode_model(m["forest"]),
                   "logreg": LogisticRegression(**m["logreg"]),
                   "meta": LogisticRegression(**m["meta"])}
    elif kind == "dual_bb":
        members = {"forest": _decode_model(m["forest"]), "gbm": _decode_model(m["gbm"])}
    else:
        members = {"forest": _decode_model(m["forest"]), "gbm": _decode_model(m["gbm"]),
                   "logreg": LogisticRegression(**m["logreg"]), "threshold": m["threshold"],
                   "weights": m["weights"]}
    return EnsembleModel(kind, members, EnsembleConfig(**d["config"]), d["input_dim"])


def save_ensemble(model: EnsembleModel, path) -> None:
    blob = pickle.dumps(_encode_model(model), protocol=4)
    with open(path, "wb") as fh:
        fh.write(ENSM_MAGIC)
        fh.write(struct.pack("<IB", ENSM_VERSION, ENSEMBLE_KINDS.index(model.kind)))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)


def load_ensemble(path) -> EnsembleModel:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != ENSM_MAGIC:
        raise ValueError(f"bad checkpoint magic {raw[:4]!r}")
    version, kind_tag = struct.unpack_from("<IB", raw, 4)
    if version != ENSM_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    (blob_len,) = struct.unpack_from("<Q", raw, 9)
    blob = raw[17: 17 + blob_len]
    if len(blob) != blob_len:
        raise ValueError("truncated checkpoint payload")
    payload = pickle.loads(blob)
    if payload["kind"] != ENSEMBLE_KINDS[kind_tag]:
        raise ValueError("checkpoint kind tag does not match payload")
    return _decode_model(payload)
