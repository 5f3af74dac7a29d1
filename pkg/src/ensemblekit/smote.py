"""Synthetic minority oversampling: balance a training set by interpolating
new minority-class records between nearest minority neighbors.

Applied to the training split only; oversampling before the split would
leak synthetic neighbors of test points into training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import FeatureSet
from .numeric import make_rng


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")


def knn_indices(points: np.ndarray, query_index: int, k: int) -> np.ndarray:
    """Indices of the k Euclidean-nearest points to ``points[query_index]``,
    excluding the query itself; ties broken by lower index."""
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k > n - 1:
        raise ValueError(f"k={k} exceeds available neighbors ({n - 1})")
    d = np.linalg.norm(points - points[query_index], axis=1)
    d[query_index] = np.inf
    return np.argsort(d, kind="stable")[:k]


def _minority_neighbor_table(points: np.ndarray, k: int) -> np.ndarray:
    """(m, k) neighbor indices for every minority point, self excluded."""
    sq = np.sum(points * points, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, np.inf)
    return np.argsort(d2, axis=1, kind="stable")[:, :k]


def smote_balance(train: FeatureSet, cfg: SmoteConfig,
                  parent_log: list | None = None) -> FeatureSet:
    """Oversample the minority class until both classes have equal counts.

    Each synthetic record is x + lam * (n - x) for a minority sample x, one
    of its k nearest minority neighbors n, and lam ~ U[0, 1]; power_loss is
    interpolated with the same lam. Parents are cycled round-robin so the
    synthetics cover the minority class evenly. Majority records pass
    through untouched; synthetics are appended with ids ``synthetic:<i>``.

    ``parent_log``, when given, is filled with one
    ``(sample_index, neighbor_index, lam)`` tuple per synthetic record
    (indices into the original ``train``).
    """
    classes, counts = np.unique(train.labels, return_counts=True)
    if len(classes) < 2:
        raise ValueError("smote_balance needs both classes present")
    minority = int(classes[np.argmin(counts)])
    deficit = int(counts.max() - counts.min())
    if deficit == 0:
        return train

    minority_idx = np.flatnonzero(train.labels == minority)
    m = len(minority_idx)
    if m < 2:
        raise ValueError("minority class needs at least 2 records")
    k = min(cfg.k_neighbors, m - 1)

    rng = make_rng(cfg.seed)
    points = train.features[minority_idx]
    neighbors = _minority_neighbor_table(points, k)

    # round-robin over minority samples, then one neighbor draw and one
    # lambda draw per synthetic (drawn as two vectorized batches)
    sample_pos = np.resize(np.arange(m), deficit)
    neighbor_pos = neighbors[sample_pos, rng.integers(0, k, size=deficit)]
    lam = rng.random(deficit)

    x = points[sample_pos]
    nb = points[neighbor_pos]
    synth_features = x + lam[:, None] * (nb - x)
    pl = train.power_loss[minority_idx]
    synth_power = pl[sample_pos] + lam * (pl[neighbor_pos] - pl[sample_pos])
    np.clip(synth_power, 0.0, 1.0, out=synth_power)

    if parent_log is not None:
        parent_log.extend(
            (int(minority_idx[s]), int(minority_idx[nb_]), float(l))
            for s, nb_, l in zip(sample_pos, neighbor_pos, lam)
        )

    return FeatureSet(
        features=np.concatenate([train.features, synth_features]),
        power_loss=np.concatenate([train.power_loss, synth_power]),
        labels=np.concatenate([train.labels, np.full(deficit, minority, dtype=np.int64)]),
        source_ids=list(train.source_ids) + [f"synthetic:{i}" for i in range(deficit)],
    )
