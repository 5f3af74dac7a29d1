import numpy as np
import pytest

from ensemblekit.data import FeatureSet


def make_set(features, power_loss=None, labels=None, ids=None) -> FeatureSet:
    features = np.asarray(features, dtype=np.float64)
    n = features.shape[0]
    if power_loss is None:
        power_loss = np.zeros(n)
    if labels is None:
        labels = np.zeros(n, dtype=np.int64)
    if ids is None:
        ids = [f"record:{i}" for i in range(n)]
    return FeatureSet(features, np.asarray(power_loss, dtype=np.float64),
                      np.asarray(labels, dtype=np.int64), list(ids))


def separable_set(n=200, dim=4, margin=1.0, seed=0, flip_fraction=0.0) -> FeatureSet:
    """Linearly separable data from a known hyperplane oracle: label = sign
    of the first coordinate, pushed ``margin`` away from the plane."""
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 1, (n, dim))
    labels = (rng.random(n) < 0.5).astype(np.int64)
    X[:, 0] = np.where(labels == 1, margin + np.abs(X[:, 0]), -margin - np.abs(X[:, 0]))
    return make_set(X, labels=labels)


@pytest.fixture
def tiny_set():
    return make_set(
        [[0.0, 1.0], [1.0, 0.0], [2.0, 2.0], [3.0, 1.0]],
        power_loss=[0.0, 0.2, 0.6, 1.0],
        labels=[0, 0, 1, 1],
    )
