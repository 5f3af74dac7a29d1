import numpy as np
import pytest

from ensemblekit.data import class_histogram
from ensemblekit.numeric import make_rng
from ensemblekit.smote import SmoteConfig, knn_indices, smote_balance

from conftest import make_set


def test_knn_examples():
    pts = np.array([[0.0], [1.0], [10.0]])
    assert knn_indices(pts, 0, 1).tolist() == [1]
    pts = np.array([[0.0], [1.0], [2.0]])
    assert knn_indices(pts, 1, 2).tolist() == [0, 2]  # tie broken by lower index


def test_knn_matches_bruteforce_oracle():
    rng = make_rng(7)
    pts = rng.normal(0, 1, (50, 4))
    for q in range(0, 50, 7):
        got = knn_indices(pts, q, 5).tolist()
        dists = sorted(
            (float(np.linalg.norm(pts[i] - pts[q])), i) for i in range(50) if i != q
        )
        assert got == [i for _, i in dists[:5]]


def test_knn_k_too_large():
    with pytest.raises(ValueError):
        knn_indices(np.zeros((3, 2)), 0, 3)


def _imbalanced(n_major=80, n_minor=20, dim=3, seed=1):
    rng = make_rng(seed)
    feats = np.concatenate([rng.normal(0, 1, (n_major, dim)), rng.normal(3, 1, (n_minor, dim))])
    labels = np.array([0] * n_major + [1] * n_minor)
    pl = np.concatenate([rng.uniform(0, 0.4, n_major), rng.uniform(0.6, 1.0, n_minor)])
    return make_set(feats, power_loss=pl, labels=labels)


def test_balance_counts_and_majority_passthrough():
    train = _imbalanced()
    out = smote_balance(train, SmoteConfig(seed=4))
    assert class_histogram(out) == {0: 80, 1: 80}
    # originals (both classes) pass through bit-identically, synthetics appended
    assert np.array_equal(out.features[:100], train.features)
    assert np.array_equal(out.power_loss[:100], train.power_loss)
    assert out.source_ids[:100] == train.source_ids
    assert out.source_ids[100:] == [f"synthetic:{i}" for i in range(60)]


def test_synthetics_lie_on_parent_segments():
    train = _imbalanced()
    log = []
    out = smote_balance(train, SmoteConfig(seed=4), parent_log=log)
    assert len(log) == 60
    for synth_row, (si, ni, lam) in zip(out.features[100:], log):
        expected = train.features[si] + lam * (train.features[ni] - train.features[si])
        assert np.linalg.norm(synth_row - expected) < 1e-9
        assert 0.0 <= lam <= 1.0
        assert train.labels[si] == train.labels[ni] == 1
    for synth_pl, (si, ni, lam) in zip(out.power_loss[100:], log):
        expected = train.power_loss[si] + lam * (train.power_loss[ni] - train.power_loss[si])
        assert synth_pl == pytest.approx(expected, abs=1e-12)


def test_no_synthetic_duplicates_originals_off_boundary():
    train = _imbalanced()
    log = []
    out = smote_balance(train, SmoteConfig(seed=4), parent_log=log)
    boundary_draws = sum(1 for _, _, lam in log if lam in (0.0, 1.0))
    duplicates = sum(
        1 for row in out.features[100:]
        if np.any(np.all(row == train.features, axis=1))
    )
    assert duplicates == boundary_draws


def test_two_point_minority_interpolates_segment():
    train = make_set(
        [[5.0, 5.0], [6.0, 6.0], [7.0, 7.0], [0.0, 0.0], [1.0, 1.0]],
        labels=[0, 0, 0, 1, 1],
    )
    out = smote_balance(train, SmoteConfig(k_neighbors=1, seed=2))
    synth = out.features[5]
    lam = synth[0]  # segment from (0,0) towards (1,1) or back
    assert synth[0] == pytest.approx(synth[1])
    assert 0.0 <= lam <= 1.0


def test_balanced_input_unchanged(tiny_set):
    assert smote_balance(tiny_set, SmoteConfig(seed=0)) == tiny_set


def test_deterministic_per_seed():
    train = _imbalanced(seed=3)
    a = smote_balance(train, SmoteConfig(seed=11))
    b = smote_balance(train, SmoteConfig(seed=11))
    c = smote_balance(train, SmoteConfig(seed=12))
    assert a == b
    assert a != c


def test_round_robin_parent_coverage():
    train = _imbalanced(n_major=50, n_minor=10)
    log = []
    smote_balance(train, SmoteConfig(seed=9), parent_log=log)
    parents = [si for si, _, _ in log]
    # 40 synthetics over 10 minority samples: each parent used exactly 4 times
    assert sorted(set(parents)) == sorted(set(parents))
    counts = {p: parents.count(p) for p in set(parents)}
    assert set(counts.values()) == {4}


def test_k_clamped_to_minority_size():
    train = make_set(np.arange(12.0).reshape(6, 2), labels=[0, 0, 0, 0, 1, 1])
    out = smote_balance(train, SmoteConfig(k_neighbors=5, seed=0))  # only 1 neighbor exists
    assert class_histogram(out) == {0: 4, 1: 4}


def test_single_class_rejected():
    train = make_set(np.zeros((4, 2)), labels=[1, 1, 1, 1])
    with pytest.raises(ValueError):
        smote_balance(train, SmoteConfig(seed=0))


def test_tiny_minority_rejected():
    train = make_set(np.zeros((4, 2)), labels=[0, 0, 0, 1])
    with pytest.raises(ValueError):
        smote_balance(train, SmoteConfig(seed=0))


def test_config_validation():
    with pytest.raises(ValueError):
        SmoteConfig(k_neighbors=0)
