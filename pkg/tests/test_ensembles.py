import math

import numpy as np
import pytest

from ensemblekit.base_learners import tree_predict_proba_batch
from ensemblekit.data import class_histogram
from ensemblekit.ensembles import (
    ENSEMBLE_KINDS,
    EnsembleConfig,
    combine_mean,
    decide_labels,
    ensemble_fit,
    ensemble_predict_proba,
    gbm_fit,
    load_ensemble,
    rf_fit,
    save_ensemble,
)
from ensemblekit.numeric import make_rng

from conftest import make_set, separable_set


def small_cfg(**overrides):
    base = dict(n_trees=10, boosting_rounds=15, seed=0)
    base.update(overrides)
    return EnsembleConfig(**base)


def noisy_set(n=200, dim=4, seed=0):
    rng = make_rng(seed)
    X = rng.normal(0, 1, (n, dim))
    labels = (X[:, 0] + 0.5 * rng.normal(0, 1, n) > 0).astype(np.int64)
    if len(np.unique(labels)) < 2:
        labels[0] = 1 - labels[0]
    return make_set(X, labels=labels)


# ---------------------------------------------------------------------------
# bagging


def test_rf_single_tree_equals_member():
    train = noisy_set(seed=1)
    model = rf_fit(train, small_cfg(n_trees=1))
    tree = model.members["trees"][0]
    np.testing.assert_array_equal(
        ensemble_predict_proba(model, train), tree_predict_proba_batch(tree, train.features)
    )


def test_rf_deterministic():
    train = noisy_set(seed=2)
    a = rf_fit(train, small_cfg(seed=5))
    b = rf_fit(train, small_cfg(seed=5))
    for ta, tb in zip(a.members["trees"], b.members["trees"]):
        assert ta == tb
    c = rf_fit(train, small_cfg(seed=6))
    assert any(ta != tc for ta, tc in zip(a.members["trees"], c.members["trees"]))


def test_rf_holdout_accuracy_on_separable():
    train = separable_set(n=400, dim=5, seed=3)
    test = separable_set(n=200, dim=5, seed=4)
    model = rf_fit(train, small_cfg(n_trees=25))
    preds = decide_labels(ensemble_predict_proba(model, test), "bagging")
    assert np.mean(preds == test.labels) >= 0.95


def test_bagging_vote_equivalence_small_forests():
    # fully grown trees on duplicate-free data give pure leaves, where
    # argmax of mean probabilities is exactly the majority vote
    failures = 0
    for seed in range(30):
        rng = make_rng(seed)
        train = make_set(rng.normal(0, 1, (60, 3)), labels=rng.integers(0, 2, 60))
        if len(np.unique(train.labels)) < 2:
            continue
        cfg = EnsembleConfig(n_trees=5, tree_depth=None, seed=seed)
        model = rf_fit(train, EnsembleConfig(n_trees=5, tree_depth=64, seed=seed))
        X = rng.normal(0, 1, (40, 3))
        per_tree = np.stack([tree_predict_proba_batch(t, X) for t in model.members["trees"]])
        mean_prob = per_tree.mean(axis=0)
        no_tie = (np.abs(per_tree[:, :, 1] - 0.5).min(axis=0) > 1e-12) & (
            np.abs(mean_prob[:, 1] - 0.5) > 1e-12
        )
        votes = (per_tree[:, :, 1] > 0.5).sum(axis=0)
        majority = (votes * 2 > per_tree.shape[0]).astype(int)
        argmax_mean = (mean_prob[:, 1] > 0.5).astype(int)
        failures += int(np.any(argmax_mean[no_tie] != majority[no_tie]))
    assert failures == 0


# ---------------------------------------------------------------------------
# boosting


def test_gbm_zero_rounds_predicts_base_rate():
    train = noisy_set(seed=5)
    model = gbm_fit(train, small_cfg(boosting_rounds=0))
    base_rate = train.labels.mean()
    probs = ensemble_predict_proba(model, train)
    np.testing.assert_allclose(probs[:, 1], base_rate, atol=1e-12)
    assert model.members["f0"] == pytest.approx(math.log(base_rate / (1 - base_rate)))


def test_gbm_balanced_f0_zero():
    train = make_set(np.arange(8.0).reshape(4, 2), labels=[0, 1, 0, 1])
    model = gbm_fit(train, small_cfg(boosting_rounds=0))
    assert model.members["f0"] == 0.0


def test_gbm_training_loss_nonincreasing():
    for seed in (0, 1, 2):
        train = noisy_set(n=300, seed=seed)
        model = gbm_fit(train, small_cfg(boosting_rounds=40, seed=seed))
        trace = model.members["loss_trace"]
        assert len(trace) == 41
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


def test_gbm_single_class_rejected():
    train = make_set(np.zeros((4, 2)), labels=[1, 1, 1, 1])
    with pytest.raises(ValueError):
        gbm_fit(train, small_cfg())


# ---------------------------------------------------------------------------
# combined strategies


def test_voting_members_and_combination():
    train = noisy_set(n=150, seed=7)
    model = ensemble_fit("voting", train, small_cfg())
    assert set(model.members) == {"logreg", "forest", "svm"}
    probs = ensemble_predict_proba(model, train)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_combine_mean_hand_examples():
    np.testing.assert_allclose(
        combine_mean([np.array([[0.8, 0.2]]), np.array([[0.6, 0.4]])]), [[0.7, 0.3]]
    )
    np.testing.assert_allclose(
        combine_mean([np.array([[0.6, 0.4]]), np.array([[0.3, 0.7]]), np.array([[0.9, 0.1]])]),
        [[0.6, 0.4]],
    )


def test_cascading_augmented_dimension():
    train = noisy_set(n=150, dim=20, seed=8)
    model = ensemble_fit("cascading", train, small_cfg())
    assert model.members["meta"].weights.shape == (22,)  # d + num_classes
    probs = ensemble_predict_proba(model, train)
    assert probs.shape == (150, 2)


def test_blending_split_sizes_and_stratification():
    rng = make_rng(9)
    labels = np.array([0] * 700 + [1] * 300)
    train = make_set(rng.normal(0, 1, (1000, 3)), labels=labels,
                     ids=[f"r{i}" for i in range(1000)])
    cfg = small_cfg(blend_holdout=0.3)
    model = ensemble_fit("blending", train, cfg)
    assert model.members["meta"].weights.shape == (4,)  # 2 members x 2 classes
    probs = ensemble_predict_proba(model, train)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)
    # replay the internal split: disjoint, stratified, 700/300
    from ensemblekit.data import SplitConfig, class_histogram, stratified_split
    from ensemblekit.numeric import derive_seed
    base, holdout = stratified_split(
        train, SplitConfig(test_fraction=cfg.blend_holdout, seed=derive_seed(cfg.seed, 7, 9))
    )
    assert len(base) == 700 and len(holdout) == 300
    assert class_histogram(holdout) == {0: 210, 1: 90}
    assert not set(base.source_ids) & set(holdout.source_ids)


def test_blending_holdout_too_small():
    train = make_set(np.arange(20.0).reshape(10, 2), labels=[0] * 9 + [1])
    with pytest.raises(ValueError, match="holdout"):
        ensemble_fit("blending", train, small_cfg(blend_holdout=0.2))


def test_dual_bb_is_mean_of_members():
    train = noisy_set(n=150, seed=10)
    model = ensemble_fit("dual_bb", train, small_cfg())
    probs = ensemble_predict_proba(model, train)
    expected = combine_mean([
        ensemble_predict_proba(model.members["forest"], train),
        ensemble_predict_proba(model.members["gbm"], train),
    ])
    np.testing.assert_array_equal(probs, expected)


def test_dynamic_members_and_threshold():
    train = noisy_set(n=150, seed=11)
    model = ensemble_fit("dynamic", train, small_cfg(dynamic_threshold=0.42))
    assert model.members["threshold"] == 0.42
    assert model.members["weights"] is None
    probs = ensemble_predict_proba(model, train)
    labels = decide_labels(probs, "dynamic", 0.42)
    np.testing.assert_array_equal(labels, (probs[:, 1] >= 0.42).astype(int))


def test_mean_combining_is_convex():
    train = noisy_set(n=120, seed=12)
    for kind in ("voting", "dual_bb", "dynamic", "bagging"):
        model = ensemble_fit(kind, train, small_cfg())
        probs = ensemble_predict_proba(model, train)
        assert np.all(probs >= 0) and np.all(probs <= 1)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_decide_labels_rules():
    probs = np.array([[0.5, 0.5], [0.49, 0.51], [0.7, 0.3]])
    np.testing.assert_array_equal(decide_labels(probs, "bagging"), [0, 1, 0])  # tie -> 0
    np.testing.assert_array_equal(decide_labels(probs, "dynamic", 0.5), [1, 1, 0])
    # away from ties, threshold 0.5 equals argmax
    strict = np.array([[0.6, 0.4], [0.2, 0.8]])
    np.testing.assert_array_equal(
        decide_labels(strict, "dynamic", 0.5), decide_labels(strict, "voting")
    )


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        ensemble_fit("stacking", noisy_set(), small_cfg())


def test_all_kinds_deterministic():
    train = noisy_set(n=120, seed=13)
    for kind in ENSEMBLE_KINDS:
        a = ensemble_predict_proba(ensemble_fit(kind, train, small_cfg(seed=3)), train)
        b = ensemble_predict_proba(ensemble_fit(kind, train, small_cfg(seed=3)), train)
        np.testing.assert_array_equal(a, b)


def test_checkpoint_roundtrip_all_kinds(tmp_path):
    train = noisy_set(n=100, seed=14)
    for kind in ENSEMBLE_KINDS:
        model = ensemble_fit(kind, train, small_cfg(n_trees=4, boosting_rounds=4))
        path = tmp_path / f"{kind}.ensm"
        save_ensemble(model, path)
        loaded = load_ensemble(path)
        assert loaded.kind == kind
        np.testing.assert_array_equal(
            ensemble_predict_proba(loaded, train), ensemble_predict_proba(model, train)
        )
        path2 = tmp_path / f"{kind}2.ensm"
        save_ensemble(loaded, path2)
        assert path.read_bytes() == path2.read_bytes()


def test_checkpoint_bad_magic(tmp_path):
    path = tmp_path / "junk"
    path.write_bytes(b"XXXXxxxxxxxxxxxxxxxx")
    with pytest.raises(ValueError):
        load_ensemble(path)


def test_config_validation():
    with pytest.raises(ValueError):
        EnsembleConfig(n_trees=0)
    with pytest.raises(ValueError):
        EnsembleConfig(blend_holdout=0.0)
    with pytest.raises(ValueError):
        EnsembleConfig(boosting_rounds=-1)
    assert EnsembleConfig(boosting_rounds=0).boosting_rounds == 0
