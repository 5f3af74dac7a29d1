import numpy as np
import pytest
from hypothesis import given, strategies as st

from ensemblekit.metrics import (
    confusion_matrix,
    evaluate_predictions,
    g_mean,
    weighted_prf,
)


def test_confusion_hand_count():
    cm = confusion_matrix(np.array([0, 0, 1, 1]), np.array([0, 1, 1, 1]))
    np.testing.assert_array_equal(cm, [[1, 1], [0, 2]])


def test_confusion_perfect_prediction():
    y = np.array([0, 1, 1, 0, 1])
    cm = confusion_matrix(y, y)
    assert cm[0, 1] == 0 and cm[1, 0] == 0
    assert cm.sum() == 5


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
def test_confusion_row_sums_are_class_counts(pairs):
    y_true = np.array([a for a, _ in pairs])
    y_pred = np.array([b for _, b in pairs])
    cm = confusion_matrix(y_true, y_pred)
    assert cm.sum() == len(pairs)
    np.testing.assert_array_equal(cm.sum(axis=1), [np.sum(y_true == 0), np.sum(y_true == 1)])


def test_confusion_errors():
    with pytest.raises(ValueError):
        confusion_matrix(np.array([0, 1]), np.array([0]))
    with pytest.raises(ValueError):
        confusion_matrix(np.array([0, 2]), np.array([0, 1]))
    with pytest.raises(ValueError):
        confusion_matrix(np.array([]), np.array([]))


def test_weighted_prf_hand_computation():
    acc, prec, rec, f1 = weighted_prf(np.array([[1, 1], [0, 2]]))
    assert acc == pytest.approx(0.75)
    assert rec == pytest.approx(0.75)
    assert prec == pytest.approx(5 / 6)
    # per-class f1: class0 = 2*1*.5/1.5 = 2/3, class1 = 2*(2/3)*1/(5/3) = 0.8
    assert f1 == pytest.approx(0.5 * (2 / 3) + 0.5 * 0.8)


def test_weighted_prf_perfect():
    assert weighted_prf(np.array([[10, 0], [0, 5]])) == pytest.approx((1.0, 1.0, 1.0, 1.0))


def test_precision_zero_when_class_never_predicted():
    # everything predicted clean: precision_0 = 3/5, precision_1 = 0 by convention
    acc, prec, rec, f1 = weighted_prf(np.array([[3, 0], [2, 0]]))
    assert prec == pytest.approx(0.6 * (3 / 5) + 0.4 * 0.0)


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=200))
def test_recall_weighted_equals_accuracy(pairs):
    y_true = np.array([a for a, _ in pairs])
    y_pred = np.array([b for _, b in pairs])
    acc, _, rec, _ = weighted_prf(confusion_matrix(y_true, y_pred))
    assert abs(acc - rec) <= 1e-12


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=2, max_size=100),
       st.randoms(use_true_random=False))
def test_metrics_invariant_under_permutation(pairs, rnd):
    y_true = np.array([a for a, _ in pairs])
    y_pred = np.array([b for _, b in pairs])
    perm = list(range(len(pairs)))
    rnd.shuffle(perm)
    a = evaluate_predictions(y_true, y_pred)
    b = evaluate_predictions(y_true[perm], y_pred[perm])
    assert a.as_dict() == b.as_dict()


def test_f1_weighted_between_per_class_f1():
    cm = np.array([[80, 20], [10, 90]], dtype=float)
    _, _, _, f1w = weighted_prf(cm)
    f1_0 = 2 * (80 / 90) * (80 / 100) / ((80 / 90) + (80 / 100))
    f1_1 = 2 * (90 / 110) * (90 / 100) / ((90 / 110) + (90 / 100))
    assert min(f1_0, f1_1) <= f1w <= max(f1_0, f1_1)


def test_g_mean_examples():
    assert g_mean(np.array([[50, 0], [0, 50]])) == pytest.approx(1.0)
    assert g_mean(np.array([[90, 10], [5, 95]])) == pytest.approx(np.sqrt(0.95 * 0.90))
    assert g_mean(np.array([[90, 10], [5, 95]])) == pytest.approx(0.924662, abs=1e-6)
    # everything predicted soiled: specificity 0
    assert g_mean(np.array([[0, 60], [0, 40]])) == 0.0


def test_g_mean_precision_recall_variant():
    cm = np.array([[90, 10], [5, 95]])
    expected = np.sqrt((95 / 105) * 0.95)
    assert g_mean(cm, precision_recall_variant=True) == pytest.approx(expected)


def test_g_mean_bounds_and_symmetric_case():
    # symmetric matrix with equal class counts and equal recalls
    cm = np.array([[45, 5], [5, 45]])
    acc, *_ = weighted_prf(cm)
    assert g_mean(cm) == pytest.approx(acc)
    rng = np.random.default_rng(0)
    for _ in range(50):
        cm = rng.integers(0, 40, (2, 2))
        if cm.sum() == 0:
            continue
        assert 0.0 <= g_mean(cm) <= 1.0


def test_report_identity_fields():
    y_true = np.array([0, 0, 1, 1, 1])
    y_pred = np.array([0, 1, 1, 0, 1])
    report = evaluate_predictions(y_true, y_pred)
    assert report.recall_weighted == report.accuracy
    d = report.as_dict()
    assert set(d) == {"accuracy", "precision", "recall", "f1", "g_mean", "confusion"}
