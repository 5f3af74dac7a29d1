"""Binary-classification metrics: accuracy, support-weighted
precision/recall/F1, G-Mean, and 2x2 confusion matrices.

Weighted averaging makes weighted recall identical to accuracy (the
per-class recalls, weighted by support, telescope to trace/N), so reports
carry that equality by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision_weighted: float
    recall_weighted: float
    f1_weighted: float
    g_mean: float
    confusion: np.ndarray  # 2x2, rows = true class, cols = predicted class

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision_weighted,
            "recall": self.recall_weighted,
            "f1": self.f1_weighted,
            "g_mean": self.g_mean,
            "confusion": self.confusion.tolist(),
        }


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray) -> np.ndarray:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size == 0:
        raise ValueError(f"need equal-length nonempty label vectors, got {y_true.shape} vs {y_pred.shape}")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if not np.isin(arr, (0, 1)).all():
            raise ValueError(f"{name} contains labels outside {{0, 1}}")
    cm = np.zeros((2, 2), dtype=np.int64)
    for t in (0, 1):
        for p in (0, 1):
            cm[t, p] = int(np.sum((y_true == t) & (y_pred == p)))
    return cm


def weighted_prf(cm: np.ndarray) -> tuple[float, float, float, float]:
    """(accuracy, precision_weighted, recall_weighted, f1_weighted).

    Per-class precision is 0 when the class is never predicted; per-class
    F1 is 0 when precision and recall are both 0.
    """
    cm = np.asarray(cm, dtype=np.float64)
    n = cm.sum()
    if n < 1:
        raise ValueError("confusion matrix is empty")
    true_c = cm.sum(axis=1)
    pred_c = cm.sum(axis=0)
    tp = np.diag(cm)
    precision = np.divide(tp, pred_c, out=np.zeros(2), where=pred_c > 0)
    recall = np.divide(tp, true_c, out=np.zeros(2), where=true_c > 0)
    pr_sum = precision + recall
    f1 = np.divide(2 * precision * recall, pr_sum, out=np.zeros(2), where=pr_sum > 0)
    weights = true_c / n
    accuracy = float(tp.sum() / n)
    return (
        accuracy,
        float(weights @ precision),
        float(weights @ recall),
        float(weights @ f1),
    )


def g_mean(cm: np.ndarray, precision_recall_variant: bool = False) -> float:
    """Geometric mean of sensitivity and specificity (the imbalanced-learning
    standard). ``precision_recall_variant`` switches to sqrt(precision *
    recall) of the soiled class for sensitivity analysis. A class with no
    true members contributes rate 0.
    """
    cm = np.asarray(cm, dtype=np.float64)
    (tn, fp), (fn, tp) = cm
    sensitivity = tp / (tp + fn) if tp + fn > 0 else 0.0
    if precision_recall_variant:
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        return float(np.sqrt(precision * sensitivity))
    specificity = tn / (tn + fp) if tn + fp > 0 else 0.0
    return float(np.sqrt(sensitivity * specificity))


def evaluate_predictions(y_true: np.ndarray, y_pred: np.ndarray) -> MetricsReport:
    cm = confusion_matrix(y_true, y_pred)
    accuracy, precision, recall, f1 = weighted_prf(cm)
    return MetricsReport(accuracy, precision, recall, f1, g_mean(cm), cm)
