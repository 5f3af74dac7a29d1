"""Ensemble classifiers for solar-panel soiling detection.

A dual-branch neural classifier plus seven decision-level ensembles
(bagging, boosting, soft voting, cascading, blending, dual
bagging-and-boosting, dynamic averaging), built on a shared feature-file
format with SMOTE balancing and a reproducible comparison CLI.
"""

from .data import (
    FeatureRecord,
    FeatureSet,
    SplitConfig,
    binarize_labels,
    class_histogram,
    read_features,
    stratified_split,
    write_features,
)
from .denn import DennConfig, DennModel, TrainReport, denn_fit, denn_predict_proba, load_denn, save_denn
from .ensembles import (
    ENSEMBLE_KINDS,
    EnsembleConfig,
    EnsembleModel,
    decide_labels,
    ensemble_fit,
    ensemble_predict_proba,
    gbm_fit,
    load_ensemble,
    rf_fit,
    save_ensemble,
)
from .metrics import MetricsReport, confusion_matrix, evaluate_predictions, g_mean, weighted_prf
from .numeric import AdamState, adam_update, cross_entropy, make_rng, relu, softmax, spawn_rng
from .smote import SmoteConfig, knn_indices, smote_balance
from .synth import make_synthetic_set

__version__ = "0.1.0"
