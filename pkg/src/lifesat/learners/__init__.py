"""From-scratch classifiers sharing one fit/predict_proba contract."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .adaboost import AdaBoostModel, train_adaboost
from .base import (
    ClassifierModel,
    model_from_dict,
    predict,
    predict_proba,
    sigmoid,
)
from .boosting import (
    BoostedEnsembleModel,
    train_gradient_boosting,
    training_log_loss,
)
from .forest import RandomForestModel, train_random_forest
from .linear import (
    LinearSvmModel,
    LogisticRegressionModel,
    logistic_loss_and_gradient,
    train_linear_svm,
    train_logistic_regression,
)
from .naive_bayes import NaiveBayesModel, train_naive_bayes
from .tree import DecisionTreeModel, gini_impurity, train_decision_tree
from .voting import VotingEnsembleModel, build_voting_ensemble

_TRAINERS = {
    "decision_tree": train_decision_tree,
    "random_forest": train_random_forest,
    "gradient_boosting": train_gradient_boosting,
    "adaboost": train_adaboost,
    "naive_bayes": train_naive_bayes,
    "logistic_regression": train_logistic_regression,
    "linear_svm": train_linear_svm,
}

_SEEDED = {"decision_tree", "random_forest", "gradient_boosting", "adaboost"}


def train_model(
    kind: str,
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: Optional[np.ndarray] = None,
    seed: Optional[int] = 0,
    **params,
) -> ClassifierModel:
    """Dispatch to a trainer by kind, passing hyperparameters through.

    Hyperparameter names follow the pipeline config conventions
    (n_estimators, learning_rate, max_depth, num_leaves, feature_fraction,
    criterion, penalty, class_weight, ...).
    """
    if kind not in _TRAINERS:
        raise ValueError(
            f"unknown model kind {kind!r}; expected one of {sorted(_TRAINERS)}"
        )
    trainer = _TRAINERS[kind]
    if kind in _SEEDED:
        params.setdefault("seed", seed)
    return trainer(X, y, sample_weight, **params)


def model_kinds() -> list[str]:
    return sorted(_TRAINERS)


__all__ = [
    "AdaBoostModel",
    "BoostedEnsembleModel",
    "ClassifierModel",
    "DecisionTreeModel",
    "LinearSvmModel",
    "LogisticRegressionModel",
    "NaiveBayesModel",
    "RandomForestModel",
    "VotingEnsembleModel",
    "build_voting_ensemble",
    "gini_impurity",
    "logistic_loss_and_gradient",
    "model_from_dict",
    "model_kinds",
    "predict",
    "predict_proba",
    "sigmoid",
    "train_adaboost",
    "train_decision_tree",
    "train_gradient_boosting",
    "train_linear_svm",
    "train_logistic_regression",
    "train_model",
    "train_naive_bayes",
    "train_random_forest",
    "training_log_loss",
]
