"""Discrete AdaBoost over decision stumps.

The decision is sign(sum_t alpha_t h_t(x)) on {-1, +1} labels. Stage weights
are alpha_t = 0.5 * ln((1 - eps_t) / eps_t); sample weights are reweighted by
exp(-alpha y h(x)) and renormalized to sum 1 each round. Probabilities come
from a sigmoid of the margin since the decision rule itself is hard.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .base import ClassifierModel, prepare_fit_inputs, register_model, sigmoid
from .tree import DecisionTreeModel, _grow_classification

ERROR_EPS = 1e-10


@register_model
class AdaBoostModel(ClassifierModel):
    """Weighted vote of weak tree classifiers."""

    kind = "adaboost"

    def __init__(self, weak_learners: list[DecisionTreeModel],
                 stage_weights: list[float], n_features: int, params: dict):
        self.weak_learners = weak_learners
        self.stage_weights = stage_weights
        self.n_features = n_features
        self.params = params

    def margin(self, X: np.ndarray) -> np.ndarray:
        """sum_t alpha_t h_t(x) with h in {-1, +1}."""
        X = self._check(X)
        total = np.zeros(X.shape[0])
        for alpha, learner in zip(self.stage_weights, self.weak_learners):
            h = 2.0 * learner.predict(X) - 1.0
            total += alpha * h
        return total

    def _proba(self, X: np.ndarray) -> np.ndarray:
        p1 = sigmoid(self.margin(X))
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X: np.ndarray) -> np.ndarray:
        # sign of the margin exactly; margin 0 goes to class 1
        return (self.margin(X) >= 0.0).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_features": self.n_features,
            "params": self.params,
            "stage_weights": list(self.stage_weights),
            "weak_learners": [m.to_dict() for m in self.weak_learners],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdaBoostModel":
        learners = [DecisionTreeModel.from_dict(m) for m in d["weak_learners"]]
        return cls(learners, list(d["stage_weights"]), d["n_features"],
                   d["params"])


def train_adaboost(
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: Optional[np.ndarray] = None,
    *,
    n_estimators: int = 50,
    learning_rate: float = 1.0,
    max_depth: int = 1,
    seed: Optional[int] = None,
) -> AdaBoostModel:
    """Fit discrete AdaBoost with depth-limited trees (stumps by default).

    Stops early when a round's weighted error reaches 0 (perfect learner,
    kept with a clipped large weight) or >= 0.5 (no better than chance).
    """
    X, y, w0 = prepare_fit_inputs(X, y, sample_weight)
    params = {
        "n_estimators": n_estimators,
        "learning_rate": learning_rate,
        "max_depth": max_depth,
        "seed": seed,
    }
    n = X.shape[0]
    w = w0 / w0.sum()
    y_pm = 2.0 * y - 1.0
    learners: list[DecisionTreeModel] = []
    alphas: list[float] = []
    weight_sums: list[float] = []  # per-round totals, for invariant checks
    tree_params = {"max_depth": max_depth}
    for _ in range(n_estimators):
        arrays, importances = _grow_classification(
            X, y, w, max_depth, 2, 1, None, None,
        )
        stump = DecisionTreeModel(arrays, X.shape[1], tree_params, importances)
        h = 2.0 * stump.predict(X) - 1.0
        eps = float(w[h != y_pm].sum())
        if eps >= 0.5:
            break
        eps_c = min(max(eps, ERROR_EPS), 1.0 - ERROR_EPS)
        alpha = learning_rate * 0.5 * np.log((1.0 - eps_c) / eps_c)
        learners.append(stump)
        alphas.append(float(alpha))
        if eps == 0.0:
            break
        w = w * np.exp(-alpha * y_pm * h)
        w = w / w.sum()
        weight_sums.append(float(w.sum()))
    if not learners:
        # first stump was no better than chance; keep it with zero weight
        learners.append(stump)
        alphas.append(0.0)
    model = AdaBoostModel(learners, alphas, X.shape[1], params)
    model.weight_sums = weight_sums
    return model
