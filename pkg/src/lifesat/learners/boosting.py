"""Gradient-boosted trees for logistic loss.

The model is an additive ensemble: raw score(x) = init + sum_t lr * h_t(x),
probability = sigmoid(raw score). Each stage fits a regression tree to the
negative gradient (label minus current probability) and sets leaf values by a
single Newton step. Growth is either depthwise (level by level to a depth
cap) or leafwise (highest-gain leaf first, up to a leaf budget).
"""
from __future__ import annotations

import warnings
from typing import Optional

import numpy as np

from .base import ClassifierModel, prepare_fit_inputs, register_model, sigmoid
from .tree import RegressionTree, grow_regression_tree

PROB_EPS = 1e-12


@register_model
class BoostedEnsembleModel(ClassifierModel):
    """Fitted stagewise-additive tree ensemble."""

    kind = "gradient_boosting"

    def __init__(self, stages: list[RegressionTree], init_score: float,
                 learning_rate: float, n_features: int, params: dict):
        self.stages = stages
        self.init_score = init_score
        self.learning_rate = learning_rate
        self.n_features = n_features
        self.params = params

    def raw_score(self, X: np.ndarray, n_stages: Optional[int] = None) -> np.ndarray:
        """init + sum of scaled stage outputs, optionally truncated."""
        X = self._check(X)
        upto = len(self.stages) if n_stages is None else n_stages
        score = np.full(X.shape[0], self.init_score)
        for stage in self.stages[:upto]:
            score += self.learning_rate * stage.predict(X)
        return score

    def _proba(self, X: np.ndarray) -> np.ndarray:
        p1 = sigmoid(self.raw_score(X))
        return np.column_stack([1.0 - p1, p1])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_features": self.n_features,
            "init_score": self.init_score,
            "learning_rate": self.learning_rate,
            "params": self.params,
            "stages": [s.to_dict() for s in self.stages],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoostedEnsembleModel":
        stages = [RegressionTree.from_dict(s) for s in d["stages"]]
        return cls(stages, d["init_score"], d["learning_rate"], d["n_features"],
                   d["params"])


def train_gradient_boosting(
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: Optional[np.ndarray] = None,
    *,
    n_estimators: int = 100,
    learning_rate: float = 0.1,
    growth_mode: str = "depthwise",
    max_depth: int = 3,
    num_leaves: int = 31,
    feature_fraction: float = 1.0,
    min_samples_leaf: int = 1,
    seed: Optional[int] = 0,
) -> BoostedEnsembleModel:
    """Fit the boosted ensemble.

    The initial score is the log-odds of the (weighted) positive rate. With
    ``feature_fraction`` < 1 each stage draws its own column subset from a
    per-stage RNG stream. A single-class target yields a constant model.
    """
    if not 0.0 < feature_fraction <= 1.0:
        raise ValueError("feature_fraction must lie in (0, 1]")
    X, y, w = prepare_fit_inputs(X, y, sample_weight)
    params = {
        "n_estimators": n_estimators,
        "learning_rate": learning_rate,
        "growth_mode": growth_mode,
        "max_depth": max_depth,
        "num_leaves": num_leaves,
        "feature_fraction": feature_fraction,
        "min_samples_leaf": min_samples_leaf,
        "seed": seed,
    }
    pos_rate = float((w * y).sum() / w.sum())
    if pos_rate in (0.0, 1.0):
        warnings.warn("single-class target; returning a constant model")
        clipped = min(max(pos_rate, PROB_EPS), 1.0 - PROB_EPS)
        init = float(np.log(clipped / (1.0 - clipped)))
        return BoostedEnsembleModel([], init, learning_rate, X.shape[1], params)

    init = float(np.log(pos_rate / (1.0 - pos_rate)))
    d = X.shape[1]
    n_cols = max(1, int(np.ceil(feature_fraction * d)))
    streams = np.random.SeedSequence(seed).spawn(max(n_estimators, 1))

    score = np.full(X.shape[0], init)
    stages: list[RegressionTree] = []
    for t in range(n_estimators):
        p = sigmoid(score)
        residuals = y - p            # negative gradient of the logistic loss
        curvature = p * (1.0 - p)    # Newton denominator per sample
        cols = None
        if n_cols < d:
            rng = np.random.default_rng(streams[t])
            cols = np.sort(rng.choice(d, size=n_cols, replace=False))
        stage = grow_regression_tree(
            X, residuals, curvature, w,
            growth_mode=growth_mode, max_depth=max_depth,
            num_leaves=num_leaves, min_samples_leaf=min_samples_leaf,
            feature_indices=cols,
        )
        stages.append(stage)
        score = score + learning_rate * stage.predict(X)
    return BoostedEnsembleModel(stages, init, learning_rate, X.shape[1], params)


def training_log_loss(model: BoostedEnsembleModel, X: np.ndarray,
                      y: np.ndarray) -> list[float]:
    """Per-stage-count mean logistic loss, index 0 = init-only model."""
    y = np.asarray(y, dtype=np.float64)
    losses = []
    for t in range(len(model.stages) + 1):
        p = np.clip(sigmoid(model.raw_score(X, n_stages=t)), PROB_EPS, 1 - PROB_EPS)
        losses.append(float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p))))
    return losses
