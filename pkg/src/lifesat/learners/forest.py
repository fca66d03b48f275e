"""Random forest: bagged Gini trees with per-split feature subsets."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .base import ClassifierModel, class_weight_multipliers, prepare_fit_inputs, register_model
from .tree import DecisionTreeModel, _grow_classification


@register_model
class RandomForestModel(ClassifierModel):
    """Average of per-tree class probabilities."""

    kind = "random_forest"

    def __init__(self, trees: list[DecisionTreeModel], n_features: int,
                 params: dict):
        self.trees = trees
        self.n_features = n_features
        self.params = params

    def _proba(self, X: np.ndarray) -> np.ndarray:
        acc = np.zeros((X.shape[0], 2))
        for tree in self.trees:
            acc += tree._proba(X)
        return acc / len(self.trees)

    @property
    def feature_importances(self) -> np.ndarray:
        """Mean over trees of per-feature weighted Gini decrease, sum 1."""
        acc = np.zeros(self.n_features)
        for tree in self.trees:
            acc += tree.feature_importances
        acc /= len(self.trees)
        total = acc.sum()
        return acc / total if total > 0 else acc

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_features": self.n_features,
            "params": self.params,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RandomForestModel":
        trees = [DecisionTreeModel.from_dict(t) for t in d["trees"]]
        return cls(trees, d["n_features"], d["params"])


def train_random_forest(
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: Optional[np.ndarray] = None,
    *,
    n_estimators: int = 100,
    max_depth: Optional[int] = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    max_features="sqrt",
    bootstrap: bool = True,
    criterion: str = "gini",
    class_weight: Optional[dict] = None,
    seed: Optional[int] = 0,
) -> RandomForestModel:
    """Fit a bagged ensemble of Gini trees.

    Each tree sees a bootstrap resample (with replacement, original size,
    realized as repetition-count weights) and draws a fresh feature subset at
    every split from its own RNG stream, all derived from the master seed.
    """
    if criterion != "gini":
        raise ValueError("only the gini criterion is supported")
    if n_estimators < 1:
        raise ValueError("n_estimators must be >= 1")
    X, y, w = prepare_fit_inputs(X, y, sample_weight)
    if class_weight:
        w = w * class_weight_multipliers(class_weight)[y]
    n = X.shape[0]
    streams = np.random.SeedSequence(seed).spawn(n_estimators)
    trees: list[DecisionTreeModel] = []
    params = {
        "n_estimators": n_estimators,
        "max_depth": max_depth,
        "min_samples_split": min_samples_split,
        "min_samples_leaf": min_samples_leaf,
        "max_features": max_features,
        "bootstrap": bootstrap,
        "criterion": criterion,
        "class_weight": class_weight,
        "seed": seed,
    }
    for stream in streams:
        rng = np.random.default_rng(stream)
        if bootstrap:
            counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
            rows = np.nonzero(counts)[0]
            tree_w = w[rows] * counts[rows]
        else:
            rows = np.arange(n)
            tree_w = w
        arrays, importances = _grow_classification(
            X[rows], y[rows], tree_w, max_depth, min_samples_split,
            min_samples_leaf, max_features, rng,
        )
        trees.append(DecisionTreeModel(arrays, X.shape[1], params, importances))
    return RandomForestModel(trees, X.shape[1], params)
