"""Shared classifier contract: fit + predict_proba over binary labels.

Every learner is a plain object exposing ``predict_proba(X) -> (n, 2)`` with
rows summing to 1, and serializes to a tagged dict so fitted models round-trip
through the versioned artifact format.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

_REGISTRY: dict[str, Callable[[dict], "ClassifierModel"]] = {}


def sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class ClassifierModel:
    """Base class for all fitted learners."""

    kind: str = ""
    n_features: int = 0

    def _proba(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Class-probability pairs (p_discontent, p_content), rows sum to 1."""
        X = self._check(X)
        return self._proba(X)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Argmax labels; exact ties go to class 1."""
        proba = self.predict_proba(X)
        return (proba[:, 1] >= proba[:, 0]).astype(np.int64)

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2:
            raise ValueError("X must be 2-D")
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"{self.kind}: expected {self.n_features} features, "
                f"got {X.shape[1]}"
            )
        return X

    def to_dict(self) -> dict:
        raise NotImplementedError

    @classmethod
    def from_dict(cls, d: dict) -> "ClassifierModel":
        raise NotImplementedError


def register_model(cls: type) -> type:
    """Class decorator adding a learner to the serialization registry."""
    _REGISTRY[cls.kind] = cls.from_dict
    return cls


def model_from_dict(d: dict) -> ClassifierModel:
    kind = d.get("kind")
    if kind not in _REGISTRY:
        raise ValueError(f"unknown model kind {kind!r}")
    return _REGISTRY[kind](d)


def predict_proba(model: ClassifierModel, X: np.ndarray) -> np.ndarray:
    """Module-level alias for the shared contract."""
    return model.predict_proba(X)


def predict(model: ClassifierModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)


def class_weight_multipliers(class_weight: dict | None) -> np.ndarray:
    """Per-class weight multipliers; accepts int or string keys (JSON)."""
    if not class_weight:
        return np.ones(2)
    normalized = {int(k): float(v) for k, v in class_weight.items()}
    return np.array([normalized.get(0, 1.0), normalized.get(1, 1.0)])


def prepare_fit_inputs(
    X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Validate and normalize training inputs for any learner."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    if X.shape[0] == 0:
        raise ValueError("cannot fit on an empty dataset")
    if y.shape != (X.shape[0],):
        raise ValueError("y must have one label per row")
    if np.isnan(X).any():
        raise ValueError("X must not contain missing cells")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary 0/1")
    if sample_weight is None:
        w = np.ones(X.shape[0], dtype=np.float64)
    else:
        w = np.asarray(sample_weight, dtype=np.float64)
        if w.shape != y.shape or (w < 0).any():
            raise ValueError("sample_weight must be nonnegative, one per row")
    return X, y, w
