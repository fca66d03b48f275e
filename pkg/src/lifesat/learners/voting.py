"""Soft-voting ensemble: weighted average of member class probabilities."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .base import ClassifierModel, model_from_dict, register_model


@register_model
class VotingEnsembleModel(ClassifierModel):
    """Weighted mean of member probabilities; label is the argmax."""

    kind = "voting"

    def __init__(self, members: list[ClassifierModel],
                 weights: Optional[Sequence[float]] = None):
        if not members:
            raise ValueError("voting ensemble needs at least one member")
        if weights is None:
            weights = [1.0] * len(members)
        weights = [float(v) for v in weights]
        if len(weights) != len(members):
            raise ValueError(
                f"{len(weights)} weights for {len(members)} members"
            )
        if sum(weights) <= 0:
            raise ValueError("weights must have positive sum")
        self.members = members
        self.weights = weights
        self.n_features = members[0].n_features

    def _proba(self, X: np.ndarray) -> np.ndarray:
        total = sum(self.weights)
        acc = np.zeros((X.shape[0], 2))
        for weight, member in zip(self.weights, self.members):
            acc += weight * member.predict_proba(X)
        return acc / total

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "weights": list(self.weights),
            "members": [m.to_dict() for m in self.members],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VotingEnsembleModel":
        return cls([model_from_dict(m) for m in d["members"]],
                   list(d["weights"]))


def build_voting_ensemble(
    members: Sequence[ClassifierModel],
    weights: Optional[Sequence[float]] = None,
) -> VotingEnsembleModel:
    """Combine fitted members into a soft-voting classifier."""
    return VotingEnsembleModel(list(members), weights)
