"""Gaussian naive Bayes: independent per-feature likelihoods in log space."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .base import ClassifierModel, prepare_fit_inputs, register_model

VAR_FLOOR_SCALE = 1e-9


@register_model
class NaiveBayesModel(ClassifierModel):
    """Class priors plus per-class per-feature Gaussian (mean, variance)."""

    kind = "naive_bayes"

    def __init__(self, priors: np.ndarray, means: np.ndarray,
                 variances: np.ndarray):
        self.priors = priors          # (2,)
        self.means = means            # (2, d)
        self.variances = variances    # (2, d), floored above zero
        self.n_features = means.shape[1]

    def _proba(self, X: np.ndarray) -> np.ndarray:
        # log P(C) + sum_i log N(x_i | mean, var), normalized by logsumexp
        log_post = np.log(self.priors)[None, :].repeat(X.shape[0], axis=0)
        for c in (0, 1):
            var = self.variances[c]
            log_like = -0.5 * (
                np.log(2.0 * np.pi * var)[None, :]
                + (X - self.means[c]) ** 2 / var[None, :]
            )
            log_post[:, c] += log_like.sum(axis=1)
        shift = log_post.max(axis=1, keepdims=True)
        expd = np.exp(log_post - shift)
        return expd / expd.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NaiveBayesModel":
        return cls(np.array(d["priors"]), np.array(d["means"]),
                   np.array(d["variances"]))


def train_naive_bayes(
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: Optional[np.ndarray] = None,
) -> NaiveBayesModel:
    """Fit weighted Gaussian likelihoods per class.

    Variances are floored at 1e-9 times the largest overall feature variance
    so constant features cannot zero out a likelihood.
    """
    X, y, w = prepare_fit_inputs(X, y, sample_weight)
    d = X.shape[1]
    means = np.zeros((2, d))
    variances = np.zeros((2, d))
    priors = np.zeros(2)
    for c in (0, 1):
        rows = y == c
        wc = w[rows]
        if wc.sum() <= 0:
            raise ValueError(f"class {c} is empty or has zero total weight")
        priors[c] = wc.sum() / w.sum()
        mu = (wc[:, None] * X[rows]).sum(axis=0) / wc.sum()
        means[c] = mu
        variances[c] = (wc[:, None] * (X[rows] - mu) ** 2).sum(axis=0) / wc.sum()
    overall_var = X.var(axis=0).max()
    floor = VAR_FLOOR_SCALE * (overall_var if overall_var > 0 else 1.0)
    variances = np.maximum(variances, floor)
    return NaiveBayesModel(priors, means, variances)
