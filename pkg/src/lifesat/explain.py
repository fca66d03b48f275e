"""Perturbation-based local surrogate explanations.

For one instance: binarize every feature as "falls in the same training
quartile bin as the instance", sample perturbations from the training
marginals, weight them by an exponential kernel over the binary
representation, and fit a weighted ridge surrogate to the model's
content-class probability. Coefficients become signed per-feature threshold
rules (positive pushes toward Content, negative against).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset

DEFAULT_N_SAMPLES = 5000
DEFAULT_RIDGE_LAMBDA = 1.0
MIN_SAMPLES = 10


@dataclass(frozen=True)
class DiscretizerStats:
    """Per-feature quartile boundaries plus training marginals for sampling.

    ``boundaries[i]`` holds the three quartile cut points of feature i, or
    None for a constant feature (single trivial bin). ``marginals[i]`` holds
    the training column values the perturbation sampler draws from.
    """

    codes: tuple[str, ...]
    boundaries: tuple[Optional[np.ndarray], ...]
    marginals: tuple[np.ndarray, ...]

    def bin_of(self, feature: int, value: float) -> int:
        bounds = self.boundaries[feature]
        if bounds is None:
            return 0
        return int(np.searchsorted(bounds, value, side="left"))

    def rule(self, feature: int, value: float) -> str:
        """Threshold rule describing the bin the value falls in."""
        code = self.codes[feature]
        bounds = self.boundaries[feature]
        if bounds is None:
            return f"{code} = {_fmt(value)}"
        b = self.bin_of(feature, value)
        if b == 0:
            return f"{code} <= {_fmt(bounds[0])}"
        if b == len(bounds):
            return f"{code} > {_fmt(bounds[-1])}"
        return f"{_fmt(bounds[b - 1])} < {code} <= {_fmt(bounds[b])}"

    def to_dict(self) -> dict:
        return {
            "codes": list(self.codes),
            "boundaries": [None if b is None else b.tolist()
                           for b in self.boundaries],
            "marginals": [m.tolist() for m in self.marginals],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DiscretizerStats":
        return cls(
            codes=tuple(d["codes"]),
            boundaries=tuple(None if b is None else np.array(b)
                             for b in d["boundaries"]),
            marginals=tuple(np.array(m) for m in d["marginals"]),
        )


def _fmt(v: float) -> str:
    """Two decimals with trailing zeros trimmed, at least one kept."""
    s = f"{v:.2f}"
    if s.endswith("0") and not s.endswith(".00"):
        s = s[:-1]
    elif s.endswith(".00"):
        s = s[:-1]
    return s


def fit_discretizer(train: Dataset) -> DiscretizerStats:
    """Quartile boundaries per feature from the training split."""
    X = train.feature_matrix()
    boundaries: list[Optional[np.ndarray]] = []
    marginals: list[np.ndarray] = []
    for j in range(X.shape[1]):
        col = X[:, j]
        marginals.append(col.copy())
        if np.ptp(col) == 0.0:
            boundaries.append(None)
        else:
            boundaries.append(np.percentile(col, [25, 50, 75]))
    return DiscretizerStats(
        codes=train.feature_codes,
        boundaries=tuple(boundaries),
        marginals=tuple(marginals),
    )


@dataclass(frozen=True)
class Explanation:
    """Probability pair plus signed per-feature threshold rules."""

    class_probs: tuple[float, float]  # (p_discontent, p_content)
    contributions: tuple[tuple[str, str, float], ...]  # (code, rule, weight)
    intercept: float
    fidelity: float

    def to_dict(self) -> dict:
        return {
            "class_probs": list(self.class_probs),
            "contributions": [
                {"code": c, "rule": r, "weight": w}
                for c, r, w in self.contributions
            ],
            "intercept": self.intercept,
            "fidelity": self.fidelity,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Explanation":
        return cls(
            class_probs=tuple(d["class_probs"]),
            contributions=tuple(
                (c["code"], c["rule"], c["weight"]) for c in d["contributions"]
            ),
            intercept=d["intercept"],
            fidelity=d["fidelity"],
        )


def _weighted_ridge(
    Z: np.ndarray, target: np.ndarray, sample_weight: np.ndarray, lam: float
) -> tuple[float, np.ndarray]:
    """Ridge with unregularized intercept; returns (intercept, coefficients)."""
    d = Z.shape[1]
    ones = np.ones((Z.shape[0], 1))
    A = np.hstack([ones, Z])
    W = sample_weight[:, None]
    gram = A.T @ (W * A)
    reg = lam * np.eye(d + 1)
    reg[0, 0] = 0.0
    beta = np.linalg.solve(gram + reg, A.T @ (sample_weight * target))
    return float(beta[0]), beta[1:]


def _weighted_r2(
    target: np.ndarray, pred: np.ndarray, sample_weight: np.ndarray
) -> float:
    if np.ptp(target) == 0.0:
        return 1.0  # constant target: zero residual, zero variance
    wsum = sample_weight.sum()
    mean = float((sample_weight * target).sum() / wsum)
    ss_tot = float((sample_weight * (target - mean) ** 2).sum())
    ss_res = float((sample_weight * (target - pred) ** 2).sum())
    if ss_tot <= 1e-18:
        return 1.0
    return 1.0 - ss_res / ss_tot


def explain_instance(
    model,
    instance: np.ndarray,
    stats: DiscretizerStats,
    n_samples: int = DEFAULT_N_SAMPLES,
    kernel_width: Optional[float] = None,
    seed: int = 0,
    ridge_lambda: float = DEFAULT_RIDGE_LAMBDA,
) -> Explanation:
    """Explain one prediction with a local weighted-ridge surrogate.

    Perturbations resample each feature from its training marginal with
    probability 1/2 (keeping the instance value otherwise). Sample weights
    are exp(-d^2 / width^2) where d counts the features that left the
    instance's bin; the default width is 0.75 * sqrt(n_features).
    """
    instance = np.asarray(instance, dtype=np.float64).ravel()
    d = instance.size
    if d != len(stats.codes):
        raise ValueError(
            f"instance has {d} features, discretizer has {len(stats.codes)}"
        )
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} perturbation samples")
    if kernel_width is None:
        kernel_width = 0.75 * np.sqrt(d)

    rng = np.random.default_rng(seed)
    X = np.tile(instance, (n_samples, 1))
    resample = rng.uniform(size=(n_samples, d)) < 0.5
    for j in range(d):
        rows = resample[:, j]
        if rows.any():
            X[rows, j] = rng.choice(stats.marginals[j], size=int(rows.sum()))
    X[0] = instance  # keep the instance itself in the neighborhood

    instance_bins = np.array([stats.bin_of(j, instance[j]) for j in range(d)])
    bins = np.empty((n_samples, d), dtype=np.int64)
    for j in range(d):
        bounds = stats.boundaries[j]
        if bounds is None:
            bins[:, j] = 0
        else:
            bins[:, j] = np.searchsorted(bounds, X[:, j], side="left")
    Z = (bins == instance_bins).astype(np.float64)

    dist2 = (1.0 - Z).sum(axis=1)
    weights = np.exp(-dist2 / kernel_width**2)
    if np.allclose(Z, Z[0]):
        raise ValueError("degenerate perturbations: all samples identical")

    target = model.predict_proba(X)[:, 1]
    intercept, coef = _weighted_ridge(Z, target, weights, ridge_lambda)
    surrogate_pred = intercept + Z @ coef
    fidelity = _weighted_r2(target, surrogate_pred, weights)

    contributions = [
        (stats.codes[j], stats.rule(j, instance[j]), float(coef[j]))
        for j in range(d)
    ]
    contributions.sort(key=lambda c: -abs(c[2]))

    proba = model.predict_proba(instance.reshape(1, -1))[0]
    return Explanation(
        class_probs=(float(proba[0]), float(proba[1])),
        contributions=tuple(contributions),
        intercept=intercept,
        fidelity=fidelity,
    )


def fidelity_score(
    explanation: Explanation,
    model,
    perturbations: np.ndarray,
    stats: DiscretizerStats,
    instance: np.ndarray,
    kernel_width: Optional[float] = None,
) -> float:
    """Weighted R^2 of the surrogate against the model on a perturbation set."""
    instance = np.asarray(instance, dtype=np.float64).ravel()
    d = instance.size
    if kernel_width is None:
        kernel_width = 0.75 * np.sqrt(d)
    instance_bins = np.array([stats.bin_of(j, instance[j]) for j in range(d)])
    bins = np.empty((perturbations.shape[0], d), dtype=np.int64)
    for j in range(d):
        bounds = stats.boundaries[j]
        bins[:, j] = 0 if bounds is None else np.searchsorted(
            bounds, perturbations[:, j], side="left"
        )
    Z = (bins == instance_bins).astype(np.float64)
    weights = np.exp(-(1.0 - Z).sum(axis=1) / kernel_width**2)
    coef_by_code = {c: w for c, _, w in explanation.contributions}
    coef = np.array([coef_by_code[c] for c in stats.codes])
    pred = explanation.intercept + Z @ coef
    target = model.predict_proba(perturbations)[:, 1]
    return _weighted_r2(target, pred, weights)
