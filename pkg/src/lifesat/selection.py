"""Feature selection: forest impurity importances, recursive elimination with
cross-validation, and PCA variance-threshold reduction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import ColumnMeta, Dataset, Schema
from .learners import RandomForestModel, train_random_forest
from .tuning import cross_validate

DEFAULT_RFECV_ESTIMATOR = {"n_estimators": 100, "max_features": "sqrt"}


def impurity_importances(rf: RandomForestModel) -> np.ndarray:
    """Normalized mean over trees of per-feature weighted Gini decrease."""
    if not rf.trees:
        raise ValueError("model has no fitted trees")
    return rf.feature_importances


@dataclass(frozen=True)
class RfecvResult:
    """Outcome of recursive feature elimination with cross-validation."""

    selected_codes: tuple[str, ...]
    ranking: dict[str, int]  # elimination order, 1 = dropped first
    curve: tuple[tuple[int, float], ...]  # (n_features, mean CV accuracy)
    folds: int

    def to_dict(self) -> dict:
        return {
            "selected_codes": list(self.selected_codes),
            "ranking": self.ranking,
            "curve": [list(p) for p in self.curve],
            "folds": self.folds,
        }


def rfecv(
    estimator_params: Optional[dict],
    ds: Dataset,
    k_folds: int = 5,
    step: int = 1,
    metric: str = "accuracy",
    seed: int = 0,
) -> RfecvResult:
    """Recursively drop the least-important features, keeping the best count.

    At each stage the estimator (a random forest) is scored by k-fold CV on
    the current features, then refit on all rows to rank importances, and the
    ``step`` least-important features are dropped, down to one feature. The
    selected set is the evaluated feature count with the highest mean CV
    score; ties resolve toward fewer features.
    """
    if ds.labels is None:
        raise ValueError("RFECV needs a labeled dataset")
    if ds.n_features < 2:
        raise ValueError("need at least 2 features")
    if step < 1:
        raise ValueError("step must be >= 1")
    if ds.n_rows < k_folds:
        raise ValueError("fewer rows than folds")
    params = dict(DEFAULT_RFECV_ESTIMATOR if estimator_params is None
                  else estimator_params)

    current = list(ds.feature_codes)
    ranking: dict[str, int] = {}
    curve: list[tuple[int, float]] = []
    snapshots: dict[int, list[str]] = {}
    eliminated = 0
    while True:
        sub = ds.select_features(current)
        mean, _, _ = cross_validate(
            "random_forest", params, sub, k=k_folds, metric=metric, seed=seed
        )
        curve.append((len(current), mean))
        snapshots[len(current)] = list(current)
        if len(current) == 1:
            break
        rf = train_random_forest(
            sub.feature_matrix(), sub.labels, seed=seed, **params
        )
        importances = impurity_importances(rf)
        n_drop = min(step, len(current) - 1)
        drop_idx = np.argsort(importances, kind="stable")[:n_drop]
        for j in sorted(drop_idx.tolist()):
            eliminated += 1
            ranking[current[j]] = eliminated
        dropped = {current[j] for j in drop_idx}
        current = [c for c in current if c not in dropped]
    for code in current:
        eliminated += 1
        ranking[code] = eliminated

    by_count = dict(curve)
    # highest mean CV score; ties resolve toward fewer features
    best_n = min(by_count, key=lambda n: (-by_count[n], n))
    selected = snapshots[best_n]
    ordered = tuple(c for c in ds.feature_codes if c in set(selected))
    return RfecvResult(
        selected_codes=ordered,
        ranking=ranking,
        curve=tuple(sorted(curve)),
        folds=k_folds,
    )


@dataclass(frozen=True)
class PcaModel:
    """Principal components retained to a cumulative variance target."""

    mean: np.ndarray
    components: np.ndarray  # (k, d), rows are component vectors
    explained_variance_ratio: np.ndarray  # all d ratios, descending
    retained: int
    variance_target: float

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean) @ self.components[: self.retained].T

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio.tolist(),
            "retained": self.retained,
            "variance_target": self.variance_target,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PcaModel":
        return cls(
            np.array(d["mean"]), np.array(d["components"]),
            np.array(d["explained_variance_ratio"]), d["retained"],
            d["variance_target"],
        )


def fit_pca(X: np.ndarray, variance_target: float) -> PcaModel:
    """Eigen-decomposition of the sample covariance of mean-centered data."""
    if not 0.0 < variance_target <= 1.0:
        raise ValueError("variance_target must lie in (0, 1]")
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("PCA needs a 2-D matrix with at least 2 rows")
    if np.isnan(X).any():
        raise ValueError("PCA input must have no missing cells")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (X.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    total = float(eigvals.sum())
    if total <= 0.0:
        raise ValueError("degenerate data: zero total variance")
    ratios = eigvals / total
    cumulative = np.cumsum(ratios)
    retained = int(np.searchsorted(cumulative, variance_target - 1e-12) + 1)
    retained = min(retained, len(ratios))
    return PcaModel(
        mean=mean,
        components=eigvecs.T,
        explained_variance_ratio=ratios,
        retained=retained,
        variance_target=variance_target,
    )


def pca_reduce(ds: Dataset, variance_target: float) -> tuple[PcaModel, Dataset]:
    """Fit PCA on a dataset and project it onto the retained components."""
    model = fit_pca(ds.feature_matrix(), variance_target)
    projected = model.transform(ds.values)
    columns = tuple(
        ColumnMeta(code=f"pc{i + 1}", prompt=f"principal component {i + 1}",
                   kind="numeric")
        for i in range(model.retained)
    ) + (ds.schema.target,)
    schema = Schema(columns, ds.schema.target_code, ds.schema.label_threshold)
    out = Dataset(schema, projected, np.zeros(projected.shape, dtype=bool),
                  ds.labels)
    return model, out
