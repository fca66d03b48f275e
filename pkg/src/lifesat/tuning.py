"""Cross-validation and hyperparameter search.

Folds are stratified by default: within each class, indices are shuffled by
the seed and dealt round-robin, so the assignment depends only on
(n, k, labels, seed). Candidate evaluation order is deterministic; ties in
the search keep the earliest candidate.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import learners
from .data import Dataset
from .metrics import macro_scores

TUNING_METRICS = ("accuracy", "macro_f1")


def fold_assignment(
    labels: np.ndarray, k: int, seed: int = 0, stratified: bool = True
) -> np.ndarray:
    """Fold index per row; stratified deals each class round-robin."""
    labels = np.asarray(labels)
    n = labels.size
    if k < 2:
        raise ValueError("need k >= 2 folds")
    if n < k:
        raise ValueError(f"cannot make {k} folds from {n} rows")
    rng = np.random.default_rng(seed)
    folds = np.empty(n, dtype=np.int64)
    if stratified:
        for c in np.unique(labels):
            idx = np.nonzero(labels == c)[0]
            idx = idx[rng.permutation(idx.size)]
            folds[idx] = np.arange(idx.size) % k
    else:
        perm = rng.permutation(n)
        folds[perm] = np.arange(n) % k
    return folds


def _score(metric: str, y_true: np.ndarray, y_pred: np.ndarray) -> float:
    if metric == "accuracy":
        return float((y_true == y_pred).mean())
    if metric == "macro_f1":
        return macro_scores(y_true, y_pred)["macro_f1"]
    raise ValueError(f"unknown metric {metric!r}; expected one of {TUNING_METRICS}")


def cross_validate(
    model_kind: str,
    params: dict,
    ds: Dataset,
    k: int = 5,
    metric: str = "macro_f1",
    seed: int = 0,
    stratified: bool = True,
) -> tuple[float, float, list[float]]:
    """Mean, std (population), and per-fold scores of a k-fold evaluation."""
    if ds.labels is None:
        raise ValueError("cross-validation needs a labeled dataset")
    X = ds.feature_matrix()
    y = ds.labels
    folds = fold_assignment(y, k, seed=seed, stratified=stratified)
    fold_scores: list[float] = []
    for f in range(k):
        test_rows = folds == f
        train_rows = ~test_rows
        y_train = y[train_rows]
        if len(np.unique(y_train)) < 2 or len(np.unique(y[test_rows])) < 1:
            raise ValueError(
                f"fold {f} leaves a single-class training split; "
                "use stratified folds or more rows"
            )
        model = learners.train_model(
            model_kind, X[train_rows], y_train, seed=seed, **params
        )
        y_pred = model.predict(X[test_rows])
        fold_scores.append(_score(metric, y[test_rows], y_pred))
    arr = np.array(fold_scores)
    return float(arr.mean()), float(arr.std()), fold_scores


@dataclass(frozen=True)
class ParamSpace:
    """Search space: per-parameter value lists (grid) or ranges (random).

    ``grid`` maps parameter name to the list of candidate values. ``ranges``
    maps parameter name to a spec dict {"low", "high", "kind"} with kind in
    {"uniform", "loguniform", "int"}; random mode may also sample from lists.
    """

    grid: dict[str, list] = field(default_factory=dict)
    ranges: dict[str, dict] = field(default_factory=dict)
    n_iter: int = 10
    seed: int = 0

    def grid_candidates(self) -> list[dict]:
        if not self.grid:
            raise ValueError("empty grid")
        names = list(self.grid)
        for name in names:
            if not self.grid[name]:
                raise ValueError(f"parameter {name!r} has no candidate values")
        combos = itertools.product(*(self.grid[name] for name in names))
        return [dict(zip(names, combo)) for combo in combos]

    def random_candidates(self) -> list[dict]:
        if self.n_iter < 1:
            raise ValueError("n_iter must be >= 1")
        rng = np.random.default_rng(self.seed)
        out = []
        for _ in range(self.n_iter):
            cand: dict = {}
            for name, values in self.grid.items():
                cand[name] = values[int(rng.integers(0, len(values)))]
            for name, spec in self.ranges.items():
                lo, hi = spec["low"], spec["high"]
                kind = spec.get("kind", "uniform")
                if kind == "uniform":
                    cand[name] = float(rng.uniform(lo, hi))
                elif kind == "loguniform":
                    cand[name] = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
                elif kind == "int":
                    cand[name] = int(rng.integers(lo, hi + 1))
                else:
                    raise ValueError(f"unknown range kind {kind!r}")
            out.append(cand)
        return out


@dataclass(frozen=True)
class SearchResult:
    best_params: dict
    best_score: float
    table: list[tuple[dict, float, float]]  # (params, mean, std)

    def to_dict(self) -> dict:
        return {
            "best_params": self.best_params,
            "best_score": self.best_score,
            "table": [
                {"params": p, "mean": m, "std": s} for p, m, s in self.table
            ],
        }


def _run_search(
    candidates: list[dict],
    model_kind: str,
    ds: Dataset,
    k: int,
    metric: str,
    seed: int,
) -> SearchResult:
    table: list[tuple[dict, float, float]] = []
    best_i = 0
    for i, params in enumerate(candidates):
        mean, std, _ = cross_validate(model_kind, params, ds, k=k,
                                      metric=metric, seed=seed)
        table.append((params, mean, std))
        if mean > table[best_i][1]:
            best_i = i
    return SearchResult(
        best_params=table[best_i][0],
        best_score=table[best_i][1],
        table=table,
    )


def grid_search(
    space: ParamSpace,
    model_kind: str,
    ds: Dataset,
    k: int = 5,
    metric: str = "macro_f1",
) -> SearchResult:
    """Evaluate every grid combination by cross-validation."""
    return _run_search(space.grid_candidates(), model_kind, ds, k, metric,
                       space.seed)


def random_search(
    space: ParamSpace,
    model_kind: str,
    ds: Dataset,
    k: int = 5,
    metric: str = "macro_f1",
) -> SearchResult:
    """Evaluate n_iter seeded samples from the space; duplicates allowed."""
    return _run_search(space.random_candidates(), model_kind, ds, k, metric,
                       space.seed)
