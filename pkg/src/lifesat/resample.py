"""Dual balancing of imbalanced training data.

First SMOTE lifts the minority class to a fraction of the majority count
(default 40%), then random undersampling cuts the majority down to the new
minority count. Only ever applied to training data; the pipeline audits that
the held-out split never passes through here.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset


@dataclass(frozen=True)
class ResamplePlan:
    """Parameters of the dual balancing strategy."""

    smote_target_ratio: float = 0.40
    smote_k: int = 5
    seed: int = 0
    round_ordinal: bool = False  # ablation flag; canonical SMOTE interpolates

    def __post_init__(self) -> None:
        if not 0.0 < self.smote_target_ratio <= 1.0:
            raise ValueError("smote_target_ratio must lie in (0, 1]")
        if self.smote_k < 1:
            raise ValueError("smote_k must be >= 1")


def _class_split(ds: Dataset) -> tuple[np.ndarray, np.ndarray, int, int]:
    if ds.labels is None:
        raise ValueError("resampling needs a labeled dataset")
    counts = np.bincount(ds.labels, minlength=2)
    if counts[0] == 0 or counts[1] == 0:
        raise ValueError("resampling needs both classes present")
    minority = int(np.argmin(counts))
    majority = 1 - minority
    min_idx = np.nonzero(ds.labels == minority)[0]
    maj_idx = np.nonzero(ds.labels == majority)[0]
    return min_idx, maj_idx, minority, majority


def smote_oversample(ds: Dataset, plan: ResamplePlan) -> Dataset:
    """Append synthetic minority rows until minority = ceil(ratio * majority).

    Each synthetic row is x + u * (nn - x) for a random minority row x, one of
    its k nearest minority neighbours nn (Euclidean distance over the encoded
    features), and u ~ Uniform(0, 1). Majority rows are untouched. No-op when
    the minority already meets the target.
    """
    if ds.missing_mask.any():
        raise ValueError("impute missing cells before resampling")
    min_idx, maj_idx, minority, _ = _class_split(ds)
    n_min, n_maj = len(min_idx), len(maj_idx)
    if n_min < 2:
        raise ValueError("SMOTE needs at least 2 minority rows")
    target = int(np.ceil(plan.smote_target_ratio * n_maj))
    n_new = target - n_min
    if n_new <= 0:
        return ds

    k = plan.smote_k
    if k > n_min - 1:
        warnings.warn(
            f"smote_k={k} exceeds minority size - 1; reducing to {n_min - 1}"
        )
        k = n_min - 1

    X_min = ds.values[min_idx]
    # squared pairwise distances within the minority via the gram trick
    sq = (X_min ** 2).sum(axis=1)
    dist2 = sq[:, None] + sq[None, :] - 2.0 * (X_min @ X_min.T)
    np.fill_diagonal(dist2, np.inf)
    neighbours = np.argsort(dist2, axis=1, kind="stable")[:, :k]

    rng = np.random.default_rng(plan.seed)
    base = rng.integers(0, n_min, size=n_new)
    pick = rng.integers(0, k, size=n_new)
    u = rng.uniform(0.0, 1.0, size=n_new)
    nn = neighbours[base, pick]
    synthetic = X_min[base] + u[:, None] * (X_min[nn] - X_min[base])

    if plan.round_ordinal:
        for j, col in enumerate(ds.schema.feature_columns):
            if col.kind == "ordinal":
                hi = len(col.categories) - 1
                synthetic[:, j] = np.clip(np.rint(synthetic[:, j]), 0, hi)

    values = np.vstack([ds.values, synthetic])
    mask = np.zeros(values.shape, dtype=bool)
    labels = np.concatenate([ds.labels, np.full(n_new, minority, dtype=np.int64)])
    return Dataset(ds.schema, values, mask, labels)


def random_undersample(ds: Dataset, seed: int = 0) -> Dataset:
    """Subsample the majority class, without replacement, to the minority count.

    Retained rows are an exact subset of the input, in input order.
    """
    min_idx, maj_idx, _, _ = _class_split(ds)
    if len(maj_idx) <= len(min_idx):
        return ds
    rng = np.random.default_rng(seed)
    keep_maj = rng.choice(maj_idx, size=len(min_idx), replace=False)
    keep = np.sort(np.concatenate([min_idx, keep_maj]))
    return ds.take(keep)


def dual_resample(ds: Dataset, plan: ResamplePlan) -> Dataset:
    """SMOTE to the target ratio, then undersample the majority to parity."""
    over = smote_oversample(ds, plan)
    # independent stream for the undersampling stage
    under_seed = int(np.random.SeedSequence(plan.seed).spawn(2)[1].entropy % (2**32))
    return random_undersample(over, seed=under_seed)
