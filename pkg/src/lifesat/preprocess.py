"""Fit-on-train preprocessing chain.

Order of operations: drop columns with too many nulls, validate ordinal
encoding, iteratively impute remaining missing cells with Bayesian-ridge
regressors, drop zero-variance columns, clamp outliers beyond two standard
deviations to the training median. Everything learned during ``fit`` is
frozen into a :class:`FittedPreprocessor` and replayed verbatim on any split;
``apply`` never consults statistics of the data it transforms.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .data import ColumnMeta, Dataset, Schema, missing_profile

DEFAULT_NULL_THRESHOLD = 0.20
RIDGE_INIT_PRECISION = 1e-6
RIDGE_TOL = 1e-4
RIDGE_MAX_ITER = 300
IMPUTE_TOL = 1e-3
IMPUTE_MAX_ROUNDS = 10


@dataclass(frozen=True)
class RidgeFit:
    """Posterior-mean linear fit with evidence-maximized precisions.

    ``alpha`` is the noise precision and ``lam`` the weight-prior precision.
    """

    weights: np.ndarray
    intercept: float
    alpha: float
    lam: float

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if not np.all(np.isfinite(w)) or not np.isfinite(self.intercept):
            raise ValueError("ridge fit produced non-finite coefficients")
        if self.lam <= 0.0:
            raise ValueError("weight precision must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.intercept

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "alpha": self.alpha,
            "lam": self.lam,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RidgeFit":
        return cls(np.array(d["weights"], dtype=np.float64), d["intercept"],
                   d["alpha"], d["lam"])


def fit_bayesian_ridge(
    X: np.ndarray,
    y: np.ndarray,
    tol: float = RIDGE_TOL,
    max_iter: int = RIDGE_MAX_ITER,
) -> RidgeFit:
    """Bayesian ridge regression by evidence maximization.

    Alternates posterior-mean weights with closed-form updates of the noise
    and weight precisions until their relative change drops below ``tol`` or
    ``max_iter`` rounds pass. A zero-variance target returns an
    intercept-only fit.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    n, p = X.shape
    if n < 2:
        raise ValueError("need at least 2 rows")
    if np.isnan(X).any() or np.isnan(y).any():
        raise ValueError("X and y must be fully observed")

    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_mean
    yc = y - y_mean
    if np.ptp(y) == 0.0 or p == 0:
        return RidgeFit(np.zeros(p), y_mean, alpha=RIDGE_INIT_PRECISION, lam=1.0)

    alpha = RIDGE_INIT_PRECISION  # noise precision
    lam = RIDGE_INIT_PRECISION    # weight precision
    gram = Xc.T @ Xc
    xty = Xc.T @ yc
    eye = np.eye(p)
    m = np.zeros(p)
    for _ in range(max_iter):
        cov = np.linalg.inv(alpha * gram + lam * eye)
        m = alpha * cov @ xty
        # effective number of well-determined parameters
        gamma = float(p - lam * np.trace(cov))
        gamma = min(max(gamma, 1e-12), p - 1e-12) if p > 0 else 0.0
        mm = float(m @ m)
        rss = float(np.sum((yc - Xc @ m) ** 2))
        new_lam = gamma / max(mm, 1e-12)
        new_alpha = max(n - gamma, 1e-12) / max(rss, 1e-12)
        change = max(
            abs(new_lam - lam) / max(abs(lam), 1e-12),
            abs(new_alpha - alpha) / max(abs(alpha), 1e-12),
        )
        lam, alpha = new_lam, new_alpha
        if change < tol:
            break
    cov = np.linalg.inv(alpha * gram + lam * eye)
    m = alpha * cov @ xty
    intercept = y_mean - float(x_mean @ m)
    return RidgeFit(m, intercept, alpha=alpha, lam=lam)


@dataclass(frozen=True)
class ColumnImputer:
    """Frozen regressor filling one column from all others."""

    code: str
    fit: RidgeFit
    fill_mean: float  # training column mean, the initial fill

    def to_dict(self) -> dict:
        return {"code": self.code, "fit": self.fit.to_dict(),
                "fill_mean": self.fill_mean}

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnImputer":
        return cls(d["code"], RidgeFit.from_dict(d["fit"]), d["fill_mean"])


def drop_high_null(
    train: Dataset, threshold: float = DEFAULT_NULL_THRESHOLD
) -> tuple[Dataset, list[str]]:
    """Drop feature columns whose missing fraction strictly exceeds threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    profile = missing_profile(train)
    dropped = [code for code, frac in profile.items() if frac > threshold]
    if len(dropped) == len(train.feature_codes):
        raise ValueError(
            f"all feature columns exceed the {threshold:.0%} null threshold"
        )
    return train.drop_features(dropped), dropped


@dataclass(frozen=True)
class OrdinalEncoder:
    """Category-name to integer-code maps per ordinal column.

    Position in the declared category order is the code: worst category is 0,
    better categories get larger codes.
    """

    maps: dict[str, dict[str, int]]

    def encode(self, code: str, category: str) -> int:
        try:
            mapping = self.maps[code]
        except KeyError:
            raise KeyError(f"column {code!r} is not ordinal-encoded") from None
        try:
            return mapping[category]
        except KeyError:
            raise ValueError(
                f"column {code!r}: unseen category {category!r} "
                f"(declared: {list(mapping)})"
            ) from None

    def decode(self, code: str, value: int) -> str:
        mapping = self.maps[code]
        for cat, v in mapping.items():
            if v == int(value):
                return cat
        raise ValueError(f"column {code!r}: code {value} out of range")

    def code_range(self, code: str) -> tuple[int, int]:
        vals = self.maps[code].values()
        return min(vals), max(vals)

    def to_dict(self) -> dict:
        return {"maps": self.maps}

    @classmethod
    def from_dict(cls, d: dict) -> "OrdinalEncoder":
        return cls({c: {k: int(v) for k, v in m.items()}
                    for c, m in d["maps"].items()})


def fit_ordinal_encoder(schema: Schema) -> OrdinalEncoder:
    """Derive the category -> integer maps from declared category order."""
    maps = {
        col.code: {cat: i for i, cat in enumerate(col.categories)}
        for col in schema.feature_columns
        if col.kind == "ordinal"
    }
    return OrdinalEncoder(maps)


def apply_encoding(ds: Dataset, encoders: OrdinalEncoder) -> Dataset:
    """Validate that every observed ordinal cell holds an in-range code.

    CSV ingestion already maps category names to codes, so this step is a
    range check: any observed ordinal value outside the declared code range
    is an unseen category and raises, reporting row and column.
    """
    for code in ds.feature_codes:
        if code not in encoders.maps:
            continue
        lo, hi = encoders.code_range(code)
        vals, mask = ds.column_values(code)
        observed = ~mask
        bad = observed & ((vals < lo) | (vals > hi))
        if bad.any():
            row = int(np.nonzero(bad)[0][0])
            raise ValueError(
                f"column {code!r}, row {row}: value {vals[row]!r} outside the "
                f"declared code range [{lo}, {hi}] (unseen category)"
            )
    return ds


def iterative_impute(
    train: Dataset,
    max_rounds: int = IMPUTE_MAX_ROUNDS,
    tol: float = IMPUTE_TOL,
    single_pass: bool = False,
) -> tuple[Dataset, list[ColumnImputer]]:
    """Fill missing cells by round-robin Bayesian-ridge regression.

    Columns are processed in ascending missing-count order. Each column's
    missing cells are predicted from all other columns, which start at their
    training means and improve as rounds progress. Rounds repeat until the
    largest absolute change of any imputed cell drops below ``tol`` (or one
    ordered pass when ``single_pass``). Imputed ordinal cells are rounded and
    clipped to the declared code range at the end.
    """
    values = train.values.copy()
    mask = train.missing_mask.copy()
    if not mask.any():
        return train, []

    empty_rows = mask.all(axis=1)
    if empty_rows.any():
        warnings.warn(
            f"{int(empty_rows.sum())} rows are missing every feature; "
            "filling them with column means"
        )

    col_means = np.array([
        np.nanmean(values[:, j]) if not mask[:, j].all() else 0.0
        for j in range(values.shape[1])
    ])
    filled = values.copy()
    for j in range(values.shape[1]):
        filled[mask[:, j], j] = col_means[j]

    counts = mask.sum(axis=0)
    order = [int(j) for j in np.argsort(counts, kind="stable") if counts[j] > 0]

    fits: dict[int, RidgeFit] = {}
    rounds = 1 if single_pass else max_rounds
    for _ in range(rounds):
        max_change = 0.0
        for j in order:
            others = [k for k in range(filled.shape[1]) if k != j]
            observed = ~mask[:, j]
            target_rows = mask[:, j]
            if observed.sum() >= 2 and np.ptp(filled[observed, j]) > 0.0 and others:
                fit = fit_bayesian_ridge(filled[observed][:, others],
                                         filled[observed, j])
            else:
                fit = RidgeFit(np.zeros(len(others)), col_means[j],
                               alpha=RIDGE_INIT_PRECISION, lam=1.0)
            fits[j] = fit
            if target_rows.any():
                pred = fit.predict(filled[target_rows][:, others])
                max_change = max(
                    max_change, float(np.max(np.abs(pred - filled[target_rows, j])))
                )
                filled[target_rows, j] = pred
        if max_change < tol:
            break

    _round_ordinals(filled, mask, train.schema)
    imputers = [
        ColumnImputer(train.feature_codes[j], fits[j], float(col_means[j]))
        for j in order
    ]
    out = train.replace_data(filled)
    return out, imputers


def apply_imputers(ds: Dataset, imputers: Sequence[ColumnImputer],
                   max_rounds: int = IMPUTE_MAX_ROUNDS,
                   tol: float = IMPUTE_TOL) -> Dataset:
    """Replay frozen imputation regressors on another split.

    Initial fill is the stored training mean; stored regressors then iterate
    to a fixed point. Columns without a stored imputer fall back to their
    training mean when available, else stay mean-filled at zero.
    """
    if not ds.missing_mask.any():
        return ds
    values = ds.values.copy()
    mask = ds.missing_mask.copy()
    by_code = {imp.code: imp for imp in imputers}
    codes = ds.feature_codes

    fill = np.zeros(len(codes))
    for j, code in enumerate(codes):
        if code in by_code:
            fill[j] = by_code[code].fill_mean
        else:
            observed = ~mask[:, j]
            fill[j] = float(values[observed, j].mean()) if observed.any() else 0.0
    filled = values.copy()
    for j in range(len(codes)):
        filled[mask[:, j], j] = fill[j]

    ordered = [ds.feature_index(imp.code) for imp in imputers
               if imp.code in codes]
    for _ in range(max_rounds):
        max_change = 0.0
        for j in ordered:
            imp = by_code[codes[j]]
            rows = mask[:, j]
            if not rows.any():
                continue
            others = [k for k in range(filled.shape[1]) if k != j]
            pred = imp.fit.predict(filled[rows][:, others])
            max_change = max(max_change,
                             float(np.max(np.abs(pred - filled[rows, j]))))
            filled[rows, j] = pred
        if max_change < tol:
            break

    _round_ordinals(filled, mask, ds.schema)
    return ds.replace_data(filled)


def _round_ordinals(filled: np.ndarray, was_missing: np.ndarray,
                    schema: Schema) -> None:
    """Round imputed ordinal cells to the nearest declared code, in place."""
    for j, col in enumerate(schema.feature_columns):
        if col.kind != "ordinal":
            continue
        rows = was_missing[:, j]
        if rows.any():
            hi = len(col.categories) - 1
            filled[rows, j] = np.clip(np.rint(filled[rows, j]), 0, hi)


def drop_zero_variance(train: Dataset) -> tuple[Dataset, list[str]]:
    """Drop feature columns whose observed training values are constant."""
    dropped = []
    for code in train.feature_codes:
        vals, mask = train.column_values(code)
        observed = vals[~mask]
        if observed.size == 0 or np.ptp(observed) == 0.0:
            dropped.append(code)
    if len(dropped) == len(train.feature_codes):
        raise ValueError("all feature columns have zero variance")
    return train.drop_features(dropped), dropped


@dataclass(frozen=True)
class OutlierStats:
    """Per-column training mean, sample std (n-1), and median."""

    codes: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray
    median: np.ndarray

    def to_dict(self) -> dict:
        return {"codes": list(self.codes), "mean": self.mean.tolist(),
                "std": self.std.tolist(), "median": self.median.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "OutlierStats":
        return cls(tuple(d["codes"]), np.array(d["mean"]), np.array(d["std"]),
                   np.array(d["median"]))


def fit_outlier_stats(train: Dataset) -> OutlierStats:
    X = train.feature_matrix()
    n = X.shape[0]
    std = X.std(axis=0, ddof=1) if n > 1 else np.zeros(X.shape[1])
    return OutlierStats(
        codes=train.feature_codes,
        mean=X.mean(axis=0),
        std=std,
        median=np.median(X, axis=0),
    )


def clamp_outliers(ds: Dataset, stats: OutlierStats) -> Dataset:
    """Replace values strictly outside mean +/- 2 std with the training median.

    Single pass with the frozen training statistics; zero-std columns are
    untouched, as are boundary values (strict inequalities).
    """
    if tuple(ds.feature_codes) != tuple(stats.codes):
        raise ValueError("outlier stats were fit on different columns")
    X = ds.values.copy()
    lo = stats.mean - 2.0 * stats.std
    hi = stats.mean + 2.0 * stats.std
    active = stats.std > 0.0
    outlier = ((X < lo) | (X > hi)) & active & ~ds.missing_mask
    X[outlier] = np.broadcast_to(stats.median, X.shape)[outlier]
    return ds.replace_data(X, ds.missing_mask.copy())


@dataclass(frozen=True)
class FittedPreprocessor:
    """The frozen preprocessing chain learned on a training split."""

    dropped_high_null: tuple[str, ...]
    encoders: OrdinalEncoder
    imputers: tuple[ColumnImputer, ...]
    dropped_zero_variance: tuple[str, ...]
    outlier_stats: OutlierStats
    null_threshold: float = DEFAULT_NULL_THRESHOLD
    impute_max_rounds: int = IMPUTE_MAX_ROUNDS
    impute_tol: float = IMPUTE_TOL

    @property
    def output_codes(self) -> tuple[str, ...]:
        return self.outlier_stats.codes

    def apply(self, ds: Dataset) -> Dataset:
        """Replay the chain on any split using only stored training state."""
        out = ds.drop_features(
            [c for c in self.dropped_high_null if c in ds.feature_codes]
        )
        out = apply_encoding(out, self.encoders)
        out = apply_imputers(out, self.imputers,
                             self.impute_max_rounds, self.impute_tol)
        out = out.drop_features(
            [c for c in self.dropped_zero_variance if c in out.feature_codes]
        )
        return clamp_outliers(out, self.outlier_stats)

    def to_dict(self) -> dict:
        return {
            "dropped_high_null": list(self.dropped_high_null),
            "encoders": self.encoders.to_dict(),
            "imputers": [imp.to_dict() for imp in self.imputers],
            "dropped_zero_variance": list(self.dropped_zero_variance),
            "outlier_stats": self.outlier_stats.to_dict(),
            "null_threshold": self.null_threshold,
            "impute_max_rounds": self.impute_max_rounds,
            "impute_tol": self.impute_tol,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FittedPreprocessor":
        return cls(
            dropped_high_null=tuple(d["dropped_high_null"]),
            encoders=OrdinalEncoder.from_dict(d["encoders"]),
            imputers=tuple(ColumnImputer.from_dict(i) for i in d["imputers"]),
            dropped_zero_variance=tuple(d["dropped_zero_variance"]),
            outlier_stats=OutlierStats.from_dict(d["outlier_stats"]),
            null_threshold=d["null_threshold"],
            impute_max_rounds=d["impute_max_rounds"],
            impute_tol=d["impute_tol"],
        )


def fit_preprocessor(
    train: Dataset,
    null_threshold: float = DEFAULT_NULL_THRESHOLD,
    impute_max_rounds: int = IMPUTE_MAX_ROUNDS,
    impute_tol: float = IMPUTE_TOL,
    single_pass_impute: bool = False,
) -> tuple[FittedPreprocessor, Dataset]:
    """Fit the whole chain on the training split and return it transformed."""
    ds, dropped_null = drop_high_null(train, null_threshold)
    encoders = fit_ordinal_encoder(ds.schema)
    ds = apply_encoding(ds, encoders)
    ds, imputers = iterative_impute(ds, impute_max_rounds, impute_tol,
                                    single_pass=single_pass_impute)
    ds, dropped_zv = drop_zero_variance(ds)
    stats = fit_outlier_stats(ds)
    ds = clamp_outliers(ds, stats)
    pre = FittedPreprocessor(
        dropped_high_null=tuple(dropped_null),
        encoders=encoders,
        imputers=tuple(imputers),
        dropped_zero_variance=tuple(dropped_zv),
        outlier_stats=stats,
        null_threshold=null_threshold,
        impute_max_rounds=impute_max_rounds,
        impute_tol=impute_tol,
    )
    return pre, ds
