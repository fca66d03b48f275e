"""Dataset container, CSV ingestion, seeded splitting, and synthetic data generation.

All tabular data flows through :class:`Dataset`: a row-major float matrix of
feature values (ordinal category codes or raw numerics), a boolean mask marking
missing cells, and an optional binary label vector. Datasets are immutable
after construction; every randomized operation takes an explicit seed.
"""
from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

CLASS_NAMES = ("Discontent", "Content")

DEFAULT_MISSING_MARKERS = ("", "NA", "NaN")

COLUMN_KINDS = ("ordinal", "numeric", "label")


class ParseError(ValueError):
    """Raised when a CSV file cannot be bound to a schema."""


@dataclass(frozen=True)
class ColumnMeta:
    """Metadata for one survey column.

    Args:
        code: Short identifier, e.g. "A2" (also the CSV header name).
        prompt: Human-readable question text.
        kind: One of "ordinal", "numeric", "label".
        categories: Ordered category names for ordinal columns, worst first.
            The category at position k encodes to integer k.
        domain: Optional life-domain grouping (physical, mental, economic,
            social, cultural) used by questionnaire exports.
    """

    code: str
    prompt: str = ""
    kind: str = "ordinal"
    categories: tuple[str, ...] = ()
    domain: str = ""

    def __post_init__(self) -> None:
        if not self.code:
            raise ValueError("column code cannot be empty")
        if self.kind not in COLUMN_KINDS:
            raise ValueError(f"column {self.code!r}: unknown kind {self.kind!r}")
        object.__setattr__(self, "categories", tuple(self.categories))
        if self.kind == "ordinal" and len(self.categories) < 2:
            raise ValueError(f"ordinal column {self.code!r} needs >= 2 categories")
        if self.kind == "numeric" and self.categories:
            raise ValueError(f"numeric column {self.code!r} cannot declare categories")


@dataclass(frozen=True)
class Schema:
    """Ordered column metadata plus the binary target designation.

    ``label_threshold`` controls how raw target values binarize at parse time:
    raw >= threshold maps to class 1 (Content). When None, target cells must
    already be 0/1 integers or class names.
    """

    columns: tuple[ColumnMeta, ...]
    target_code: str
    label_threshold: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        codes = [c.code for c in self.columns]
        if len(set(codes)) != len(codes):
            dupes = sorted({c for c in codes if codes.count(c) > 1})
            raise ValueError(f"duplicate column codes: {dupes}")
        if self.target_code not in codes:
            raise ValueError(f"target code {self.target_code!r} not among columns")

    @property
    def feature_columns(self) -> tuple[ColumnMeta, ...]:
        return tuple(c for c in self.columns if c.kind != "label")

    @property
    def feature_codes(self) -> tuple[str, ...]:
        return tuple(c.code for c in self.feature_columns)

    @property
    def target(self) -> ColumnMeta:
        return next(c for c in self.columns if c.code == self.target_code)

    def column(self, code: str) -> ColumnMeta:
        for c in self.columns:
            if c.code == code:
                return c
        raise KeyError(f"no column {code!r} in schema")

    def select_features(self, codes: Sequence[str]) -> "Schema":
        """Return a schema restricted to the given feature codes (plus target)."""
        keep = set(codes)
        unknown = keep - set(self.feature_codes)
        if unknown:
            raise KeyError(f"unknown feature codes: {sorted(unknown)}")
        columns = tuple(
            c for c in self.columns if c.code in keep or c.kind == "label"
        )
        return Schema(columns, self.target_code, self.label_threshold)

    def drop_features(self, codes: Sequence[str]) -> "Schema":
        drop = set(codes)
        return self.select_features([c for c in self.feature_codes if c not in drop])

    def to_dict(self) -> dict:
        return {
            "target_code": self.target_code,
            "label_threshold": self.label_threshold,
            "columns": [
                {
                    "code": c.code,
                    "prompt": c.prompt,
                    "kind": c.kind,
                    "categories": list(c.categories),
                    "domain": c.domain,
                }
                for c in self.columns
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        columns = tuple(
            ColumnMeta(
                code=c["code"],
                prompt=c.get("prompt", ""),
                kind=c.get("kind", "ordinal"),
                categories=tuple(c.get("categories") or ()),
                domain=c.get("domain", ""),
            )
            for c in d["columns"]
        )
        return cls(columns, d["target_code"], d.get("label_threshold"))

    @classmethod
    def from_file(cls, path: str | Path) -> "Schema":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix in (".yaml", ".yml"):
            import yaml

            return cls.from_dict(yaml.safe_load(text))
        return cls.from_dict(json.loads(text))

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )


@dataclass(frozen=True)
class Dataset:
    """Immutable row-major table of encoded survey responses.

    ``values`` holds one column per schema feature column (the label column
    lives in ``labels``). Missing cells are NaN in ``values`` and True in
    ``missing_mask``; all statistics must skip masked cells.
    """

    schema: Schema
    values: np.ndarray
    missing_mask: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        # copy before freezing so caller arrays stay writable
        values = np.array(self.values, dtype=np.float64, copy=True)
        mask = np.array(self.missing_mask, dtype=bool, copy=True)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        if values.shape != mask.shape:
            raise ValueError(
                f"values shape {values.shape} != missing_mask shape {mask.shape}"
            )
        n_feat = len(self.schema.feature_columns)
        if values.shape[1] != n_feat:
            raise ValueError(
                f"values has {values.shape[1]} columns, schema declares {n_feat}"
            )
        labels = self.labels
        if labels is not None:
            labels = np.array(labels, dtype=np.int64, copy=True)
            if labels.shape != (values.shape[0],):
                raise ValueError("label count must equal row count")
        for arr in (values, mask) + ((labels,) if labels is not None else ()):
            arr.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "missing_mask", mask)
        object.__setattr__(self, "labels", labels)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def feature_codes(self) -> tuple[str, ...]:
        return self.schema.feature_codes

    def feature_index(self, code: str) -> int:
        try:
            return self.schema.feature_codes.index(code)
        except ValueError:
            raise KeyError(f"no feature column {code!r}") from None

    def column_values(self, code: str) -> tuple[np.ndarray, np.ndarray]:
        """Return (values, missing_mask) for one feature column."""
        j = self.feature_index(code)
        return self.values[:, j], self.missing_mask[:, j]

    def feature_matrix(self) -> np.ndarray:
        """Writable copy of the value matrix; raises if any cell is missing."""
        if self.missing_mask.any():
            raise ValueError("dataset still has missing cells")
        return self.values.copy()

    def take(self, indices: Sequence[int] | np.ndarray) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self.schema,
            self.values[idx],
            self.missing_mask[idx],
            None if self.labels is None else self.labels[idx],
        )

    def select_features(self, codes: Sequence[str]) -> "Dataset":
        """Subset feature columns, preserving schema order."""
        schema = self.schema.select_features(codes)
        cols = [self.feature_index(c) for c in schema.feature_codes]
        return Dataset(
            schema, self.values[:, cols], self.missing_mask[:, cols], self.labels
        )

    def drop_features(self, codes: Sequence[str]) -> "Dataset":
        drop = set(codes)
        return self.select_features(
            [c for c in self.feature_codes if c not in drop]
        )

    def replace_data(
        self,
        values: np.ndarray,
        missing_mask: Optional[np.ndarray] = None,
        labels: Optional[np.ndarray] = "unchanged",  # type: ignore[assignment]
    ) -> "Dataset":
        """Same schema, new cell contents."""
        if missing_mask is None:
            missing_mask = np.zeros_like(np.asarray(values, dtype=float), dtype=bool)
        if isinstance(labels, str) and labels == "unchanged":
            labels = self.labels
        return Dataset(self.schema, values, missing_mask, labels)


@dataclass(frozen=True)
class SplitPair:
    """A seeded train/test partition of one dataset."""

    train: Dataset
    test: Dataset
    seed: int


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for planted-signal synthetic data used by tests and demos.

    The label is a monotone function of the informative columns only: rows
    whose informative sum falls in the bottom ``minority`` quantile are class
    0 (Discontent), the rest class 1. ``class_imbalance_ratio`` is the
    minority/majority count ratio.
    """

    n_rows: int = 1000
    n_informative: int = 3
    n_noise: int = 7
    class_imbalance_ratio: float = 1.0
    missing_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_rows < 2 or self.n_informative < 1 or self.n_noise < 0:
            raise ValueError("need n_rows >= 2, n_informative >= 1, n_noise >= 0")
        if not 0.0 < self.class_imbalance_ratio <= 1.0:
            raise ValueError("class_imbalance_ratio must lie in (0, 1]")
        if not 0.0 <= self.missing_fraction < 1.0:
            raise ValueError("missing_fraction must lie in [0, 1)")


def parse_csv(
    path: str | Path,
    schema: Schema,
    missing_markers: Iterable[str] = DEFAULT_MISSING_MARKERS,
) -> Dataset:
    """Parse a comma-separated UTF-8 file against a schema.

    Ordinal cells may hold either a declared category name or an already
    encoded number; numeric cells must parse as numbers. Cells matching a
    missing marker set the missing mask. Header columns not in the schema are
    ignored with a warning. The target column is optional (unlabeled data).
    """
    path = Path(path)
    markers = set(missing_markers)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            dupes = sorted({h for h in header if header.count(h) > 1})
            raise ParseError(f"{path}: duplicate header codes {dupes}")
        positions: dict[str, int] = {h: i for i, h in enumerate(header)}
        feature_cols = schema.feature_columns
        missing_codes = [c.code for c in feature_cols if c.code not in positions]
        if missing_codes:
            raise ParseError(
                f"{path}: header is missing schema columns {missing_codes}"
            )
        extra = [h for h in header if h not in {c.code for c in schema.columns}]
        if extra:
            warnings.warn(f"{path}: ignoring columns not in schema: {extra}")
        has_labels = schema.target_code in positions

        rows: list[list[float]] = []
        mask_rows: list[list[bool]] = []
        labels: list[int] = []
        for row_no, row in enumerate(reader, start=2):
            vals: list[float] = []
            miss: list[bool] = []
            for col in feature_cols:
                cell = row[positions[col.code]].strip()
                if cell in markers:
                    vals.append(np.nan)
                    miss.append(True)
                    continue
                miss.append(False)
                vals.append(_parse_cell(cell, col, path, row_no))
            rows.append(vals)
            mask_rows.append(miss)
            if has_labels:
                cell = row[positions[schema.target_code]].strip()
                labels.append(_parse_label(cell, schema, path, row_no))

    n = len(rows)
    values = np.array(rows, dtype=np.float64).reshape(n, len(feature_cols))
    mask = np.array(mask_rows, dtype=bool).reshape(n, len(feature_cols))
    return Dataset(schema, values, mask, np.array(labels) if has_labels else None)


def _parse_cell(cell: str, col: ColumnMeta, path: Path, row_no: int) -> float:
    if col.kind == "ordinal" and cell in col.categories:
        return float(col.categories.index(cell))
    try:
        return float(cell)
    except ValueError:
        raise ParseError(
            f"{path}: row {row_no}, column {col.code!r}: cannot parse {cell!r}"
        ) from None


def _parse_label(cell: str, schema: Schema, path: Path, row_no: int) -> int:
    if cell in CLASS_NAMES:
        return CLASS_NAMES.index(cell)
    try:
        raw = float(cell)
    except ValueError:
        raise ParseError(
            f"{path}: row {row_no}, target column: cannot parse {cell!r}"
        ) from None
    if schema.label_threshold is not None:
        return int(raw >= schema.label_threshold)
    if raw not in (0.0, 1.0):
        raise ParseError(
            f"{path}: row {row_no}, target column: value {cell!r} is not 0/1 "
            "and no label_threshold is configured"
        )
    return int(raw)


def write_csv(ds: Dataset, path: str | Path) -> None:
    """Write a dataset back to CSV.

    Integral ordinal codes render as their category names and labels render as
    class names, so ``parse_csv(write_csv(ds))`` round-trips bit-exactly for
    schemas without a label threshold. Missing cells write as empty strings.
    """
    path = Path(path)
    feature_cols = ds.schema.feature_columns
    header = [c.code for c in feature_cols]
    if ds.labels is not None:
        header.append(ds.schema.target_code)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(ds.n_rows):
            row: list[str] = []
            for j, col in enumerate(feature_cols):
                if ds.missing_mask[i, j]:
                    row.append("")
                    continue
                row.append(_format_cell(float(ds.values[i, j]), col))
            if ds.labels is not None:
                row.append(CLASS_NAMES[int(ds.labels[i])])
            writer.writerow(row)


def _format_cell(v: float, col: ColumnMeta) -> str:
    if col.kind == "ordinal" and v.is_integer() and 0 <= int(v) < len(col.categories):
        return col.categories[int(v)]
    if v.is_integer():
        return str(int(v))
    return repr(v)


def shuffle_split(ds: Dataset, train_fraction: float = 0.8, seed: int = 0) -> SplitPair:
    """Shuffle rows with a seeded permutation and split train/test.

    Plain shuffling, no stratification. Train size is round(fraction * n),
    clamped so both sides are non-empty.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = ds.n_rows
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(train_fraction * n))
    n_train = min(max(n_train, 1), n - 1)
    return SplitPair(ds.take(perm[:n_train]), ds.take(perm[n_train:]), seed)


def missing_profile(ds: Dataset) -> dict[str, float]:
    """Per-column missing fraction (masked cells / rows)."""
    n = ds.n_rows
    if n == 0:
        return {code: 0.0 for code in ds.feature_codes}
    fractions = ds.missing_mask.sum(axis=0) / n
    return dict(zip(ds.feature_codes, fractions.tolist()))


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Generate a planted-signal dataset, fully deterministic in the seed.

    Informative columns are continuous uniforms whose sum drives the label via
    a quantile threshold (exact class counts). Noise columns are independent
    of the label. Missing cells are injected uniformly over feature cells.
    """
    rng = np.random.default_rng(spec.seed)
    n, k, m = spec.n_rows, spec.n_informative, spec.n_noise
    r = spec.class_imbalance_ratio
    n_minority = int(round(n * r / (1.0 + r)))
    if n_minority < 1 or n - n_minority < 1:
        raise ValueError(
            f"impossible spec: ratio {r} with {n} rows leaves an empty class"
        )

    values = rng.uniform(0.0, 1.0, size=(n, k + m))
    score = values[:, :k].sum(axis=1)
    order = np.argsort(score, kind="stable")
    labels = np.ones(n, dtype=np.int64)
    labels[order[:n_minority]] = 0  # lowest informative sums -> Discontent

    mask = np.zeros((n, k + m), dtype=bool)
    if spec.missing_fraction > 0.0:
        mask = rng.uniform(size=(n, k + m)) < spec.missing_fraction
        values = values.copy()
        values[mask] = np.nan

    columns = [
        ColumnMeta(code=f"inf{i + 1}", prompt=f"informative feature {i + 1}",
                   kind="numeric")
        for i in range(k)
    ] + [
        ColumnMeta(code=f"noise{i + 1}", prompt=f"noise feature {i + 1}",
                   kind="numeric")
        for i in range(m)
    ] + [ColumnMeta(code="label", kind="label", categories=CLASS_NAMES)]
    schema = Schema(tuple(columns), target_code="label")
    return Dataset(schema, values, mask, labels)


def dataset_from_arrays(
    X: np.ndarray,
    y: Optional[np.ndarray] = None,
    codes: Optional[Sequence[str]] = None,
    kinds: Optional[Sequence[str]] = None,
) -> Dataset:
    """Wrap bare arrays in a Dataset with an auto-generated numeric schema."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    d = X.shape[1]
    if codes is None:
        codes = [f"f{i + 1}" for i in range(d)]
    if kinds is None:
        kinds = ["numeric"] * d
    columns = [
        ColumnMeta(code=c, kind=k) if k != "ordinal"
        else ColumnMeta(code=c, kind="ordinal", categories=("c0", "c1", "c2", "c3", "c4"))
        for c, k in zip(codes, kinds)
    ]
    columns.append(ColumnMeta(code="label", kind="label", categories=CLASS_NAMES))
    schema = Schema(tuple(columns), target_code="label")
    mask = np.isnan(X)
    return Dataset(schema, X, mask, None if y is None else np.asarray(y))
