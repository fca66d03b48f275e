from __future__ import annotations

import numpy as np
import pytest

from lifesat.data import CLASS_NAMES, ColumnMeta, Dataset, Schema


@pytest.fixture
def health_schema() -> Schema:
    """Small ordinal schema in the survey style used across tests."""
    return Schema(
        columns=(
            ColumnMeta("A2", "How would you rate your health generally?",
                       "ordinal", ("Very poor", "Poor", "Well", "Very well")),
            ColumnMeta("D8", "Do you worry a lot?", "ordinal",
                       ("Never", "Rarely", "Sometimes", "Often", "Always")),
            ColumnMeta("E1", "How tall are you?", "numeric"),
            ColumnMeta("satisfaction", "Life satisfaction", "label",
                       CLASS_NAMES),
        ),
        target_code="satisfaction",
    )


def make_dataset(X, y=None, schema=None, mask=None):
    from lifesat.data import dataset_from_arrays

    X = np.asarray(X, dtype=float)
    if schema is not None:
        if mask is None:
            mask = np.isnan(X)
        return Dataset(schema, X, mask, None if y is None else np.asarray(y))
    return dataset_from_arrays(X, y)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def lifewell_synthetic(n=400, seed=0) -> Dataset:
    """Random LifeWell answers with a monotone satisfaction rule."""
    from lifesat.lifewell import lifewell_schema

    schema = lifewell_schema()
    rng = np.random.default_rng(seed)
    cols = schema.feature_columns
    values = np.empty((n, len(cols)))
    for j, col in enumerate(cols):
        if col.kind == "ordinal":
            values[:, j] = rng.integers(0, len(col.categories), size=n)
        elif col.code == "age":
            values[:, j] = rng.integers(16, 65, size=n)
        elif col.code == "E1":
            values[:, j] = rng.normal(172, 9, size=n).round()
        elif col.code == "E2":
            values[:, j] = rng.normal(75, 12, size=n).round()
        else:  # F15 and any other 0-10 scale
            values[:, j] = rng.integers(0, 11, size=n)
    codes = [c.code for c in cols]
    a2 = values[:, codes.index("A2")]
    m8 = values[:, codes.index("M8")]
    d2 = values[:, codes.index("D2")]
    score = a2 / 3.0 + m8 / 4.0 + (4.0 - d2) / 4.0 + rng.normal(0, 0.2, n)
    labels = (score > np.median(score)).astype(np.int64)
    return Dataset(schema, values, np.zeros(values.shape, bool), labels)


@pytest.fixture(scope="session")
def lifewell_artifact(tmp_path_factory):
    """A small fitted artifact over all 27 LifeWell questions."""
    import json

    from lifesat.artifact import save_artifact
    from lifesat.data import write_csv
    from lifesat.pipeline import PipelineConfig, run_training

    data_dir = tmp_path_factory.mktemp("lifewell")
    csv_path = data_dir / "answers.csv"
    write_csv(lifewell_synthetic(n=400, seed=11), csv_path)

    config = PipelineConfig(
        data_path=str(csv_path),
        schema_path="lifewell",
        n_seeds=1,
        seeds=(21,),
        resample_mode="dual",
        selection_mode="none",
        roster=(
            {"name": "RF", "kind": "random_forest",
             "params": {"n_estimators": 12, "max_depth": 6,
                        "max_features": "log2"}},
            {"name": "GB", "kind": "gradient_boosting",
             "params": {"n_estimators": 25, "learning_rate": 0.3,
                        "max_depth": 1}},
            {"name": "LGB", "kind": "gradient_boosting",
             "params": {"n_estimators": 15, "learning_rate": 0.15,
                        "growth_mode": "leafwise", "num_leaves": 8}},
        ),
        figures=False,
    )
    artifact, _ = run_training(config)
    path = data_dir / "artifact.json"
    save_artifact(artifact, path)
    return {"artifact": artifact, "path": path, "csv": csv_path,
            "config": config}
