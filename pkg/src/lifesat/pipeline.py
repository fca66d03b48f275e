"""Config-driven orchestration: split, preprocess, resample, select, fit,
evaluate over repeated seeds, plus cohort analysis and the ablation grids.

A leakage auditor hashes every held-out row and asserts, at each fit or
resample entry point, that no test row ever flows in.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import learners
from .artifact import ModelArtifact
from .data import Dataset, Schema, SynthSpec, generate_synthetic, parse_csv, shuffle_split
from .explain import fit_discretizer
from .lifewell import lifewell_schema
from .metrics import EvaluationReport, error_breakdown, evaluate_model, mean_std_report
from .preprocess import fit_preprocessor
from .resample import ResamplePlan, dual_resample, random_undersample, smote_oversample
from .selection import fit_pca, impurity_importances, rfecv
from .tuning import ParamSpace, grid_search, random_search

RESAMPLE_MODES = ("none", "over_only", "under_only", "dual")
SELECTION_MODES = ("rfecv", "pca95", "pca90", "none")
DEFAULT_SEEDS = (21, 42, 63, 84, 105)

DEFAULT_ROSTER = (
    {"name": "RF", "kind": "random_forest",
     "params": {"n_estimators": 60, "max_features": "log2", "max_depth": 12}},
    {"name": "GB", "kind": "gradient_boosting",
     "params": {"n_estimators": 120, "learning_rate": 0.3, "max_depth": 1}},
    {"name": "LGB", "kind": "gradient_boosting",
     "params": {"n_estimators": 60, "learning_rate": 0.1,
                "growth_mode": "leafwise", "num_leaves": 15,
                "feature_fraction": 0.9}},
)


@dataclass
class PipelineConfig:
    """Everything a full study run needs; loadable from JSON or YAML."""

    data_path: Optional[str] = None
    schema_path: Optional[str] = None  # file path or the builtin "lifewell"
    synthetic: Optional[dict] = None   # SynthSpec kwargs when data_path is None
    train_fraction: float = 0.8
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    n_seeds: int = 5
    null_threshold: float = 0.20
    impute_max_rounds: int = 10
    impute_tol: float = 1e-3
    resample_mode: str = "dual"
    smote_target_ratio: float = 0.40
    smote_k: int = 5
    selection_mode: str = "rfecv"
    rfecv_folds: int = 5
    rfecv_step: int = 1
    rfecv_estimator: dict = field(
        default_factory=lambda: {"n_estimators": 100, "max_features": "sqrt"}
    )
    roster: tuple[dict, ...] = DEFAULT_ROSTER
    ensemble_members: tuple[str, ...] = ("RF", "GB", "LGB")
    tuning: Optional[dict] = None  # {model name: {mode, grid/ranges, n_iter, k}}
    explain_samples: int = 2000
    output_dir: str = "output"
    figures: bool = True
    audit: bool = True

    def __post_init__(self) -> None:
        if self.resample_mode not in RESAMPLE_MODES:
            raise ValueError(
                f"resample_mode {self.resample_mode!r} not in {RESAMPLE_MODES}"
            )
        if self.selection_mode not in SELECTION_MODES:
            raise ValueError(
                f"selection_mode {self.selection_mode!r} not in {SELECTION_MODES}"
            )
        if not 1 <= self.n_seeds <= len(self.seeds):
            raise ValueError("n_seeds must fit within the seeds list")
        self.seeds = tuple(int(s) for s in self.seeds)
        self.roster = tuple(self.roster)
        self.ensemble_members = tuple(self.ensemble_members)
        names = [entry["name"] for entry in self.roster]
        if len(set(names)) != len(names):
            raise ValueError("roster names must be unique")
        for member in self.ensemble_members:
            if member not in names:
                raise ValueError(f"ensemble member {member!r} not in roster")

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        text = path.read_text(encoding="utf-8")
        if path.suffix in (".yaml", ".yml"):
            import yaml

            raw = yaml.safe_load(text)
        else:
            raw = json.loads(text)
        return cls(**raw)

    def to_dict(self) -> dict:
        return {
            "data_path": self.data_path,
            "schema_path": self.schema_path,
            "synthetic": self.synthetic,
            "train_fraction": self.train_fraction,
            "seeds": list(self.seeds),
            "n_seeds": self.n_seeds,
            "null_threshold": self.null_threshold,
            "impute_max_rounds": self.impute_max_rounds,
            "impute_tol": self.impute_tol,
            "resample_mode": self.resample_mode,
            "smote_target_ratio": self.smote_target_ratio,
            "smote_k": self.smote_k,
            "selection_mode": self.selection_mode,
            "rfecv_folds": self.rfecv_folds,
            "rfecv_step": self.rfecv_step,
            "rfecv_estimator": self.rfecv_estimator,
            "roster": [dict(r) for r in self.roster],
            "ensemble_members": list(self.ensemble_members),
            "tuning": self.tuning,
            "explain_samples": self.explain_samples,
            "output_dir": self.output_dir,
            "figures": self.figures,
            "audit": self.audit,
        }

    def fingerprint(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def load_dataset(self) -> Dataset:
        if self.data_path is not None:
            return parse_csv(self.data_path, self.load_schema())
        spec_kwargs = dict(self.synthetic or {})
        return generate_synthetic(SynthSpec(**spec_kwargs))

    def load_schema(self) -> Schema:
        if self.schema_path in (None, "lifewell"):
            return lifewell_schema()
        return Schema.from_file(self.schema_path)


class LeakageError(RuntimeError):
    """A held-out row reached a fit or resample input."""


class LeakageAuditor:
    """Hashes held-out rows and refuses their reuse in any fit input."""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self._test_hashes: set[str] = set()
        self.log: list[dict] = []

    @staticmethod
    def row_hashes(ds: Dataset) -> set[str]:
        values = np.ascontiguousarray(ds.values, dtype=np.float64)
        return {
            hashlib.sha256(values[i].tobytes()).hexdigest()
            for i in range(values.shape[0])
        }

    def register_test(self, ds: Dataset, stage: str) -> None:
        if not self.enabled:
            return
        hashes = self.row_hashes(ds)
        self._test_hashes |= hashes
        self.log.append({"event": "register_test", "stage": stage,
                         "rows": ds.n_rows})

    def check_fit_input(self, ds: Dataset, stage: str) -> None:
        if not self.enabled:
            return
        overlap = len(self.row_hashes(ds) & self._test_hashes)
        self.log.append({"event": "check_fit_input", "stage": stage,
                         "rows": ds.n_rows, "overlap": overlap})
        if overlap:
            raise LeakageError(
                f"{stage}: {overlap} held-out rows found in a fit input"
            )

    @property
    def test_hash_count(self) -> int:
        return len(self._test_hashes)


def apply_resampling(train: Dataset, config: PipelineConfig, seed: int) -> Dataset:
    plan = ResamplePlan(smote_target_ratio=config.smote_target_ratio,
                        smote_k=config.smote_k, seed=seed)
    if config.resample_mode == "none":
        return train
    if config.resample_mode == "over_only":
        return smote_oversample(train, plan)
    if config.resample_mode == "under_only":
        return random_undersample(train, seed=seed)
    return dual_resample(train, plan)


def _tuned_params(config: PipelineConfig, entry: dict, train: Dataset,
                  seed: int) -> dict:
    """Roster params, optionally overridden by a per-model search."""
    params = dict(entry.get("params", {}))
    spec = (config.tuning or {}).get(entry["name"])
    if not spec:
        return params
    space = ParamSpace(
        grid=spec.get("grid", {}),
        ranges=spec.get("ranges", {}),
        n_iter=spec.get("n_iter", 10),
        seed=seed,
    )
    search = grid_search if spec.get("mode", "grid") == "grid" else random_search
    result = search(space, entry["kind"], train, k=spec.get("k", 5),
                    metric=spec.get("metric", "macro_f1"))
    params.update(result.best_params)
    return params


def run_single(config: PipelineConfig, seed: int) -> dict:
    """One seeded end-to-end run; the unit shared by training and ablations."""
    ds = config.load_dataset()
    if ds.labels is None:
        raise ValueError("training requires a labeled dataset")
    pair = shuffle_split(ds, config.train_fraction, seed)
    auditor = LeakageAuditor(enabled=config.audit)
    auditor.register_test(pair.test, "raw")

    auditor.check_fit_input(pair.train, "preprocess.fit")
    pre, train_p = fit_preprocessor(
        pair.train,
        null_threshold=config.null_threshold,
        impute_max_rounds=config.impute_max_rounds,
        impute_tol=config.impute_tol,
    )
    test_p = pre.apply(pair.test)
    auditor.register_test(test_p, "preprocessed")
    n_features_after_preprocess = train_p.n_features

    auditor.check_fit_input(train_p, "resample")
    resampled = apply_resampling(train_p, config, seed)

    auditor.check_fit_input(resampled, "selection")
    pca_model = None
    rfecv_result = None
    if config.selection_mode == "rfecv":
        rfecv_result = rfecv(config.rfecv_estimator, resampled,
                             k_folds=config.rfecv_folds,
                             step=config.rfecv_step, seed=seed)
        selected = rfecv_result.selected_codes
        train_sel = resampled.select_features(selected)
        test_sel = test_p.select_features(selected)
    elif config.selection_mode in ("pca95", "pca90"):
        target = 0.95 if config.selection_mode == "pca95" else 0.90
        pca_model = fit_pca(resampled.feature_matrix(), target)
        selected = resampled.feature_codes
        train_sel = _project(resampled, pca_model)
        test_sel = _project(test_p, pca_model)
    else:
        selected = resampled.feature_codes
        train_sel = resampled
        test_sel = test_p

    auditor.check_fit_input(train_sel, "model.fit")
    X_train = train_sel.feature_matrix()
    y_train = train_sel.labels
    X_test = test_sel.feature_matrix()
    y_test = test_sel.labels

    models: dict[str, learners.ClassifierModel] = {}
    for entry in config.roster:
        params = _tuned_params(config, entry, train_sel, seed)
        models[entry["name"]] = learners.train_model(
            entry["kind"], X_train, y_train, seed=seed, **params
        )
    if config.ensemble_members:
        members = [models[name] for name in config.ensemble_members]
        models["Ensemble"] = learners.build_voting_ensemble(members)

    reports = {name: evaluate_model(model, X_test, y_test)
               for name, model in models.items()}

    # discretizer for explanations is fit on the unresampled training data
    if config.selection_mode in ("pca95", "pca90"):
        discretizer = fit_discretizer(_project(train_p, pca_model))
    else:
        discretizer = fit_discretizer(train_p.select_features(selected))

    return {
        "seed": seed,
        "models": models,
        "reports": reports,
        "preprocessor": pre,
        "selection_mode": config.selection_mode,
        "selected_codes": tuple(selected),
        "pca": pca_model,
        "rfecv": rfecv_result,
        "discretizer": discretizer,
        "test_split": test_sel,
        "audit_log": auditor.log,
        "diagnostics": {
            "n_features_after_preprocess": n_features_after_preprocess,
            "n_selected": pca_model.retained if pca_model is not None
            else len(selected),
            "test_rows": pair.test.n_rows,
            "train_rows_after_resample": resampled.n_rows,
        },
    }


def _project(ds: Dataset, pca_model) -> Dataset:
    from .data import ColumnMeta

    projected = pca_model.transform(ds.feature_matrix())
    columns = tuple(
        ColumnMeta(code=f"pc{i + 1}", prompt=f"principal component {i + 1}",
                   kind="numeric")
        for i in range(pca_model.retained)
    ) + (ds.schema.target,)
    schema = Schema(columns, ds.schema.target_code, ds.schema.label_threshold)
    return Dataset(schema, projected, np.zeros(projected.shape, dtype=bool),
                   ds.labels)


def run_training(config: PipelineConfig) -> tuple[ModelArtifact, dict]:
    """Repeat run_single over the configured seeds and aggregate.

    Returns the artifact built from the best seed (primary-model macro F1)
    and a results dict with per-seed bundles, aggregate rows, and diagnostics.
    """
    seeds = config.seeds[: config.n_seeds]
    bundles = [run_single(config, seed) for seed in seeds]

    model_names = list(bundles[0]["reports"])
    runs = {name: [b["reports"][name] for b in bundles] for name in model_names}
    aggregate = mean_std_report(runs)

    primary = "Ensemble" if "Ensemble" in model_names else model_names[0]
    best = max(bundles, key=lambda b: b["reports"][primary].macro_f1)
    original_schema = (config.load_schema() if config.data_path is not None
                       else config.load_dataset().schema)
    artifact = ModelArtifact(
        schema=original_schema,
        preprocessor=best["preprocessor"],
        selection_mode=best["selection_mode"],
        selected_codes=best["selected_codes"],
        pca=best["pca"],
        models=best["models"],
        primary_model=primary,
        discretizer=best["discretizer"],
        config_fingerprint=config.fingerprint(),
    )
    results = {
        "seeds": list(seeds),
        "aggregate": aggregate,
        "bundles": bundles,
        "best_seed": best["seed"],
        "primary_model": primary,
        "error_breakdown": error_breakdown(best["models"], best["test_split"]),
        "diagnostics": [b["diagnostics"] for b in bundles],
    }
    return artifact, results


@dataclass(frozen=True)
class CohortSpec:
    """Age brackets for the per-cohort determinant analysis."""

    brackets: tuple[tuple[str, int, int], ...] = (
        ("young age", 16, 21),
        ("early adulthood", 22, 34),
        ("middle age", 35, 44),
        ("old age", 45, 64),
    )
    top_k: int = 5
    age_code: str = "age"

    def __post_init__(self) -> None:
        spans = sorted((lo, hi, name) for name, lo, hi in self.brackets)
        for lo, hi, name in spans:
            if lo > hi:
                raise ValueError(f"bracket {name!r} has lo > hi")
        for (_, prev_hi, prev), (lo, _, name) in zip(spans, spans[1:]):
            if lo <= prev_hi:
                raise ValueError(f"brackets {prev!r} and {name!r} overlap")
            if lo != prev_hi + 1:
                raise ValueError(f"gap between brackets {prev!r} and {name!r}")
        if spans[0][0] != 16 or spans[-1][1] != 64:
            raise ValueError("brackets must cover ages 16-64")


def cohort_analysis(ds: Dataset, spec: CohortSpec,
                    config: PipelineConfig) -> dict[str, list[tuple[str, float]]]:
    """Top-k normalized feature importances per age bracket (radar export)."""
    if spec.age_code not in ds.feature_codes:
        raise ValueError(f"dataset has no {spec.age_code!r} column")
    if ds.labels is None:
        raise ValueError("cohort analysis needs labels")
    pre, clean = fit_preprocessor(ds, null_threshold=config.null_threshold,
                                  impute_max_rounds=config.impute_max_rounds,
                                  impute_tol=config.impute_tol)
    if spec.age_code not in clean.feature_codes:
        raise ValueError(f"{spec.age_code!r} was dropped during preprocessing")
    ages, _ = clean.column_values(spec.age_code)

    out: dict[str, list[tuple[str, float]]] = {}
    for name, lo, hi in spec.brackets:
        rows = np.nonzero((ages >= lo) & (ages <= hi))[0]
        if rows.size == 0:
            raise ValueError(f"bracket {name!r} has no rows")
        bracket = clean.take(rows).drop_features([spec.age_code])
        rf = learners.train_random_forest(
            bracket.feature_matrix(), bracket.labels, seed=config.seeds[0],
            **config.rfecv_estimator,
        )
        importances = impurity_importances(rf)
        order = np.argsort(-importances, kind="stable")[: spec.top_k]
        top = [(bracket.feature_codes[j], float(importances[j])) for j in order]
        total = sum(v for _, v in top)
        if total > 0:
            top = [(code, v / total) for code, v in top]
        out[name] = top
    return out


def ablation_run(config: PipelineConfig, which: str = "both") -> dict:
    """Grids of Table-7/8 style cells: per model, accuracy and macro F1.

    Cell errors are recorded without aborting the grid. ``mode=none`` cells
    run the exact run_single path, so they match run_training bit for bit
    given the same seeds.
    """
    if which not in ("resampling", "selection", "both"):
        raise ValueError("which must be resampling, selection, or both")
    grids: dict[str, dict] = {}
    if which in ("resampling", "both"):
        grids["resampling"] = _ablation_grid(config, "resample_mode",
                                             RESAMPLE_MODES)
    if which in ("selection", "both"):
        grids["selection"] = _ablation_grid(config, "selection_mode",
                                            ("none", "pca95", "pca90", "rfecv"))
    return grids


def _ablation_grid(config: PipelineConfig, attr: str,
                   modes: tuple[str, ...]) -> dict:
    seeds = config.seeds[: config.n_seeds]
    cells: dict[str, dict[str, Optional[dict]]] = {}
    for mode in modes:
        raw = config.to_dict()
        raw[attr] = mode
        variant = PipelineConfig(**raw)
        try:
            bundles = [run_single(variant, seed) for seed in seeds]
            names = list(bundles[0]["reports"])
            for name in names:
                accs = [b["reports"][name].accuracy for b in bundles]
                f1s = [b["reports"][name].macro_f1 for b in bundles]
                cells.setdefault(name, {})[mode] = {
                    "accuracy": float(np.mean(accs)) * 100.0,
                    "macro_f1": float(np.mean(f1s)) * 100.0,
                }
        except Exception as exc:  # keep the grid running
            for name in cells or {"(all)": None}:
                cells.setdefault(name, {})[mode] = {"error": str(exc)}
    return {"modes": list(modes), "cells": cells}
