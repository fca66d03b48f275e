"""Report rendering: delimited metric tables plus matplotlib figures saved
alongside them in the run's output directory.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import CLASS_NAMES
from .metrics import EvaluationReport

TABLE_COLUMNS = (
    ("accuracy", "Accuracy (%)"),
    ("macro_f1", "F1 (%)"),
    ("macro_precision", "Precision (%)"),
    ("macro_recall", "Recall (%)"),
    ("auc", "ROC (%)"),
)

_SAVE_KW = {"dpi": 150, "bbox_inches": "tight",
            "metadata": {"Software": None}}  # keep re-runs byte-identical


def write_metric_table(rows: list[dict], path: Path) -> None:
    """Mean +/- std per model, one CSV row per model."""
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Model"] + [label for _, label in TABLE_COLUMNS])
        for row in rows:
            writer.writerow([row["model"]]
                            + [row["display"][m] for m, _ in TABLE_COLUMNS])


def write_json(data, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def write_error_breakdown(rows: list[dict], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["Model", "False Positives", "False Negatives"])
        for row in rows:
            writer.writerow([row["model"], row["fp"], row["fn"]])


def write_ablation_tables(grids: dict, out_dir: Path) -> list[Path]:
    paths = []
    for grid_name, grid in grids.items():
        path = out_dir / f"ablation_{grid_name}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            header = ["Model"]
            for mode in grid["modes"]:
                header += [f"{mode} Acc.(%)", f"{mode} F1(%)"]
            writer.writerow(header)
            for model, cells in grid["cells"].items():
                row = [model]
                for mode in grid["modes"]:
                    cell = cells.get(mode)
                    if cell is None or "error" in (cell or {}):
                        row += ["error", "error"]
                    else:
                        row += [f"{cell['accuracy']:.2f}",
                                f"{cell['macro_f1']:.2f}"]
                writer.writerow(row)
        paths.append(path)
    return paths


def plot_metric_bars(rows: list[dict], path: Path) -> None:
    """Accuracy vs macro F1 per model, grouped bars."""
    models = [r["model"] for r in rows]
    acc = [r["accuracy_mean"] for r in rows]
    f1 = [r["macro_f1_mean"] for r in rows]
    x = np.arange(len(models))
    fig, ax = plt.subplots(figsize=(max(6, len(models) * 1.1), 4))
    ax.bar(x - 0.2, acc, width=0.4, label="Accuracy")
    ax.bar(x + 0.2, f1, width=0.4, label="Macro F1")
    ax.set_xticks(x)
    ax.set_xticklabels(models, rotation=30, ha="right")
    ax.set_ylabel("%")
    ax.set_ylim(0, 100)
    ax.legend()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_confusion(report: EvaluationReport, model_name: str,
                   path: Path) -> None:
    cm = np.array([[report.confusion.tp, report.confusion.fp],
                   [report.confusion.fn, report.confusion.tn]])
    fig, ax = plt.subplots(figsize=(4, 3.5))
    ax.imshow(cm, cmap="Blues")
    for (i, j), v in np.ndenumerate(cm):
        ax.text(j, i, str(v), ha="center", va="center",
                color="black" if v < cm.max() * 0.6 else "white")
    ax.set_xticks([0, 1], ["Actual Positive", "Actual Negative"])
    ax.set_yticks([0, 1], ["Predicted Positive", "Predicted Negative"])
    ax.set_title(model_name)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_roc_curves(reports: dict[str, EvaluationReport], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4.5))
    for name, report in reports.items():
        xs = [p[0] for p in report.roc_points]
        ys = [p[1] for p in report.roc_points]
        ax.plot(xs, ys, label=f"{name} (AUC {report.auc:.3f})")
    ax.plot([0, 1], [0, 1], "k--", linewidth=0.8)
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.legend(fontsize=7)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_error_breakdown(rows: list[dict], path: Path) -> None:
    """Stacked false-positive / false-negative bars per model."""
    models = [r["model"] for r in rows]
    fp = np.array([r["fp"] for r in rows])
    fn = np.array([r["fn"] for r in rows])
    x = np.arange(len(models))
    fig, ax = plt.subplots(figsize=(max(6, len(models) * 1.1), 4))
    ax.bar(x, fp, width=0.6, label="False positives")
    ax.bar(x, fn, width=0.6, bottom=fp, label="False negatives")
    ax.set_xticks(x)
    ax.set_xticklabels(models, rotation=30, ha="right")
    ax.set_ylabel("Count")
    ax.legend()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_rfecv_curve(curve, path: Path) -> None:
    ns = [n for n, _ in curve]
    scores = [s * 100 for _, s in curve]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(ns, scores, marker="o", markersize=3)
    ax.set_xlabel("Number of features")
    ax.set_ylabel("Mean CV accuracy (%)")
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_cohort_radar(cohorts: dict[str, list[tuple[str, float]]],
                      path: Path) -> None:
    n = len(cohorts)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.6),
                             subplot_kw={"projection": "polar"})
    if n == 1:
        axes = [axes]
    for ax, (name, top) in zip(axes, cohorts.items()):
        labels = [code for code, _ in top]
        values = [v for _, v in top]
        angles = np.linspace(0, 2 * np.pi, len(labels), endpoint=False)
        values_c = values + values[:1]
        angles_c = np.concatenate([angles, angles[:1]])
        ax.plot(angles_c, values_c)
        ax.fill(angles_c, values_c, alpha=0.25)
        ax.set_xticks(angles)
        ax.set_xticklabels(labels, fontsize=7)
        ax.set_yticklabels([])
        ax.set_title(name, fontsize=9)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def write_training_outputs(results: dict, artifact_fingerprint: str,
                           out_dir: str | Path, figures: bool = True) -> dict:
    """Write every report surface of a training run; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, str] = {}

    write_metric_table(results["aggregate"], out / "report.csv")
    paths["report_csv"] = str(out / "report.csv")

    report_json = {
        "seeds": results["seeds"],
        "best_seed": results["best_seed"],
        "primary_model": results["primary_model"],
        "artifact_fingerprint": artifact_fingerprint,
        "aggregate": [
            {k: v for k, v in row.items()} for row in results["aggregate"]
        ],
        "diagnostics": results["diagnostics"],
        "error_breakdown": results["error_breakdown"],
    }
    write_json(report_json, out / "report.json")
    paths["report_json"] = str(out / "report.json")

    write_error_breakdown(results["error_breakdown"],
                          out / "error_analysis.csv")
    paths["error_csv"] = str(out / "error_analysis.csv")

    best = next(b for b in results["bundles"]
                if b["seed"] == results["best_seed"])
    audit_path = out / "audit_log.json"
    write_json({"events": [e for b in results["bundles"]
                           for e in b["audit_log"]]}, audit_path)
    paths["audit_json"] = str(audit_path)

    if best["rfecv"] is not None:
        write_json(best["rfecv"].to_dict(), out / "rfecv.json")
        paths["rfecv_json"] = str(out / "rfecv.json")

    if figures:
        plot_metric_bars(results["aggregate"], out / "metrics.png")
        plot_roc_curves(best["reports"], out / "roc_curves.png")
        plot_error_breakdown(results["error_breakdown"],
                             out / "error_analysis.png")
        for name, report in best["reports"].items():
            safe = name.replace(" ", "_").lower()
            plot_confusion(report, name, out / f"confusion_{safe}.png")
        if best["rfecv"] is not None:
            plot_rfecv_curve(best["rfecv"].curve, out / "rfecv_curve.png")
        paths["figures"] = str(out)
    return paths
