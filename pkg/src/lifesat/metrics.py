"""Evaluation metrics: confusion counts, precision/recall/F1/accuracy, ROC
curves with trapezoid AUC, paired t-tests, and multi-seed report rows.

Degenerate 0/0 ratios follow the documented convention of returning 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .data import Dataset


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionMatrix":
        return cls(d["tp"], d["fp"], d["fn"], d["tn"])


def confusion(
    y_true: Sequence[int], y_pred: Sequence[int], positive_class: int = 1
) -> ConfusionMatrix:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise ValueError("y_true and y_pred must be equal-length and non-empty")
    pos_t = y_true == positive_class
    pos_p = y_pred == positive_class
    return ConfusionMatrix(
        tp=int((pos_t & pos_p).sum()),
        fp=int((~pos_t & pos_p).sum()),
        fn=int((pos_t & ~pos_p).sum()),
        tn=int((~pos_t & ~pos_p).sum()),
    )


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def scores(cm: ConfusionMatrix) -> dict[str, float]:
    """Accuracy, precision, recall, and F1 for the positive class of ``cm``."""
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    return {
        "accuracy": _ratio(cm.tp + cm.tn, cm.total),
        "precision": precision,
        "recall": recall,
        "f1": _ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn),
    }


def macro_scores(y_true: Sequence[int], y_pred: Sequence[int]) -> dict[str, float]:
    """Unweighted mean of per-class precision/recall/F1 over both classes."""
    per_class = [scores(confusion(y_true, y_pred, positive_class=c))
                 for c in (0, 1)]
    return {
        "macro_precision": (per_class[0]["precision"] + per_class[1]["precision"]) / 2,
        "macro_recall": (per_class[0]["recall"] + per_class[1]["recall"]) / 2,
        "macro_f1": (per_class[0]["f1"] + per_class[1]["f1"]) / 2,
    }


def roc_auc(
    y_true: Sequence[int], score: Sequence[float]
) -> tuple[list[tuple[float, float]], float]:
    """ROC points (FPR, TPR) over descending score thresholds, plus AUC.

    Tied scores are grouped into one threshold. The curve starts at (0, 0)
    and ends at (1, 1); AUC is the trapezoid integral.
    """
    y_true = np.asarray(y_true)
    score = np.asarray(score, dtype=np.float64)
    if y_true.shape != score.shape:
        raise ValueError("y_true and scores must be equal-length")
    n_pos = int((y_true == 1).sum())
    n_neg = int((y_true == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs both classes present")
    order = np.argsort(-score, kind="stable")
    ys = y_true[order]
    ss = score[order]
    tps = np.cumsum(ys == 1)
    fps = np.cumsum(ys == 0)
    # keep the last index of each tied-score group
    last_of_group = np.nonzero(np.r_[ss[1:] != ss[:-1], True])[0]
    tpr = tps[last_of_group] / n_pos
    fpr = fps[last_of_group] / n_neg
    points = [(0.0, 0.0)] + list(zip(fpr.tolist(), tpr.tolist()))
    xs = np.array([p[0] for p in points])
    ys_ = np.array([p[1] for p in points])
    # trapezoid rule; named trapz on older numpy
    integrate = getattr(np, "trapezoid", np.trapz)
    auc = float(integrate(ys_, xs))
    return points, auc


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta."""
    max_iter, eps, fpmin = 300, 3e-15, 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """P(T > t) for Student's t with df degrees of freedom."""
    x = df / (df + t * t)
    p = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return p if t >= 0 else 1.0 - p


def paired_ttest(
    scores_a: Sequence[float], scores_b: Sequence[float]
) -> tuple[float, float]:
    """Two-sided paired t-test: t = mean(d) / (sd(d) / sqrt(n)), df = n - 1."""
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError("need two equal-length score vectors with n >= 2")
    d = a - b
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        raise ValueError("zero-variance differences: paired t-test is degenerate")
    n = d.size
    t = float(d.mean() / (sd / math.sqrt(n)))
    p = 2.0 * student_t_sf(abs(t), n - 1)
    return t, p


@dataclass(frozen=True)
class EvaluationReport:
    """All Table-style metrics for one model on one split."""

    confusion: ConfusionMatrix
    accuracy: float
    per_class: dict[int, dict[str, float]]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    roc_points: list[tuple[float, float]]
    auc: float

    def metric(self, name: str) -> float:
        values = {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "auc": self.auc,
        }
        return values[name]

    def to_dict(self) -> dict:
        return {
            "confusion": self.confusion.to_dict(),
            "accuracy": self.accuracy,
            "per_class": {str(k): v for k, v in self.per_class.items()},
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "roc_points": [list(p) for p in self.roc_points],
            "auc": self.auc,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        return cls(
            confusion=ConfusionMatrix.from_dict(d["confusion"]),
            accuracy=d["accuracy"],
            per_class={int(k): v for k, v in d["per_class"].items()},
            macro_precision=d["macro_precision"],
            macro_recall=d["macro_recall"],
            macro_f1=d["macro_f1"],
            roc_points=[tuple(p) for p in d["roc_points"]],
            auc=d["auc"],
        )


def evaluate_predictions(
    y_true: np.ndarray, y_pred: np.ndarray, score: Optional[np.ndarray] = None
) -> EvaluationReport:
    cm = confusion(y_true, y_pred, positive_class=1)
    per_class = {c: scores(confusion(y_true, y_pred, positive_class=c))
                 for c in (0, 1)}
    macro = macro_scores(y_true, y_pred)
    if score is not None and len(set(np.asarray(y_true).tolist())) == 2:
        roc_points, auc = roc_auc(y_true, score)
    else:
        roc_points, auc = [(0.0, 0.0), (1.0, 1.0)], 0.5
    return EvaluationReport(
        confusion=cm,
        accuracy=scores(cm)["accuracy"],
        per_class=per_class,
        macro_precision=macro["macro_precision"],
        macro_recall=macro["macro_recall"],
        macro_f1=macro["macro_f1"],
        roc_points=roc_points,
        auc=auc,
    )


def evaluate_model(model, X: np.ndarray, y: np.ndarray) -> EvaluationReport:
    """Score a fitted classifier on one split (positive class = 1)."""
    proba = model.predict_proba(X)
    y_pred = model.predict(X)
    return evaluate_predictions(np.asarray(y), y_pred, proba[:, 1])


def error_breakdown(models: dict[str, object], test: Dataset) -> list[dict]:
    """Per-model false-positive and false-negative counts on a common split."""
    if test.labels is None:
        raise ValueError("error breakdown needs a labeled split")
    X = test.feature_matrix()
    rows = []
    for name, model in models.items():
        cm = confusion(test.labels, model.predict(X), positive_class=1)
        rows.append({"model": name, "fp": cm.fp, "fn": cm.fn})
    return rows


REPORT_METRICS = ("accuracy", "macro_f1", "macro_precision", "macro_recall", "auc")


def mean_std_report(
    runs: dict[str, list[EvaluationReport]],
    metrics: Sequence[str] = REPORT_METRICS,
) -> list[dict]:
    """Aggregate per-model reports across seeds into mean +/- std rows.

    Values are percentages; std is the sample standard deviation (a single
    run reports 0.00). Each row also carries display strings rounded to two
    decimals.
    """
    rows = []
    for model_name, reports in runs.items():
        if not reports:
            raise ValueError(f"no runs recorded for model {model_name!r}")
        row: dict = {"model": model_name, "n_runs": len(reports)}
        display = {}
        for metric in metrics:
            vals = np.array([r.metric(metric) for r in reports]) * 100.0
            mean = float(vals.mean())
            std = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
            row[f"{metric}_mean"] = mean
            row[f"{metric}_std"] = std
            display[metric] = f"{mean:.2f} ± {std:.2f}"
        row["display"] = display
        rows.append(row)
    return rows
