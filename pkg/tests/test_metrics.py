from __future__ import annotations

import math

import numpy as np
import pytest

from lifesat.metrics import (
    ConfusionMatrix,
    EvaluationReport,
    confusion,
    error_breakdown,
    evaluate_predictions,
    macro_scores,
    mean_std_report,
    paired_ttest,
    roc_auc,
    scores,
    student_t_sf,
)


class TestConfusion:
    def test_perfect_predictions(self):
        cm = confusion([0, 1, 1, 0], [0, 1, 1, 0])
        assert (cm.fp, cm.fn) == (0, 0)
        assert (cm.tp, cm.tn) == (2, 2)

    def test_all_wrong(self):
        cm = confusion([0, 1, 1, 0], [1, 0, 0, 1])
        assert (cm.tp, cm.tn) == (0, 0)

    def test_matches_brute_force_pair_count(self, rng):
        y_true = (rng.uniform(size=200) < 0.4).astype(int)
        y_pred = (rng.uniform(size=200) < 0.6).astype(int)
        cm = confusion(y_true, y_pred)
        brute = {"tp": 0, "fp": 0, "fn": 0, "tn": 0}
        for t, p in zip(y_true, y_pred):
            if t == 1 and p == 1:
                brute["tp"] += 1
            elif t == 0 and p == 1:
                brute["fp"] += 1
            elif t == 1 and p == 0:
                brute["fn"] += 1
            else:
                brute["tn"] += 1
        assert cm.to_dict() == brute

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            confusion([0, 1], [0])


class TestScores:
    def test_confusion_figure_arithmetic(self):
        # single-run confusion counts: TP 3068, FP 124, FN 104, TN 99
        cm = ConfusionMatrix(tp=3068, fp=124, fn=104, tn=99)
        s = scores(cm)
        assert s["accuracy"] == pytest.approx(3167 / 3395)
        assert round(s["accuracy"], 4) == 0.9328
        assert s["precision"] == pytest.approx(3068 / 3192)
        assert round(s["precision"], 4) == 0.9612
        assert s["recall"] == pytest.approx(3068 / 3172)
        assert round(s["recall"], 4) == 0.9672
        assert s["f1"] == pytest.approx(6136 / 6364)
        assert round(s["f1"], 4) == 0.9642

    def test_perfect_scores_all_one(self):
        s = scores(ConfusionMatrix(tp=5, fp=0, fn=0, tn=5))
        assert all(v == 1.0 for v in s.values())

    def test_zero_over_zero_convention(self):
        s = scores(ConfusionMatrix(tp=0, fp=0, fn=3, tn=7))
        assert s["precision"] == 0.0
        assert s["f1"] == 0.0

    def test_two_f1_forms_agree(self, rng):
        for _ in range(50):
            tp, fp, fn, tn = rng.integers(1, 100, size=4)
            s = scores(ConfusionMatrix(int(tp), int(fp), int(fn), int(tn)))
            harmonic = 2 * s["precision"] * s["recall"] / (
                s["precision"] + s["recall"]
            )
            assert abs(s["f1"] - harmonic) < 1e-12

    def test_accuracy_swap_invariance(self, rng):
        y_true = (rng.uniform(size=100) < 0.3).astype(int)
        y_pred = (rng.uniform(size=100) < 0.5).astype(int)
        s1 = scores(confusion(y_true, y_pred, positive_class=1))
        s0 = scores(confusion(y_true, y_pred, positive_class=0))
        assert s1["accuracy"] == pytest.approx(s0["accuracy"])
        assert s1["precision"] != pytest.approx(s0["precision"])

    def test_macro_constant_classifier_is_one_third(self):
        y_true = np.array([0] * 50 + [1] * 50)
        y_pred = np.ones(100, dtype=int)
        macro = macro_scores(y_true, y_pred)
        assert macro["macro_f1"] == pytest.approx(1 / 3)


class TestRocAuc:
    def test_perfect_ranking(self):
        y = np.array([0, 0, 1, 1])
        _, auc = roc_auc(y, np.array([0.1, 0.2, 0.8, 0.9]))
        assert auc == 1.0

    def test_inverted_ranking(self):
        y = np.array([0, 0, 1, 1])
        _, auc = roc_auc(y, np.array([0.9, 0.8, 0.2, 0.1]))
        assert auc == 0.0

    def test_curve_endpoints_and_monotonicity(self, rng):
        y = (rng.uniform(size=60) < 0.5).astype(int)
        points, _ = roc_auc(y, rng.uniform(size=60))
        assert points[0] == (0.0, 0.0)
        assert points[-1] == (1.0, 1.0)
        fprs = [p[0] for p in points]
        assert all(a <= b for a, b in zip(fprs, fprs[1:]))

    def test_trapezoid_equals_mann_whitney(self, rng):
        # pair-counting oracle with half credit for ties, 200 random scores
        y = (rng.uniform(size=200) < 0.45).astype(int)
        s = np.round(rng.uniform(size=200), 2)  # rounding forces ties
        _, auc = roc_auc(y, s)
        pos = s[y == 1]
        neg = s[y == 0]
        wins = sum((p > n) + 0.5 * (p == n) for p in pos for n in neg)
        oracle = wins / (len(pos) * len(neg))
        assert abs(auc - oracle) < 1e-9

    def test_negation_antisymmetry(self, rng):
        y = (rng.uniform(size=80) < 0.5).astype(int)
        s = rng.normal(size=80)
        _, auc = roc_auc(y, s)
        _, neg_auc = roc_auc(y, -s)
        assert auc == pytest.approx(1.0 - neg_auc, abs=1e-12)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            roc_auc(np.ones(5, dtype=int), np.arange(5.0))


def t_sf_oracle(t: float, df: int) -> float:
    """P(T > t) by Simpson integration of the Student-t density."""
    const = math.gamma((df + 1) / 2) / (
        math.sqrt(df * math.pi) * math.gamma(df / 2)
    )

    def pdf(x):
        return const * (1 + x * x / df) ** (-(df + 1) / 2)

    hi = abs(t) + 400.0
    xs = np.linspace(abs(t), hi, 400001)
    ys = np.array([pdf(x) for x in xs])
    h = xs[1] - xs[0]
    integral = (h / 3) * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum()
                          + 2 * ys[2:-1:2].sum())
    return integral if t >= 0 else 1.0 - integral


class TestPairedTtest:
    def test_identical_vectors_degenerate(self):
        with pytest.raises(ValueError, match="degenerate"):
            paired_ttest([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])

    def test_antisymmetry(self, rng):
        a = rng.normal(size=12)
        b = rng.normal(size=12)
        t_ab, p_ab = paired_ttest(a, b)
        t_ba, p_ba = paired_ttest(b, a)
        assert t_ab == pytest.approx(-t_ba)
        assert p_ab == pytest.approx(p_ba)

    def test_textbook_fixture(self):
        # differences (1, 2, 3, 4, 5): mean 3, sample sd ~1.5811
        a = np.array([2.0, 4.0, 6.0, 8.0, 10.0])
        b = a - np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        t, p = paired_ttest(a, b)
        assert t == pytest.approx(3 / (np.std([1, 2, 3, 4, 5], ddof=1) / np.sqrt(5)))
        assert t == pytest.approx(4.2426, abs=1e-4)
        assert p == pytest.approx(0.0132, abs=1e-4)

    @pytest.mark.parametrize("t,df", [(0.5, 3), (1.7, 4), (4.2426, 4),
                                      (2.9, 9), (-1.2, 6)])
    def test_sf_matches_integration_oracle(self, t, df):
        assert student_t_sf(t, df) == pytest.approx(t_sf_oracle(t, df),
                                                    abs=1e-6)

    def test_p_matches_oracle_to_four_decimals(self, rng):
        a = rng.normal(size=10) + 0.8
        b = rng.normal(size=10)
        t, p = paired_ttest(a, b)
        oracle_p = 2 * t_sf_oracle(abs(t), 9)
        assert round(p, 4) == round(oracle_p, 4)


class FixedModel:
    def __init__(self, predictions):
        self.predictions = np.asarray(predictions)

    def predict(self, X):
        return self.predictions[: X.shape[0]]


class TestErrorBreakdown:
    def make_test_split(self):
        from lifesat.data import dataset_from_arrays

        X = np.arange(12, dtype=float).reshape(6, 2)
        y = np.array([1, 1, 1, 0, 0, 0])
        return dataset_from_arrays(X, y)

    def test_perfect_model_zero_row(self):
        test = self.make_test_split()
        rows = error_breakdown({"perfect": FixedModel(test.labels)}, test)
        assert rows == [{"model": "perfect", "fp": 0, "fn": 0}]

    def test_counts_match_confusion(self):
        test = self.make_test_split()
        preds = np.array([1, 0, 1, 1, 0, 0])
        rows = error_breakdown({"m": FixedModel(preds)}, test)
        cm = confusion(test.labels, preds)
        assert rows[0]["fp"] == cm.fp
        assert rows[0]["fn"] == cm.fn

    def test_asymmetric_errors_detected(self):
        test = self.make_test_split()
        preds = np.array([1, 1, 1, 1, 1, 0])  # two false positives, no FN
        rows = error_breakdown({"fp_heavy": FixedModel(preds)}, test)
        assert rows[0]["fp"] > rows[0]["fn"]


def report_with(accuracy):
    return EvaluationReport(
        confusion=ConfusionMatrix(1, 0, 0, 1),
        accuracy=accuracy,
        per_class={},
        macro_precision=accuracy,
        macro_recall=accuracy,
        macro_f1=accuracy,
        roc_points=[(0, 0), (1, 1)],
        auc=accuracy,
    )


class TestMeanStdReport:
    def test_single_run_zero_std(self):
        rows = mean_std_report({"rf": [report_with(0.937)]})
        assert rows[0]["accuracy_std"] == 0.0
        assert rows[0]["display"]["accuracy"] == "93.70 ± 0.00"

    def test_sample_std_convention(self):
        rows = mean_std_report(
            {"rf": [report_with(0.937), report_with(0.938), report_with(0.939)]}
        )
        assert rows[0]["accuracy_mean"] == pytest.approx(93.80)
        assert rows[0]["accuracy_std"] == pytest.approx(0.1, abs=1e-9)
        assert rows[0]["display"]["accuracy"] == "93.80 ± 0.10"

    def test_identical_runs(self):
        rows = mean_std_report({"gb": [report_with(0.92)] * 4})
        assert rows[0]["accuracy_mean"] == pytest.approx(92.0)
        assert rows[0]["accuracy_std"] == 0.0


class TestEvaluationReport:
    def test_roundtrip(self, rng):
        y = (rng.uniform(size=50) < 0.5).astype(int)
        pred = (rng.uniform(size=50) < 0.5).astype(int)
        score = rng.uniform(size=50)
        report = evaluate_predictions(y, pred, score)
        again = EvaluationReport.from_dict(report.to_dict())
        assert again == report
