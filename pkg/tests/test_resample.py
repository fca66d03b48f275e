from __future__ import annotations

import numpy as np
import pytest

from lifesat.data import SynthSpec, dataset_from_arrays, generate_synthetic
from lifesat.resample import (
    ResamplePlan,
    dual_resample,
    random_undersample,
    smote_oversample,
)


def imbalanced(n_maj, n_min, d=3, seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([
        rng.normal(0.0, 1.0, size=(n_maj, d)),
        rng.normal(3.0, 1.0, size=(n_min, d)),
    ])
    y = np.array([1] * n_maj + [0] * n_min)
    return dataset_from_arrays(X, y)


class TestSmote:
    def test_noop_when_target_met(self):
        ds = imbalanced(100, 50)
        out = smote_oversample(ds, ResamplePlan(smote_target_ratio=0.40))
        assert out.n_rows == ds.n_rows
        assert np.array_equal(out.values, ds.values)

    def test_two_point_minority_interpolates_on_segment(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0]] + [[5.0, 5.0]] * 20)
        y = np.array([0, 0] + [1] * 20)
        ds = dataset_from_arrays(X, y)
        with pytest.warns(UserWarning, match="smote_k"):
            out = smote_oversample(ds, ResamplePlan(smote_target_ratio=0.5,
                                                    seed=3))
        synthetic = out.values[ds.n_rows:]
        assert synthetic.shape[0] == 8
        for row in synthetic:
            assert row[0] == pytest.approx(row[1])
            assert 0.0 <= row[0] <= 1.0

    def test_forty_percent_arithmetic(self):
        ds = imbalanced(100, 10)
        out = smote_oversample(ds, ResamplePlan(smote_target_ratio=0.40, seed=1))
        counts = np.bincount(out.labels)
        assert counts[0] == 40
        assert counts[1] == 100

    def test_majority_rows_untouched(self):
        ds = imbalanced(50, 10)
        out = smote_oversample(ds, ResamplePlan(seed=2))
        maj_before = ds.values[ds.labels == 1]
        maj_after = out.values[out.labels == 1]
        assert np.array_equal(np.sort(maj_before, 0), np.sort(maj_after, 0))

    def test_single_class_rejected(self):
        ds = dataset_from_arrays(np.zeros((5, 2)), np.ones(5, int))
        with pytest.raises(ValueError, match="both classes"):
            smote_oversample(ds, ResamplePlan())

    def test_tiny_minority_rejected(self):
        ds = dataset_from_arrays(np.random.default_rng(0).normal(size=(8, 2)),
                                 np.array([1] * 7 + [0]))
        with pytest.raises(ValueError, match="minority"):
            smote_oversample(ds, ResamplePlan())


class TestUndersample:
    def test_balanced_input_unchanged(self):
        ds = imbalanced(20, 20)
        out = random_undersample(ds, seed=5)
        assert out.n_rows == ds.n_rows

    def test_counts_equalized(self):
        ds = imbalanced(100, 40)
        out = random_undersample(ds, seed=5)
        counts = np.bincount(out.labels)
        assert counts[0] == counts[1] == 40

    def test_retained_rows_are_verbatim_subset(self):
        ds = imbalanced(60, 25, seed=9)
        out = random_undersample(ds, seed=1)
        originals = {tuple(row) for row in ds.values}
        for row in out.values:
            assert tuple(row) in originals


class TestDualResample:
    def test_forced_arithmetic_1000_100(self):
        ds = imbalanced(1000, 100, seed=3)
        out = dual_resample(ds, ResamplePlan(smote_target_ratio=0.40, seed=7))
        counts = np.bincount(out.labels)
        assert counts[0] == 400
        assert counts[1] == 400

    @pytest.mark.parametrize("seed", range(8))
    def test_equal_counts_for_random_imbalance(self, seed):
        rng = np.random.default_rng(seed)
        n_maj = int(rng.integers(50, 300))
        n_min = int(rng.integers(8, max(9, n_maj // 2)))
        ds = imbalanced(n_maj, n_min, seed=seed)
        out = dual_resample(ds, ResamplePlan(seed=seed))
        counts = np.bincount(out.labels)
        assert counts[0] == counts[1]

    def test_synthetic_rows_between_parents_per_feature(self):
        # hull membership on a 2-D fixture: interpolants of minority points
        # stay inside the minority bounding segment ranges
        rng = np.random.default_rng(4)
        minority = rng.uniform(2.0, 3.0, size=(12, 2))
        majority = rng.uniform(-1.0, 1.0, size=(200, 2))
        X = np.vstack([majority, minority])
        y = np.array([1] * 200 + [0] * 12)
        ds = dataset_from_arrays(X, y)
        out = smote_oversample(ds, ResamplePlan(smote_target_ratio=0.40, seed=8))
        synthetic = out.values[ds.n_rows:]
        assert len(synthetic) == 80 - 12
        assert (synthetic >= minority.min(axis=0) - 1e-12).all()
        assert (synthetic <= minority.max(axis=0) + 1e-12).all()

    def test_determinism(self):
        ds = imbalanced(120, 30, seed=2)
        plan = ResamplePlan(seed=11)
        a = dual_resample(ds, plan)
        b = dual_resample(ds, plan)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.labels, b.labels)

    def test_rounding_flag_produces_integer_codes(self):
        rng = np.random.default_rng(6)
        X = np.column_stack([
            rng.integers(0, 5, size=40).astype(float),
            rng.integers(0, 5, size=40).astype(float),
        ])
        y = np.array([1] * 30 + [0] * 10)
        ds = dataset_from_arrays(X, y, kinds=["ordinal", "ordinal"])
        plan = ResamplePlan(smote_target_ratio=0.5, seed=0, round_ordinal=True)
        out = smote_oversample(ds, plan)
        synthetic = out.values[40:]
        assert np.array_equal(synthetic, np.rint(synthetic))
