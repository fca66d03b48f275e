from __future__ import annotations

import numpy as np
import pytest

from lifesat.data import CLASS_NAMES, ColumnMeta, Dataset, Schema, dataset_from_arrays
from lifesat.preprocess import (
    OutlierStats,
    apply_encoding,
    apply_imputers,
    clamp_outliers,
    drop_high_null,
    drop_zero_variance,
    fit_bayesian_ridge,
    fit_ordinal_encoder,
    fit_outlier_stats,
    fit_preprocessor,
    iterative_impute,
)


def with_missing(X):
    return dataset_from_arrays(np.asarray(X, dtype=float))


class TestDropHighNull:
    def test_above_threshold_dropped(self):
        X = np.ones((4, 2))
        X[0, 0] = np.nan  # 25% missing
        ds, dropped = drop_high_null(with_missing(X), threshold=0.20)
        assert dropped == ["f1"]
        assert ds.feature_codes == ("f2",)

    def test_exactly_at_threshold_kept(self):
        X = np.ones((5, 2))
        X[0, 0] = np.nan  # exactly 20%
        ds, dropped = drop_high_null(with_missing(X), threshold=0.20)
        assert dropped == []
        assert ds.n_features == 2

    def test_fixture_matches_brute_force(self, rng):
        X = rng.normal(size=(20, 10))
        for j in range(10):
            n_miss = j  # fractions 0.0 .. 0.45
            X[rng.choice(20, size=n_miss, replace=False), j] = np.nan
        ds = with_missing(X)
        _, dropped = drop_high_null(ds, threshold=0.20)
        brute = [
            code
            for j, code in enumerate(ds.feature_codes)
            if np.isnan(X[:, j]).sum() / 20 > 0.20
        ]
        assert dropped == brute

    def test_all_dropped_is_error(self):
        X = np.full((4, 2), np.nan)
        with pytest.raises(ValueError, match="all feature columns"):
            drop_high_null(with_missing(X), threshold=0.20)


class TestOrdinalEncoder:
    def test_paper_four_level_scale(self, health_schema):
        enc = fit_ordinal_encoder(health_schema)
        assert enc.encode("A2", "Very well") == 3
        assert enc.encode("A2", "Well") == 2
        assert enc.encode("A2", "Very poor") == 0

    def test_five_level_scale_top_is_four(self):
        schema = Schema(
            (
                ColumnMeta("A2", kind="ordinal",
                           categories=("Very poor", "Poor", "Average", "Well",
                                       "Very well")),
                ColumnMeta("y", kind="label"),
            ),
            "y",
        )
        enc = fit_ordinal_encoder(schema)
        assert enc.encode("A2", "Very well") == 4

    def test_decode_inverts_encode(self, health_schema):
        enc = fit_ordinal_encoder(health_schema)
        for cat in health_schema.column("D8").categories:
            assert enc.decode("D8", enc.encode("D8", cat)) == cat

    def test_unseen_category_names_column(self, health_schema):
        enc = fit_ordinal_encoder(health_schema)
        with pytest.raises(ValueError, match="'A2'.*'Excellent'"):
            enc.encode("A2", "Excellent")

    def test_apply_encoding_rejects_out_of_range(self, health_schema):
        enc = fit_ordinal_encoder(health_schema)
        values = np.array([[5.0, 1.0, 170.0]])  # A2 code 5 does not exist
        ds = Dataset(health_schema, values, np.zeros((1, 3), bool),
                     np.array([1]))
        with pytest.raises(ValueError, match="'A2'"):
            apply_encoding(ds, enc)


class TestBayesianRidge:
    def test_constant_target(self, rng):
        X = rng.normal(size=(30, 3))
        fit = fit_bayesian_ridge(X, np.full(30, 5.0))
        assert fit.intercept == pytest.approx(5.0)
        assert np.allclose(fit.weights, 0.0)

    def test_noiseless_line_recovers_slope(self):
        x = np.linspace(0, 5, 50).reshape(-1, 1)
        fit = fit_bayesian_ridge(x, 2.0 * x[:, 0])
        # closed-form ridge oracle at the fitted regularization strength
        lam_ratio = fit.lam / fit.alpha
        xc = x - x.mean()
        yc = 2.0 * x[:, 0] - (2.0 * x[:, 0]).mean()
        oracle = float(xc[:, 0] @ yc / (xc[:, 0] @ xc[:, 0] + lam_ratio))
        assert fit.weights[0] == pytest.approx(oracle, abs=1e-8)
        assert fit.weights[0] == pytest.approx(2.0, abs=1e-2)

    def test_collinear_columns_stay_finite(self, rng):
        x = rng.normal(size=(40, 1))
        X = np.hstack([x, x])  # duplicated column
        fit = fit_bayesian_ridge(X, 3.0 * x[:, 0] + rng.normal(size=40) * 0.01)
        assert np.all(np.isfinite(fit.weights))


class TestIterativeImpute:
    def test_no_missing_identity(self, rng):
        ds = with_missing(rng.normal(size=(10, 3)))
        out, imputers = iterative_impute(ds)
        assert out is ds
        assert imputers == []

    def test_correlated_columns_recover_value(self, rng):
        x = rng.uniform(0, 10, size=40)
        X = np.column_stack([x, x.copy()])
        X[7, 1] = np.nan
        out, _ = iterative_impute(with_missing(X), tol=1e-4)
        assert not out.missing_mask.any()
        assert out.values[7, 1] == pytest.approx(x[7], abs=0.05)

    def test_processing_order_fewest_missing_first(self):
        X = np.arange(60, dtype=float).reshape(12, 5)[:, :3].copy()
        X[:3, 0] = np.nan   # 3 missing
        X[:1, 1] = np.nan   # 1 missing
        X[:2, 2] = np.nan   # 2 missing
        _, imputers = iterative_impute(with_missing(X))
        assert [imp.code for imp in imputers] == ["f2", "f3", "f1"]

    def test_fully_missing_row_warns_and_fills(self, rng):
        X = rng.normal(size=(10, 3))
        X[4, :] = np.nan
        with pytest.warns(UserWarning, match="missing every feature"):
            out, _ = iterative_impute(with_missing(X))
        assert not np.isnan(out.values).any()

    def test_ordinal_cells_rounded_to_code_range(self):
        cats = ("c0", "c1", "c2", "c3", "c4")
        schema = Schema(
            (
                ColumnMeta("o1", kind="ordinal", categories=cats),
                ColumnMeta("n1", kind="numeric"),
                ColumnMeta("y", kind="label"),
            ),
            "y",
        )
        rng = np.random.default_rng(0)
        codes = rng.integers(0, 5, size=30).astype(float)
        X = np.column_stack([codes, rng.normal(size=30)])
        X[3, 0] = np.nan
        ds = Dataset(schema, X, np.isnan(X), np.zeros(30, dtype=int))
        out, _ = iterative_impute(ds)
        v = out.values[3, 0]
        assert v == int(v) and 0 <= v <= 4

    def test_apply_imputers_uses_training_state_only(self, rng):
        x = rng.uniform(0, 10, size=50)
        X_train = np.column_stack([x, 2 * x])
        X_train[5, 1] = np.nan
        train = with_missing(X_train)
        _, imputers = iterative_impute(train, tol=1e-5)

        X_test = np.column_stack([np.array([1.0, 4.0]), [np.nan, np.nan]])
        test = with_missing(X_test)
        out = apply_imputers(test, imputers, tol=1e-5)
        assert out.values[0, 1] == pytest.approx(2.0, abs=0.1)
        assert out.values[1, 1] == pytest.approx(8.0, abs=0.1)
        # idempotent: transforming twice gives identical output
        again = apply_imputers(test, imputers, tol=1e-5)
        assert np.array_equal(out.values, again.values)


class TestZeroVariance:
    def test_constant_column_dropped(self):
        X = np.column_stack([np.full(6, 7.0), np.arange(6, dtype=float)])
        ds, dropped = drop_zero_variance(with_missing(X))
        assert dropped == ["f1"]

    def test_two_valued_column_kept(self):
        X = np.column_stack([np.array([1.0, 2, 1, 1]), np.arange(4, dtype=float)])
        _, dropped = drop_zero_variance(with_missing(X))
        assert dropped == []

    def test_matches_variance_scan(self, rng):
        X = rng.normal(size=(15, 6))
        X[:, 2] = 3.3
        X[:, 5] = -1.0
        ds = with_missing(X)
        _, dropped = drop_zero_variance(ds)
        brute = [code for j, code in enumerate(ds.feature_codes)
                 if all(v == X[0, j] for v in X[:, j])]
        assert dropped == brute


class TestClampOutliers:
    def test_constant_column_unchanged(self):
        X = np.column_stack([np.full(5, 2.0), np.arange(5, dtype=float)])
        ds = with_missing(X)
        out = clamp_outliers(ds, fit_outlier_stats(ds))
        assert np.array_equal(out.values[:, 0], X[:, 0])

    def test_hand_computed_fixture(self):
        # column [0]*9 + [10]: mean 1, sample std ~3.162, upper bound ~7.32
        X = np.array([0.0] * 9 + [10.0]).reshape(-1, 1)
        ds = with_missing(X)
        stats = fit_outlier_stats(ds)
        assert stats.mean[0] == pytest.approx(1.0)
        assert stats.std[0] == pytest.approx(np.sqrt(10), abs=1e-12)
        out = clamp_outliers(ds, stats)
        assert out.values[9, 0] == 0.0  # replaced by the median
        assert np.array_equal(out.values[:9, 0], np.zeros(9))

    def test_boundary_value_kept(self):
        ds = with_missing(np.array([[0.0], [1.0], [2.0], [3.0], [4.0]]))
        stats = fit_outlier_stats(ds)
        # a value exactly at mean + 2 std must survive (strict inequality)
        boundary = stats.mean[0] + 2 * stats.std[0]
        probe = with_missing(np.array([[boundary]]))
        out = clamp_outliers(probe, stats)
        assert out.values[0, 0] == boundary

    def test_idempotent_with_fixed_stats(self, rng):
        ds = with_missing(rng.normal(size=(50, 4)) * 3)
        stats = fit_outlier_stats(ds)
        once = clamp_outliers(ds, stats)
        twice = clamp_outliers(once, stats)
        assert np.array_equal(once.values, twice.values)


class TestFullChain:
    def make_raw(self, rng, n=80):
        x = rng.uniform(0, 4, size=n)
        X = np.column_stack([
            np.round(x),                      # correlated ordinal-ish column
            x + rng.normal(size=n) * 0.1,     # numeric
            np.full(n, 3.0),                  # zero variance -> dropped
            rng.normal(size=n),               # noise
            rng.normal(size=n),               # mostly-missing -> dropped
        ])
        X[rng.uniform(size=n) < 0.5, 4] = np.nan
        X[rng.choice(n, size=5, replace=False), 1] = np.nan
        y = (x > 2).astype(int)
        return dataset_from_arrays(X, y)

    def test_chain_output_clean(self, rng):
        train = self.make_raw(rng)
        pre, transformed = fit_preprocessor(train)
        assert not transformed.missing_mask.any()
        assert "f5" in pre.dropped_high_null
        assert "f3" in pre.dropped_zero_variance
        for code in transformed.feature_codes:
            vals, _ = transformed.column_values(code)
            assert np.ptp(vals) > 0.0

    def test_apply_is_deterministic_and_train_stat_only(self, rng):
        train = self.make_raw(rng)
        test = self.make_raw(np.random.default_rng(99), n=30)
        pre, _ = fit_preprocessor(train)
        once = pre.apply(test)
        twice = pre.apply(test)
        assert np.array_equal(once.values, twice.values)
        assert not once.missing_mask.any()

    def test_serialization_roundtrip(self, rng):
        from lifesat.preprocess import FittedPreprocessor

        train = self.make_raw(rng)
        test = self.make_raw(np.random.default_rng(5), n=25)
        pre, _ = fit_preprocessor(train)
        again = FittedPreprocessor.from_dict(pre.to_dict())
        assert np.array_equal(pre.apply(test).values, again.apply(test).values)
