"""Robust standardization, sample covariance, and model loading."""

import numpy as np
import pytest

from mdshapley import (
    DegenerateColumn,
    DimensionMismatch,
    InsufficientRows,
    ParseError,
    load_model,
    robust_standardize,
    sample_covariance,
    unstandardize,
)


class TestRobustStandardize:
    def test_centers_and_scales(self):
        rng = np.random.default_rng(50)
        X = rng.standard_normal((200, 4)) * [1.0, 5.0, 0.1, 2.0] + [0, 10, -3, 1]
        Z, plan = robust_standardize(X)
        np.testing.assert_allclose(np.median(Z, axis=0), 0.0, atol=1e-12)
        # MAD of the standardized data is 1/1.4826 by construction.
        mad = np.median(np.abs(Z - np.median(Z, axis=0)), axis=0)
        np.testing.assert_allclose(mad * 1.4826, 1.0, atol=1e-12)

    def test_plan_holds_medians_and_mads(self):
        X = np.array([[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]])
        Z, plan = robust_standardize(X)
        np.testing.assert_allclose(plan.medians, [2.0, 20.0])
        np.testing.assert_allclose(plan.mads, [1.4826, 14.826])

    def test_round_trip(self):
        rng = np.random.default_rng(51)
        X = rng.standard_normal((50, 3)) * 7 + 4
        Z, plan = robust_standardize(X)
        np.testing.assert_allclose(unstandardize(Z, plan), X, rtol=1e-12)
        np.testing.assert_allclose(unstandardize(Z[0], plan), X[0], rtol=1e-12)

    def test_constant_column_rejected(self):
        X = np.column_stack([np.arange(5.0), np.full(5, 3.0)])
        with pytest.raises(DegenerateColumn) as err:
            robust_standardize(X)
        assert "1" in str(err.value)

    def test_too_few_rows(self):
        with pytest.raises(InsufficientRows):
            robust_standardize(np.ones((1, 3)))

    def test_outliers_do_not_move_the_center(self):
        X = np.tile(np.arange(1.0, 12.0)[:, None], (1, 2))
        X[0, 0] = 1e6  # one wild cell must not shift median or MAD much
        Z, plan = robust_standardize(X)
        assert plan.medians[0] == pytest.approx(7.0)  # clean column: 6.0
        assert plan.mads[0] < 2 * plan.mads[1]


class TestSampleCovariance:
    def test_matches_numpy(self):
        rng = np.random.default_rng(52)
        X = rng.standard_normal((30, 4))
        np.testing.assert_allclose(sample_covariance(X), np.cov(X, rowvar=False))

    def test_needs_more_rows_than_columns(self):
        with pytest.raises(InsufficientRows):
            sample_covariance(np.ones((3, 3)))


class TestLoadModel:
    def _write(self, tmp_path, mu_text, sigma_text):
        mu_path = tmp_path / "mu.csv"
        sigma_path = tmp_path / "sigma.csv"
        mu_path.write_text(mu_text)
        sigma_path.write_text(sigma_text)
        return str(mu_path), str(sigma_path)

    def test_happy_path(self, tmp_path):
        mu_path, sigma_path = self._write(
            tmp_path, "1.0\n2.0\n", "2.0,0.5\n0.5,1.0\n"
        )
        model = load_model(mu_path, sigma_path)
        assert model.p == 2
        np.testing.assert_allclose(model.mu, [1.0, 2.0])
        np.testing.assert_allclose(model.sigma, [[2.0, 0.5], [0.5, 1.0]])

    def test_one_by_one(self, tmp_path):
        mu_path, sigma_path = self._write(tmp_path, "5.0\n", "4.0\n")
        model = load_model(mu_path, sigma_path)
        assert model.p == 1
        assert model.sigma[0, 0] == 4.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            load_model(str(tmp_path / "nope.csv"), str(tmp_path / "nope2.csv"))

    def test_non_numeric(self, tmp_path):
        mu_path, sigma_path = self._write(tmp_path, "1.0\nhello\n", "1.0\n")
        with pytest.raises(ParseError) as err:
            load_model(mu_path, sigma_path)
        assert "2" in str(err.value)  # line number reported

    def test_ragged_sigma(self, tmp_path):
        mu_path, sigma_path = self._write(tmp_path, "0\n0\n", "1.0,0.0\n0.0\n")
        with pytest.raises(ParseError):
            load_model(mu_path, sigma_path)

    def test_nonsquare_sigma(self, tmp_path):
        mu_path, sigma_path = self._write(
            tmp_path, "0\n0\n", "1.0,0.0\n0.0,1.0\n0.0,0.0\n"
        )
        with pytest.raises(ParseError):
            load_model(mu_path, sigma_path)

    def test_dimension_mismatch(self, tmp_path):
        mu_path, sigma_path = self._write(tmp_path, "0\n0\n0\n", "1.0,0.0\n0.0,1.0\n")
        with pytest.raises(DimensionMismatch):
            load_model(mu_path, sigma_path)

    def test_wide_mu_rejected(self, tmp_path):
        mu_path, sigma_path = self._write(tmp_path, "0,0\n1,1\n", "1.0,0.0\n0.0,1.0\n")
        with pytest.raises(ParseError):
            load_model(mu_path, sigma_path)

    def test_empty_file(self, tmp_path):
        mu_path, sigma_path = self._write(tmp_path, "", "1.0\n")
        with pytest.raises(ParseError):
            load_model(mu_path, sigma_path)
