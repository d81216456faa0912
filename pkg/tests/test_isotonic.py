import itertools

import numpy as np
import pytest
from scipy.optimize import isotonic_regression as scipy_isotonic

from cairoreg.isotonic import (
    AutoCalibrationReport,
    CalibrationMap,
    audit_autocalibration,
    calibration_from_dict,
    calibration_to_dict,
    pav_fit,
    pav_oracle,
    predict,
)


class TestPavFit:
    def test_already_monotone(self):
        cmap = pav_fit(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_array_equal(cmap.fitted, [1, 2, 3])

    def test_total_pooling(self):
        cmap = pav_fit(np.array([1.0, 2.0, 3.0]), np.array([3.0, 1.0, 2.0]))
        np.testing.assert_array_equal(cmap.fitted, [2, 2, 2])

    def test_partial_pooling(self):
        cmap = pav_fit(np.array([1.0, 2.0, 3.0]), np.array([1.0, 3.0, 2.0]))
        np.testing.assert_array_equal(cmap.fitted, [1, 2.5, 2.5])

    def test_tied_scores_pooled_first(self):
        cmap = pav_fit(np.array([1.0, 1.0, 2.0]), np.array([0.0, 4.0, 3.0]))
        np.testing.assert_array_equal(cmap.knots, [1, 2])
        np.testing.assert_array_equal(cmap.fitted, [2, 3])

    def test_unsorted_input(self):
        cmap = pav_fit(np.array([3.0, 1.0, 2.0]), np.array([2.0, 3.0, 1.0]))
        np.testing.assert_array_equal(cmap.knots, [1, 2, 3])
        np.testing.assert_array_equal(cmap.fitted, [2, 2, 2])

    def test_matches_scipy_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            n = int(rng.integers(2, 60))
            s = np.sort(rng.normal(size=n))
            while np.unique(s).size < n:
                s = np.sort(rng.normal(size=n))
            y = rng.normal(size=n)
            cmap = pav_fit(s, y)
            np.testing.assert_allclose(cmap.fitted, scipy_isotonic(y).x, atol=1e-10)

    def test_mean_preservation(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            n = int(rng.integers(1, 40))
            s = rng.integers(0, 10, size=n).astype(float)
            y = rng.normal(size=n)
            cmap = pav_fit(s, y)
            fitted_per_point = predict(cmap, s)
            assert abs(fitted_per_point.mean() - y.mean()) < 1e-12

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        s = rng.normal(size=30)
        y = rng.normal(size=30)
        first = pav_fit(s, y)
        again = pav_fit(s, predict(first, s))
        np.testing.assert_allclose(again.fitted, first.fitted, atol=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            pav_fit(np.array([1.0, np.inf]), np.array([0.0, 1.0]))


class TestPredict:
    def test_midpoint_interpolation(self):
        cmap = CalibrationMap(knots=np.array([1.0, 3.0]), fitted=np.array([2.0, 4.0]))
        assert predict(cmap, np.array([2.0]))[0] == 3.0

    def test_clipping(self):
        cmap = CalibrationMap(knots=np.array([1.0, 3.0]), fitted=np.array([2.0, 4.0]))
        np.testing.assert_array_equal(predict(cmap, np.array([0.0, 10.0])), [2.0, 4.0])

    def test_training_scores_reproduce_fitted_values(self):
        rng = np.random.default_rng(3)
        s = rng.normal(size=25)
        y = rng.normal(size=25)
        cmap = pav_fit(s, y)
        preds = predict(cmap, cmap.knots)
        np.testing.assert_array_equal(preds, cmap.fitted)

    def test_single_knot_constant(self):
        cmap = CalibrationMap(knots=np.array([2.0]), fitted=np.array([7.0]))
        np.testing.assert_array_equal(predict(cmap, np.array([-5.0, 2.0, 9.0])), [7.0] * 3)

    def test_monotone_on_dense_grid(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            s = rng.normal(size=40)
            y = rng.normal(size=40)
            cmap = pav_fit(s, y)
            grid = np.linspace(s.min() - 1, s.max() + 1, 500)
            assert np.all(np.diff(predict(cmap, grid)) >= -1e-15)

    def test_map_invariants_enforced(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            CalibrationMap(knots=np.array([1.0, 1.0]), fitted=np.array([0.0, 1.0]))
        with pytest.raises(ValueError, match="nondecreasing"):
            CalibrationMap(knots=np.array([1.0, 2.0]), fitted=np.array([1.0, 0.0]))


class TestAudit:
    def test_training_fit_is_auto_calibrated(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n = int(rng.integers(2, 80))
            s = rng.integers(0, 12, size=n).astype(float)
            y = rng.normal(size=n)
            cmap = pav_fit(s, y)
            report = audit_autocalibration(cmap, s, y)
            assert report.max_abs_block_residual < 1e-9

    def test_constant_targets_single_block(self):
        s = np.arange(5.0)
        y = np.full(5, 3.0)
        report = audit_autocalibration(pav_fit(s, y), s, y)
        assert report == AutoCalibrationReport(block_count=1, max_abs_block_residual=0.0)

    def test_hand_case(self):
        s = np.array([1.0, 2.0, 3.0])
        y = np.array([3.0, 1.0, 2.0])
        report = audit_autocalibration(pav_fit(s, y), s, y)
        assert report.block_count == 1
        assert report.max_abs_block_residual == 0.0


class TestPavOracle:
    def test_total_pooling(self):
        np.testing.assert_array_equal(
            pav_oracle(np.array([1.0, 2.0, 3.0]), np.array([3.0, 1.0, 2.0])), [2, 2, 2]
        )

    def test_monotone_targets_fixed_point(self):
        y = np.array([1.0, 2.0, 5.0, 9.0])
        np.testing.assert_array_equal(pav_oracle(np.arange(4.0), y), y)

    def test_matches_pav_fit_on_small_permutations(self):
        s = np.arange(6.0)
        for perm in itertools.permutations(range(1, 7)):
            y = np.array(perm, dtype=float)
            got = predict(pav_fit(s, y), s)
            want = pav_oracle(s, y)
            np.testing.assert_allclose(got, want, atol=1e-10)

    def test_rejects_large_n(self):
        with pytest.raises(ValueError, match="n <= 10"):
            pav_oracle(np.arange(11.0), np.arange(11.0))

    def test_rejects_tied_scores(self):
        with pytest.raises(ValueError, match="distinct"):
            pav_oracle(np.array([1.0, 1.0]), np.array([0.0, 1.0]))


class TestSerialization:
    def test_round_trip(self):
        cmap = pav_fit(np.arange(10.0), np.random.default_rng(6).normal(size=10))
        obj = calibration_to_dict(cmap)
        assert obj["version"] == "cairo-iso-v1"
        back = calibration_from_dict(obj)
        np.testing.assert_array_equal(back.knots, cmap.knots)
        np.testing.assert_array_equal(back.fitted, cmap.fitted)
        assert back.score_range == cmap.score_range
