"""Tests for the data types, forward model and OLS solver."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_problem
from modules.model_core import (
    Dataset, FitResult, MethodTag, Support, WeightVector,
    generate_responses, least_squares_loss, ols_fit, predict,
)
from modules.shared import DimensionError, InvalidParameterError


class TestTypes:

    def test_weights_are_read_only(self):
        w = WeightVector([1.0, 0.0, 2.0])
        with pytest.raises(ValueError):
            w.values[0] = 5.0
        assert w.l0() == 2

    def test_dataset_row_mismatch_names_both_dimensions(self):
        with pytest.raises(DimensionError, match="3 rows.*length 2"):
            Dataset(np.zeros((3, 2)), np.zeros(2))

    def test_dataset_rejects_nan(self):
        with pytest.raises(InvalidParameterError):
            Dataset(np.array([[np.nan]]), np.array([1.0]))

    def test_support_equality_and_hash(self):
        a = Support.from_mask(np.array([True, False, True]))
        b = Support([0, 2], 3)
        assert a == b and hash(a) == hash(b)
        assert 2 in a and 1 not in a
        assert Support.full(3).k == 3

    def test_support_rejects_unsorted(self):
        with pytest.raises(InvalidParameterError):
            Support([2, 0], 3)

    def test_fit_result_rejects_negative_meta_parameter(self):
        with pytest.raises(InvalidParameterError):
            FitResult(WeightVector.zeros(2), -1.0, MethodTag.RIDGE, 0.0)


class TestPredict:

    def test_scalar_scaling(self):
        np.testing.assert_array_equal(predict(WeightVector([2.0]), [[1.0], [2.0], [3.0]]), [2.0, 4.0, 6.0])

    def test_zero_weights(self):
        X = np.random.default_rng(0).standard_normal((4, 5))
        np.testing.assert_array_equal(predict(WeightVector.zeros(5), X), np.zeros(4))

    def test_cancellation(self):
        np.testing.assert_array_equal(predict([1.0, -1.0], [[3.0, 3.0]]), [0.0])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError, match="3 columns.*length 2"):
            predict([1.0, 2.0], np.zeros((4, 3)))

    @given(a=st.floats(-5, 5), b=st.floats(-5, 5), seed=st.integers(0, 1000))
    def test_linear_in_weights(self, a, b, seed):
        rng = np.random.default_rng(seed)
        X, w1, w2 = rng.standard_normal((6, 4)), rng.standard_normal(4), rng.standard_normal(4)
        np.testing.assert_allclose(predict(a * w1 + b * w2, X), a * predict(w1, X) + b * predict(w2, X),
                                   rtol=1e-12, atol=1e-12)


class TestLeastSquaresLoss:

    def test_perfect_fit_is_zero(self):
        data, beta = random_problem(20, 4, seed=3)
        assert least_squares_loss(beta, data) == pytest.approx(0.0, abs=1e-20)

    def test_sum_of_squares(self):
        data = Dataset([[1.0], [1.0]], [1.0, -1.0])
        assert least_squares_loss([0.0], data) == 2.0

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(5)
        X, y, beta = rng.standard_normal((4, 3)), rng.standard_normal(4), rng.standard_normal(3)
        naive = 0.0
        for i in range(4):
            prediction = 0.0
            for j in range(3):
                prediction += X[i, j] * beta[j]
            naive += (y[i] - prediction) ** 2
        assert least_squares_loss(beta, Dataset(X, y)) == pytest.approx(naive, rel=1e-12)


class TestOlsFit:

    def test_identity_design(self):
        fit = ols_fit(Dataset(np.eye(3), [1.0, 2.0, 3.0]))
        np.testing.assert_allclose(fit.weights.values, [1.0, 2.0, 3.0], atol=1e-12)
        assert fit.method_tag is MethodTag.OLS and fit.meta_parameter == 0.0
        assert not fit.diagnostics['rank_deficient']

    def test_noiseless_recovery(self):
        data, beta = random_problem(200, 10, seed=1)
        fit = ols_fit(data)
        np.testing.assert_allclose(fit.weights.values, beta.values, rtol=1e-8)

    @pytest.mark.parametrize('seed', range(50))
    def test_matches_pseudo_inverse_oracle(self, seed):
        data, _ = random_problem(50, 10, seed=seed, sigma=1.0)
        oracle = np.linalg.pinv(data.inputs) @ data.outputs
        np.testing.assert_allclose(ols_fit(data).weights.values, oracle, rtol=1e-8, atol=1e-10)

    def test_support_restricts_columns(self, well_conditioned):
        data, _ = well_conditioned
        support = Support([1, 4, 7], data.d)
        fit = ols_fit(data, support)
        outside = np.setdiff1d(np.arange(data.d), support.nonzero_indices)
        assert np.all(fit.weights.values[outside] == 0.0)
        oracle = np.linalg.lstsq(data.inputs[:, [1, 4, 7]], data.outputs, rcond=None)[0]
        np.testing.assert_allclose(fit.weights.values[[1, 4, 7]], oracle, rtol=1e-8)

    def test_empty_support_is_all_zeros(self, well_conditioned):
        data, _ = well_conditioned
        fit = ols_fit(data, Support([], data.d))
        assert np.all(fit.weights.values == 0.0)
        assert fit.train_loss == pytest.approx(float(data.outputs @ data.outputs))

    def test_underdetermined_returns_flagged_minimum_norm(self):
        rng = np.random.default_rng(2)
        data = Dataset(rng.standard_normal((5, 8)), rng.standard_normal(5))
        fit = ols_fit(data)
        assert fit.diagnostics['rank_deficient']
        np.testing.assert_allclose(fit.weights.values, np.linalg.pinv(data.inputs) @ data.outputs, atol=1e-10)

    def test_support_dimension_mismatch(self, well_conditioned):
        data, _ = well_conditioned
        with pytest.raises(DimensionError):
            ols_fit(data, Support([0], data.d + 1))

    def test_full_support_loss_is_minimal(self, well_conditioned):
        data, _ = well_conditioned
        fit = ols_fit(data)
        best = least_squares_loss(fit.weights, data)
        rng = np.random.default_rng(13)
        for _ in range(100):
            perturbed = fit.weights.values + rng.normal(scale=rng.choice([1e-3, 1e-1, 1.0]), size=data.d)
            assert best <= least_squares_loss(perturbed, data)

    @given(seed=st.integers(0, 10_000))
    def test_loss_ignores_row_order(self, seed):
        data, _ = random_problem(30, 5, seed=3, sigma=1.0)
        order = np.random.default_rng(seed).permutation(data.m)
        shuffled = Dataset(data.inputs[order], data.outputs[order])
        assert least_squares_loss(ols_fit(shuffled).weights, shuffled) == pytest.approx(
            least_squares_loss(ols_fit(data).weights, data), rel=1e-10)


class TestGenerateResponses:

    def test_noiseless_is_exact(self):
        X = np.random.default_rng(0).standard_normal((6, 3))
        beta = WeightVector([1.0, -2.0, 0.5])
        np.testing.assert_array_equal(generate_responses(beta, X, 0.0, 9), X @ beta.values)

    def test_noise_moments(self):
        y = generate_responses(WeightVector.zeros(2), np.ones((10_000, 2)), 1.0, 123)
        assert abs(y.mean()) < 4 / np.sqrt(10_000)
        assert abs(y.var() - 1.0) < 0.1

    def test_negative_sigma(self):
        with pytest.raises(InvalidParameterError):
            generate_responses([1.0], [[1.0]], -0.1, 0)

    @given(seed=st.integers(0, 2**32 - 1))
    def test_same_seed_is_bitwise_identical(self, seed):
        X = np.arange(12.0).reshape(4, 3)
        a = generate_responses([1.0, 0.0, -1.0], X, 0.7, seed)
        b = generate_responses([1.0, 0.0, -1.0], X, 0.7, seed)
        assert a.tobytes() == b.tobytes()
