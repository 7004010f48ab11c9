"""Tests for the synthetic model and dataset generators."""

import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, strategies as st

from modules.model_core import WeightVector
from modules.shared import InvalidParameterError
from modules.synthgen import (
    Distribution, ModelSpec, derive_seed, dimension_for, draw_weights,
    make_dataset, make_problem, noise_sigma_for, samples_for,
)


class TestDimensions:

    def test_dense_limit(self):
        truth = draw_weights(ModelSpec(Distribution.LAPLACE, k=15, sparsity=0.0))
        assert truth.d == 15 and truth.weights.l0() == 15

    def test_two_hundred_null_dimensions(self):
        truth = draw_weights(ModelSpec(Distribution.SYMMETRIC_INCREASING_EXPONENTIAL, k=100, sparsity=2 / 3))
        assert truth.d == 300
        assert int(np.sum(truth.weights.values == 0.0)) == 200
        assert truth.support.k == 100

    def test_full_sparsity_is_rejected(self):
        with pytest.raises(InvalidParameterError):
            ModelSpec(Distribution.LAPLACE, k=10, sparsity=1.0)

    @given(k=st.integers(1, 500), a=st.floats(0, 0.99), b=st.floats(0, 0.99))
    def test_dimension_is_monotone_in_sparsity(self, k, a, b):
        low, high = sorted((a, b))
        assert dimension_for(k, low) <= dimension_for(k, high)

    def test_samples_for(self):
        assert samples_for(300, 5) == 1500
        with pytest.raises(InvalidParameterError):
            samples_for(10, 0)


class TestDistributions:

    def test_laplace_matches_target_cdf(self):
        truth = draw_weights(ModelSpec(Distribution.LAPLACE, k=10_000, sparsity=0.0, seed=1))
        values = truth.weights.values
        standard_error = math.sqrt(2.0) / math.sqrt(values.size)
        assert abs(values.mean()) < 3 * standard_error
        assert scipy.stats.kstest(values, scipy.stats.laplace(loc=0.0, scale=1.0).cdf).statistic < 0.02

    def test_uniform_avoids_dead_zone(self):
        values = draw_weights(ModelSpec(Distribution.UNIFORM, k=5000, sparsity=0.0, seed=2)).weights.values
        assert np.all(np.abs(values) >= 0.05)
        assert np.all(np.abs(values) <= 2.0)

    def test_symmetric_increasing_exponential_shape(self):
        values = draw_weights(ModelSpec(Distribution.SYMMETRIC_INCREASING_EXPONENTIAL, k=5000,
                                        sparsity=0.0, seed=3)).weights.values
        magnitudes = np.abs(values)
        assert np.all((magnitudes >= 0.1 - 1e-12) & (magnitudes <= 2.0))
        # density rises toward the peak
        assert np.mean(magnitudes > 1.05) > 0.6
        assert abs(np.mean(values > 0) - 0.5) < 0.05

    def test_asymmetric_clustered_shape(self):
        values = draw_weights(ModelSpec(Distribution.ASYMMETRIC_CLUSTERED, k=5000, sparsity=0.0,
                                        seed=4)).weights.values
        assert abs(np.mean(values > 0) - 0.7) < 0.03
        assert abs(np.median(values[values > 0]) - 2.0) < 0.02

    def test_parameter_override(self):
        spec = ModelSpec(Distribution.LAPLACE, k=10, sparsity=0.0, params={'scale': 0.01})
        assert np.all(np.abs(draw_weights(spec).weights.values) < 1.0)

    def test_unknown_parameter_is_rejected(self):
        with pytest.raises(InvalidParameterError, match="unknown laplace parameters"):
            ModelSpec(Distribution.LAPLACE, k=10, sparsity=0.0, params={'width': 1.0})


class TestNoise:

    def test_zero_factor(self):
        spec = ModelSpec(Distribution.LAPLACE, k=2, sparsity=0.0, noise_factor=0.0)
        assert noise_sigma_for(spec, WeightVector([2.0, -3.0])) == 0.0

    def test_stated_formula(self):
        spec = ModelSpec(Distribution.LAPLACE, k=2, sparsity=0.0, noise_factor=0.2)
        assert noise_sigma_for(spec, WeightVector([2.0, -3.0])) == pytest.approx(1.0)
        spec = ModelSpec(Distribution.LAPLACE, k=2, sparsity=0.0, noise_factor=1.0)
        assert noise_sigma_for(spec, WeightVector([2.0, -3.0])) == pytest.approx(math.sqrt(5.0))

    def test_negative_factor_is_rejected(self):
        with pytest.raises(InvalidParameterError):
            ModelSpec(Distribution.LAPLACE, k=2, sparsity=0.0, noise_factor=-0.1)


class TestDatasets:

    def test_noiseless_responses_are_exact(self):
        spec = ModelSpec(Distribution.ASYMMETRIC_CLUSTERED, k=5, sparsity=0.5, noise_factor=0.0, seed=9)
        truth, data = make_problem(spec, sample_ratio=3)
        assert data.m == 30 and data.d == 10
        np.testing.assert_array_equal(data.outputs, data.inputs @ truth.weights.values)

    def test_same_seeds_same_bytes(self):
        spec = ModelSpec(Distribution.UNIFORM, k=8, sparsity=0.5, seed=12)
        _, a = make_problem(spec, 2)
        _, b = make_problem(spec, 2)
        assert a.inputs.tobytes() == b.inputs.tobytes()
        assert a.outputs.tobytes() == b.outputs.tobytes()

    @pytest.mark.parametrize('distribution', list(Distribution))
    def test_seeds_change_values_not_dimensions(self, distribution):
        problems = [make_problem(ModelSpec(distribution, k=10, sparsity=0.5, seed=seed), 10) for seed in range(3)]
        assert {(data.m, data.d, truth.k) for truth, data in problems} == {(200, 20, 10)}
        assert problems[0][1].inputs.tobytes() != problems[1][1].inputs.tobytes()

    @pytest.mark.parametrize('seed', [0, 1])
    def test_input_columns_are_centered(self, seed):
        _, data = make_problem(ModelSpec(Distribution.LAPLACE, k=10, sparsity=0.5, seed=seed), 10)
        assert np.all(np.abs(data.inputs.mean(axis=0)) < 4 / math.sqrt(data.m))

    def test_noise_level(self):
        spec = ModelSpec(Distribution.LAPLACE, k=20, sparsity=0.0, noise_factor=0.2, seed=4)
        truth = draw_weights(spec)
        data = make_dataset(truth, 20_000, seed=1)
        residual = data.outputs - data.inputs @ truth.weights.values
        assert residual.std() == pytest.approx(truth.noise_sigma, rel=0.05)

    def test_derive_seed_is_stable_and_distinct(self):
        assert derive_seed(3, 'iteration', 0) == derive_seed(3, 'iteration', 0)
        assert derive_seed(3, 'iteration', 0) != derive_seed(3, 'iteration', 1)
        assert 0 <= derive_seed(2**40, 'x') < 2**63
