"""
Desk-scale experiments checking the comparative behaviour of BoATS against
ridge, lasso and elastic net (k = 20, 20 bootstrap iterations).

These run the full benchmark pipeline and take minutes; deselect them with
-m "not slow".
"""

import numpy as np
import pandas as pd
import pytest

from modules.benchmark import cell_seed, load_results, run_benchmark
from modules.config import parse_grid, preset_config
from modules.evaluation import run_bootstrap
from modules.synthgen import derive_seed, make_problem

pytestmark = pytest.mark.slow

STRUCTURED = ('ridge', 'lasso', 'elastic_net')


def desk_config(preset, **overrides):
    config = preset_config(preset, scale='desk')
    config.update(record_runtime=False, **overrides)
    return config


def run_desk(tmp_path_factory, name, config) -> pd.DataFrame:
    out = tmp_path_factory.mktemp(name) / 'results.csv'
    summary = run_benchmark(parse_grid(config), out, progress=False)
    assert summary['failed'] == 0
    return load_results(out)


def by_method(frame: pd.DataFrame) -> pd.DataFrame:
    return frame.set_index('method')


def inversions(values, slack):
    """Indices where a sequence that should not decrease drops by more than slack."""
    return [i for i in range(1, len(values)) if values[i] < values[i - 1] - slack[i]]


@pytest.fixture(scope='module')
def noiseless(tmp_path_factory):
    config = desk_config('noise', noise_factors=[0.0])
    return config, run_desk(tmp_path_factory, 'noiseless', config)


@pytest.fixture(scope='module')
def comparison(tmp_path_factory):
    return run_desk(tmp_path_factory, 'comparison', desk_config('comparison'))


@pytest.fixture(scope='module')
def noise_sweep(tmp_path_factory):
    return run_desk(tmp_path_factory, 'noise', desk_config('noise'))


class TestNoiselessRecovery:

    def test_boats_error_is_orders_of_magnitude_smaller(self, noiseless):
        _, frame = noiseless
        rows = by_method(frame)
        boats = rows.loc['boats', 'rms_mean']
        assert boats <= 1e-8
        for method in STRUCTURED:
            assert rows.loc[method, 'rms_mean'] >= 1e6 * max(boats, 1e-300)

    def test_boats_support_is_exact(self, noiseless):
        _, frame = noiseless
        boats = by_method(frame).loc['boats']
        assert boats['support_ratio_mean'] == 1.0
        assert boats['false_positives_mean'] == 0.0 and boats['false_negatives_mean'] == 0.0
        assert boats['r2_mean'] > 0.999

    def test_off_support_weights_are_exactly_zero(self, noiseless):
        config, _ = noiseless
        grid = parse_grid(config)
        cell = next(grid.cells())
        seed = cell_seed(grid, cell)
        truth, data = make_problem(grid.model_spec(cell, seed), cell.sample_ratio)
        report = run_bootstrap(data, 'boats', iterations=grid.iterations,
                               master_seed=derive_seed(seed, 'bootstrap'), truth=truth,
                               settings=grid.settings())
        off_support = truth.weights.values == 0.0
        assert np.all(report.beta_opt_expected.values[off_support] == 0.0)
        for record in report.per_iteration:
            assert np.all(record.weights[off_support] == 0.0)


class TestComparisonOrdering:

    def test_boats_has_lowest_rms(self, comparison):
        rows = by_method(comparison)
        for method in STRUCTURED:
            assert rows.loc['boats', 'rms_mean'] < rows.loc[method, 'rms_mean']

    def test_boats_has_lowest_bic(self, comparison):
        rows = by_method(comparison)
        for method in STRUCTURED:
            assert rows.loc['boats', 'bic_mean'] < rows.loc[method, 'bic_mean']

    def test_lasso_keeps_null_dimensions(self, comparison):
        assert by_method(comparison).loc['lasso', 'false_positives_mean'] > 0


class TestSupport:

    @pytest.fixture(scope='class')
    def distributions_grid(self, tmp_path_factory):
        config = desk_config('distributions', sparsities=[0.5, 2 / 3, 0.8])
        return run_desk(tmp_path_factory, 'distributions', config)

    def test_support_ratios(self, distributions_grid):
        for _, cell in distributions_grid.groupby(['distribution', 'sparsity']):
            rows = by_method(cell)
            assert rows.loc['boats', 'support_ratio_mean'] <= 1.05
            ridge = rows.loc['ridge']
            assert ridge['support_ratio_mean'] == ridge['d'] / ridge['k']
            assert rows.loc['elastic_net', 'support_ratio_mean'] > 1.2


def test_small_samples_hurt_boats_more(tmp_path_factory):
    config = desk_config('desk', sparsities=[0.5], sample_ratios=[1], methods=['ridge', 'boats'])
    rows = by_method(run_desk(tmp_path_factory, 'small', config))
    assert rows.loc['boats', 'variability'] > rows.loc['ridge', 'variability']


class TestNoise:

    def test_error_and_variability_grow_with_noise(self, noise_sweep):
        subset = noise_sweep[noise_sweep['noise_factor'].isin([0.0, 0.05, 0.2, 0.5])]
        for method, rows in subset.groupby('method'):
            rows = rows.sort_values('noise_factor')
            rms, sd = rows['rms_mean'].to_numpy(), rows['rms_sd'].to_numpy()
            assert len(inversions(rms, sd)) == 0, method
            assert len(inversions(rms, np.zeros_like(rms))) <= 1, method
            variability = rows['variability'].to_numpy()
            assert len(inversions(variability, np.zeros_like(variability))) <= 1, method

    def test_boats_support_shrinks_with_noise(self, noise_sweep):
        rows = noise_sweep[noise_sweep['method'] == 'boats'].sort_values('noise_factor')
        support, sd = rows['support_ratio_mean'].to_numpy(), rows['support_ratio_sd'].to_numpy()
        # non-increasing, so negate to reuse the non-decreasing check
        assert len(inversions(-support, sd)) == 0
        assert len(inversions(-support, np.zeros_like(support))) <= 1
