"""Tests for YAML config loading, validation and presets."""

import pytest
import yaml

from modules import shared
from modules.config import (
    PRESET_ALIASES, PRESET_NAMES, load_generate, load_grid, parse_generate, parse_grid, preset_config, save_config,
)
from modules.shared import ConfigError
from modules.synthgen import Distribution


def minimal(**overrides):
    config = {
        'k': 10,
        'distributions': ['laplace'],
        'sparsities': [0.5],
        'sample_ratios': [3],
        'methods': ['ridge', 'boats'],
    }
    config.update(overrides)
    return config


class TestParseGrid:

    def test_defaults(self):
        grid = parse_grid(minimal())
        assert grid.iterations == shared.DEFAULT_ITERATIONS
        assert grid.noise_factors == (shared.DEFAULT_NOISE_FACTOR,)
        assert grid.workers == 1 and grid.record_runtime
        assert len(grid.settings().grid()) == shared.DEFAULT_THRESHOLD_POINTS + 1

    def test_cross_product(self):
        grid = parse_grid(minimal(sparsities=[0.5, 0.8], sample_ratios=[1, 3]))
        assert len(list(grid.cells())) == 4
        assert grid.dimensions(next(grid.cells())) == (20, 20)

    def test_unknown_key_is_named(self):
        with pytest.raises(ConfigError, match="iteratons"):
            parse_grid(minimal(iteratons=5))

    def test_unknown_nested_key_is_named(self):
        with pytest.raises(ConfigError, match="sweep.*fine"):
            parse_grid(minimal(sweep={'fine': 3}))

    def test_missing_field(self):
        config = minimal()
        del config['methods']
        with pytest.raises(ConfigError, match="methods"):
            parse_grid(config)

    @pytest.mark.parametrize('field, value', [
        ('sparsities', [1.0]),
        ('methods', ['lars']),
        ('distributions', ['cauchy']),
        ('iterations', 0),
        ('k', 2.5),
        ('sample_ratios', [0]),
        ('null_method', 'bayes'),
        ('record_runtime', 'no'),
    ])
    def test_invalid_values_name_the_field(self, field, value):
        with pytest.raises(ConfigError, match=field.rstrip('s')):
            parse_grid(minimal(**{field: value}))

    def test_cli_overrides(self):
        grid = parse_grid(minimal(master_seed=3, workers=2), seed=11, workers=8)
        assert grid.master_seed == 11 and grid.workers == 8

    def test_distribution_params(self):
        grid = parse_grid(minimal(distribution_params={'laplace': {'scale': 2.0}}))
        spec = grid.model_spec(next(grid.cells()), seed=0)
        assert spec.distribution_params()['scale'] == 2.0
        with pytest.raises(ConfigError, match="width"):
            parse_grid(minimal(distribution_params={'laplace': {'width': 2.0}}))

    def test_bad_threshold_grid(self):
        with pytest.raises(ConfigError, match="threshold_grid"):
            parse_grid(minimal(threshold_grid={'low': 4.0, 'high': 1.0}))

    def test_fingerprint_ignores_workers(self):
        assert parse_grid(minimal(), workers=1).fingerprint() == parse_grid(minimal(), workers=8).fingerprint()


class TestFiles:

    def test_save_and_load_round_trip(self, tmp_path):
        path = save_config(minimal(sparsities=[2 / 3]), tmp_path / 'config' / 'grid.yaml')
        grid = load_grid(path)
        assert grid.sparsities == (2 / 3,)

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / 'bad.yaml'
        path.write_text("k: [1, 2\n")
        with pytest.raises(ConfigError, match="not valid YAML"):
            load_grid(path)

    def test_top_level_must_be_mapping(self, tmp_path):
        path = tmp_path / 'list.yaml'
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            load_grid(path)

    def test_generate_config(self, tmp_path):
        path = tmp_path / 'gen.yaml'
        path.write_text(yaml.safe_dump({'distribution': 'uniform', 'k': 5, 'sparsity': 0.5, 'sample_ratio': 2}))
        generate = load_generate(path)
        assert generate.spec.distribution is Distribution.UNIFORM
        assert generate.spec.seed == 0 and generate.raw['seed'] == 0
        assert load_generate(path, seed=9).spec.seed == 9

    def test_generate_rejects_full_sparsity(self):
        with pytest.raises(ConfigError, match="sparsity"):
            parse_generate({'distribution': 'laplace', 'k': 5, 'sparsity': 1.0, 'sample_ratio': 2})

    def test_generate_rejects_unknown_key(self):
        with pytest.raises(ConfigError, match="ratio"):
            parse_generate({'distribution': 'laplace', 'k': 5, 'sparsity': 0.5, 'sample_ratio': 2, 'ratio': 3})


class TestPresets:

    def test_comparison_is_one_cell(self):
        grid = parse_grid(preset_config('comparison'))
        cells = list(grid.cells())
        assert len(cells) == 1 and len(grid.methods) == 4
        cell = cells[0]
        assert (cell.sparsity, cell.sample_ratio, cell.noise_factor) == (2 / 3, 5, 0.2)
        assert grid.dimensions(cell) == (300, 1500)

    def test_sparsity_ratio_grid(self):
        grid = parse_grid(preset_config('sparsity_ratio'))
        assert len(list(grid.cells())) == 30

    def test_four_distributions_at_ratio_three(self):
        grid = parse_grid(preset_config('distributions'))
        assert set(grid.distributions) == {d.value for d in Distribution}
        assert grid.sample_ratios == (3.0,)

    def test_six_noise_factors(self):
        grid = parse_grid(preset_config('noise'))
        assert grid.distributions == (Distribution.ASYMMETRIC_CLUSTERED.value,)
        assert grid.sparsities == (0.66,) and len(grid.noise_factors) == 6

    def test_desk(self):
        grid = parse_grid(preset_config('desk'))
        assert (grid.k, grid.iterations) == (20, 20)
        assert grid.dimensions(next(grid.cells())) == (60, 300)

    def test_desk_scale_shrinks_any_preset(self):
        grid = parse_grid(preset_config('distributions', scale='desk'))
        assert (grid.k, grid.iterations) == (20, 20)
        assert len(list(grid.cells())) == 24

    @pytest.mark.parametrize('name', PRESET_NAMES)
    def test_every_preset_validates(self, name):
        parse_grid(preset_config(name))

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="fig9"):
            preset_config('fig9')

    @pytest.mark.parametrize('alias', sorted(PRESET_ALIASES))
    def test_figure_aliases_match_designs(self, alias):
        assert preset_config(alias) == preset_config(PRESET_ALIASES[alias])
        assert preset_config(alias, scale='desk') == preset_config(PRESET_ALIASES[alias], scale='desk')
