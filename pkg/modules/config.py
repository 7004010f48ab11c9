#!/usr/bin/env python3
"""
Config module for the BoATS toolkit.
Loads and validates the YAML experiment configs and builds the presets
for the standard experiment designs.

Unknown keys are errors: a typo never silently falls back to a default.
"""

from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import yaml

from . import shared
from .shared import ConfigError, InvalidParameterError
from .boats import ThresholdGrid
from .evaluation import BootstrapSettings, SweepPlan
from .synthgen import DEFAULT_DISTRIBUTION_PARAMS, Distribution, ModelSpec, dimension_for, samples_for
from .logger import get_logger, log_error

logger = get_logger(__name__)

GRID_KEYS = {
    'k', 'distributions', 'sparsities', 'sample_ratios', 'noise_factors', 'methods',
    'iterations', 'master_seed', 'workers', 'record_runtime', 'n_permutations',
    'threshold_grid', 'sweep', 'solver', 'null_method', 'distribution_params',
}
GENERATE_KEYS = {'distribution', 'k', 'sparsity', 'sample_ratio', 'noise_factor', 'seed', 'distribution_params'}
THRESHOLD_KEYS = {'points', 'low', 'high'}
SWEEP_KEYS = {'coarse_low', 'coarse_high', 'coarse_points', 'fine_points'}
SOLVER_KEYS = {'tol', 'max_iter'}

PRESETS = ('comparison', 'sparsity_ratio', 'distributions', 'noise', 'desk')
# figure-numbered names used by the published experiment scripts
PRESET_ALIASES = {'fig2': 'comparison', 'fig3': 'sparsity_ratio', 'fig4': 'distributions', 'fig5': 'noise'}
PRESET_NAMES = PRESETS + tuple(PRESET_ALIASES)
DESK_K = 20
DESK_ITERATIONS = 20
SURFACE_SPARSITIES = [0.2, 0.4, 0.5, 2 / 3, 0.8, 0.9]
SURFACE_RATIOS = [1, 2, 3, 5, 8]
NOISE_SWEEP_FACTORS = [0.0, 0.02, 0.05, 0.1, 0.2, 0.5]


def load_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a YAML mapping from disk."""
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        log_error(logger, e, "Load config", file=str(path))
        raise ConfigError(f"{path}: not valid YAML ({e})") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    logger.debug(f"Loaded config {path} with {len(data)} keys")
    return data


def save_config(config: Dict[str, Any], path: Union[str, Path]) -> Path:
    """Write a config mapping as YAML, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(config, f, default_flow_style=False, sort_keys=False)
    logger.info(f"Saved config to {path}")
    return path


def _check_keys(section: str, data: Dict[str, Any], allowed: set) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown {section} field(s): {', '.join(map(str, unknown))}")


def _number(name: str, value: Any, kind=float, minimum: Optional[float] = None) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{name}' must be a number, got {value!r}")
    if kind is int and int(value) != value:
        raise ConfigError(f"field '{name}' must be an integer, got {value!r}")
    value = kind(value)
    if minimum is not None and value < minimum:
        raise ConfigError(f"field '{name}' must be >= {minimum}, got {value}")
    return value


def _number_list(name: str, value: Any, minimum: Optional[float] = None) -> Tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"field '{name}' must be a nonempty list")
    return tuple(_number(f"{name}[{i}]", v, float, minimum) for i, v in enumerate(value))


def _distribution(name: str, value: Any) -> Distribution:
    try:
        return Distribution(value)
    except ValueError:
        choices = ', '.join(d.value for d in Distribution)
        raise ConfigError(f"field '{name}' must be one of {choices}, got {value!r}") from None


def _distribution_params(value: Any) -> Dict[str, Dict[str, float]]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError("field 'distribution_params' must be a mapping")
    params = {}
    for dist_name, overrides in value.items():
        dist = _distribution(f"distribution_params.{dist_name}", dist_name)
        if not isinstance(overrides, dict):
            raise ConfigError(f"field 'distribution_params.{dist_name}' must be a mapping")
        _check_keys(f"distribution_params.{dist_name}", overrides, set(DEFAULT_DISTRIBUTION_PARAMS[dist]))
        params[dist.value] = {k: _number(f"distribution_params.{dist_name}.{k}", v) for k, v in overrides.items()}
    return params


def _sparsity(name: str, value: float) -> float:
    if not 0.0 <= value < 1.0:
        raise ConfigError(f"field '{name}' must lie in [0, 1) (d is undefined at sparsity 1), got {value}")
    return value


@dataclass(frozen=True)
class GridCell:
    """One synthetic configuration of an experiment grid."""
    distribution: str
    sparsity: float
    sample_ratio: float
    noise_factor: float


@dataclass(frozen=True)
class ExperimentGrid:
    """Cross product distribution × sparsity × sample ratio × noise × method."""
    distributions: Tuple[str, ...]
    sparsities: Tuple[float, ...]
    sample_ratios: Tuple[float, ...]
    noise_factors: Tuple[float, ...]
    methods: Tuple[str, ...]
    iterations: int
    k: int
    master_seed: int
    workers: int = 1
    record_runtime: bool = True
    n_permutations: int = shared.DEFAULT_PERMUTATIONS
    threshold_points: int = shared.DEFAULT_THRESHOLD_POINTS
    threshold_low: float = shared.DEFAULT_THRESHOLD_LOW
    threshold_high: float = shared.DEFAULT_THRESHOLD_HIGH
    coarse_low: float = shared.DEFAULT_COARSE_LOW
    coarse_high: float = shared.DEFAULT_COARSE_HIGH
    coarse_points: int = shared.DEFAULT_COARSE_POINTS
    fine_points: int = shared.DEFAULT_FINE_POINTS
    tol: float = shared.DEFAULT_TOL
    max_iter: int = shared.DEFAULT_MAX_ITER
    null_method: str = shared.NULL_PERMUTATION
    distribution_params: Dict[str, Dict[str, float]] = field(default_factory=dict, hash=False)

    def cells(self) -> Iterator[GridCell]:
        for dist, sparsity, ratio, noise in product(
                self.distributions, self.sparsities, self.sample_ratios, self.noise_factors):
            yield GridCell(dist, sparsity, ratio, noise)

    def dimensions(self, cell: GridCell) -> Tuple[int, int]:
        """(d, m) of a cell."""
        d = dimension_for(self.k, cell.sparsity)
        return d, samples_for(d, cell.sample_ratio)

    def model_spec(self, cell: GridCell, seed: int) -> ModelSpec:
        return ModelSpec(
            distribution=Distribution(cell.distribution),
            k=self.k,
            sparsity=cell.sparsity,
            noise_factor=cell.noise_factor,
            seed=seed,
            params=self.distribution_params.get(cell.distribution),
        )

    def settings(self) -> BootstrapSettings:
        return BootstrapSettings(
            fractions=shared.DEFAULT_FRACTIONS,
            tol=self.tol,
            max_iter=self.max_iter,
            n_permutations=self.n_permutations,
            threshold_grid=ThresholdGrid.default(self.threshold_points, self.threshold_low, self.threshold_high),
            null_method=self.null_method,
        )

    def sweep_plan(self) -> SweepPlan:
        return SweepPlan.default(self.coarse_low, self.coarse_high, self.coarse_points, self.fine_points)

    def fingerprint(self) -> Dict[str, Any]:
        """Settings that change results (everything except workers and runtime recording)."""
        return {
            'k': self.k, 'iterations': self.iterations, 'master_seed': self.master_seed,
            'n_permutations': self.n_permutations,
            'threshold': [self.threshold_points, self.threshold_low, self.threshold_high],
            'sweep': [self.coarse_low, self.coarse_high, self.coarse_points, self.fine_points],
            'solver': [self.tol, self.max_iter], 'null_method': self.null_method,
            'distribution_params': self.distribution_params,
        }


def parse_grid(data: Dict[str, Any], seed: Optional[int] = None,
               workers: Optional[int] = None) -> ExperimentGrid:
    """
    Validate a grid mapping into an ExperimentGrid.

    Args:
        data: Parsed YAML mapping
        seed: Overrides master_seed when given
        workers: Overrides workers when given

    Raises:
        ConfigError: naming the offending field
    """
    _check_keys('config', data, GRID_KEYS)
    for required in ('k', 'distributions', 'sparsities', 'sample_ratios', 'methods'):
        if required not in data:
            raise ConfigError(f"missing required field '{required}'")

    distributions = data['distributions']
    if not isinstance(distributions, list) or not distributions:
        raise ConfigError("field 'distributions' must be a nonempty list")
    distributions = tuple(_distribution(f"distributions[{i}]", v).value for i, v in enumerate(distributions))

    methods = data['methods']
    if not isinstance(methods, list) or not methods:
        raise ConfigError("field 'methods' must be a nonempty list")
    for i, method in enumerate(methods):
        if method not in shared.METHODS:
            raise ConfigError(f"field 'methods[{i}]' must be one of {', '.join(shared.METHODS)}, got {method!r}")

    sparsities = tuple(_sparsity(f"sparsities[{i}]", v)
                       for i, v in enumerate(_number_list('sparsities', data['sparsities'], 0.0)))
    ratios = _number_list('sample_ratios', data['sample_ratios'])
    if any(r <= 0 for r in ratios):
        raise ConfigError("field 'sample_ratios' must contain positive numbers")

    threshold = data.get('threshold_grid') or {}
    sweep = data.get('sweep') or {}
    solver = data.get('solver') or {}
    for section, values, allowed in (('threshold_grid', threshold, THRESHOLD_KEYS),
                                     ('sweep', sweep, SWEEP_KEYS), ('solver', solver, SOLVER_KEYS)):
        if not isinstance(values, dict):
            raise ConfigError(f"field '{section}' must be a mapping")
        _check_keys(section, values, allowed)

    null_method = data.get('null_method', shared.NULL_PERMUTATION)
    if null_method not in (shared.NULL_PERMUTATION, shared.NULL_MOMENT):
        raise ConfigError(f"field 'null_method' must be '{shared.NULL_PERMUTATION}' or '{shared.NULL_MOMENT}'")
    record_runtime = data.get('record_runtime', True)
    if not isinstance(record_runtime, bool):
        raise ConfigError("field 'record_runtime' must be true or false")

    grid = ExperimentGrid(
        distributions=distributions,
        sparsities=sparsities,
        sample_ratios=ratios,
        noise_factors=_number_list('noise_factors', data.get('noise_factors', [shared.DEFAULT_NOISE_FACTOR]), 0.0),
        methods=tuple(methods),
        iterations=_number('iterations', data.get('iterations', shared.DEFAULT_ITERATIONS), int, 1),
        k=_number('k', data['k'], int, 1),
        master_seed=_number('master_seed', seed if seed is not None else data.get('master_seed', 0), int, 0),
        workers=_number('workers', workers if workers is not None else data.get('workers', 1), int, 1),
        record_runtime=record_runtime,
        n_permutations=_number('n_permutations', data.get('n_permutations', shared.DEFAULT_PERMUTATIONS), int, 1),
        threshold_points=_number('threshold_grid.points', threshold.get('points', shared.DEFAULT_THRESHOLD_POINTS), int, 1),
        threshold_low=_number('threshold_grid.low', threshold.get('low', shared.DEFAULT_THRESHOLD_LOW)),
        threshold_high=_number('threshold_grid.high', threshold.get('high', shared.DEFAULT_THRESHOLD_HIGH)),
        coarse_low=_number('sweep.coarse_low', sweep.get('coarse_low', shared.DEFAULT_COARSE_LOW)),
        coarse_high=_number('sweep.coarse_high', sweep.get('coarse_high', shared.DEFAULT_COARSE_HIGH)),
        coarse_points=_number('sweep.coarse_points', sweep.get('coarse_points', shared.DEFAULT_COARSE_POINTS), int, 2),
        fine_points=_number('sweep.fine_points', sweep.get('fine_points', shared.DEFAULT_FINE_POINTS), int, 1),
        tol=_number('solver.tol', solver.get('tol', shared.DEFAULT_TOL)),
        max_iter=_number('solver.max_iter', solver.get('max_iter', shared.DEFAULT_MAX_ITER), int, 1),
        null_method=null_method,
        distribution_params=_distribution_params(data.get('distribution_params')),
    )
    # surface grid construction errors as config errors
    try:
        grid.settings()
        grid.sweep_plan()
    except InvalidParameterError as e:
        raise ConfigError(f"invalid threshold_grid/sweep settings: {e}") from e
    return grid


def load_grid(path: Union[str, Path], seed: Optional[int] = None,
              workers: Optional[int] = None) -> ExperimentGrid:
    """Load and validate a benchmark config file."""
    return parse_grid(load_yaml(path), seed=seed, workers=workers)


@dataclass(frozen=True)
class GenerateConfig:
    """A single synthetic dataset: model spec plus sample ratio."""
    spec: ModelSpec
    sample_ratio: float
    raw: Dict[str, Any] = field(hash=False, compare=False, default_factory=dict)


def parse_generate(data: Dict[str, Any], seed: Optional[int] = None) -> GenerateConfig:
    """Validate a dataset-generation mapping."""
    _check_keys('config', data, GENERATE_KEYS)
    for required in ('distribution', 'k', 'sparsity', 'sample_ratio'):
        if required not in data:
            raise ConfigError(f"missing required field '{required}'")
    distribution = _distribution('distribution', data['distribution'])
    params = _distribution_params(data.get('distribution_params')).get(distribution.value)
    ratio = _number('sample_ratio', data['sample_ratio'])
    if ratio <= 0:
        raise ConfigError(f"field 'sample_ratio' must be > 0, got {ratio}")
    raw = dict(data)
    raw['seed'] = seed if seed is not None else data.get('seed', 0)
    spec = ModelSpec(
        distribution=distribution,
        k=_number('k', data['k'], int, 1),
        sparsity=_sparsity('sparsity', _number('sparsity', data['sparsity'], float, 0.0)),
        noise_factor=_number('noise_factor', data.get('noise_factor', shared.DEFAULT_NOISE_FACTOR), float, 0.0),
        seed=_number('seed', raw.get('seed', 0), int, 0),
        params=params,
    )
    return GenerateConfig(spec=spec, sample_ratio=ratio, raw=raw)


def load_generate(path: Union[str, Path], seed: Optional[int] = None) -> GenerateConfig:
    """Load and validate a dataset-generation config file."""
    return parse_generate(load_yaml(path), seed=seed)


def preset_config(name: str, scale: Optional[str] = None) -> Dict[str, Any]:
    """
    Benchmark config reproducing one experiment design.

    Args:
        name: comparison, sparsity_ratio, distributions, noise or desk,
            or one of the aliases fig2..fig5
        scale: 'desk' shrinks the preset to k = 20 and 20 iterations

    Returns:
        Config mapping accepted by parse_grid
    """
    name = PRESET_ALIASES.get(name, name)
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}'; choose one of {', '.join(PRESET_NAMES)}")
    if scale not in (None, 'full', 'desk'):
        raise ConfigError(f"unknown scale '{scale}'; choose full or desk")

    config: Dict[str, Any] = {
        'k': shared.DEFAULT_K,
        'distributions': [Distribution.SYMMETRIC_INCREASING_EXPONENTIAL.value],
        'sparsities': [2 / 3],
        'sample_ratios': [5],
        'noise_factors': [shared.DEFAULT_NOISE_FACTOR],
        'methods': list(shared.BENCHMARK_METHODS),
        'iterations': shared.DEFAULT_ITERATIONS,
        'master_seed': 0,
        'workers': 1,
    }
    if name == 'sparsity_ratio':
        config.update(sparsities=list(SURFACE_SPARSITIES), sample_ratios=list(SURFACE_RATIOS))
    elif name == 'distributions':
        config.update(distributions=[d.value for d in Distribution],
                      sparsities=list(SURFACE_SPARSITIES), sample_ratios=[3])
    elif name == 'noise':
        config.update(distributions=[Distribution.ASYMMETRIC_CLUSTERED.value],
                      sparsities=[0.66], noise_factors=list(NOISE_SWEEP_FACTORS))

    if name == 'desk' or scale == 'desk':
        config.update(k=DESK_K, iterations=DESK_ITERATIONS)
    return config


def describe_grid(grid: ExperimentGrid) -> List[str]:
    """Human-readable summary lines of a grid."""
    n_cells = len(list(grid.cells()))
    return [
        f"cells: {n_cells} x {len(grid.methods)} methods = {n_cells * len(grid.methods)} rows",
        f"k={grid.k}, iterations={grid.iterations}, master_seed={grid.master_seed}, workers={grid.workers}",
    ]
