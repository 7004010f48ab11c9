#!/usr/bin/env python3
"""
Evaluation module for the BoATS toolkit.
Provides train/select/test splitting, performance metrics and the
bootstrap cross-validation protocol used to compare estimators.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import shared
from .shared import (
    BootstrapAbortedError, DimensionError, InvalidParameterError, UndefinedMetricError,
)
from .model_core import (
    Dataset, MethodTag, WeightVector, as_values, ols_fit, residual_sum_of_squares,
)
from .regularizers import elastic_net_path, lasso_path, ridge_path
from .boats import ThresholdGrid, best_threshold_index, boats_fit, estimate_null, moment_null
from .synthgen import GroundTruth, derive_seed
from .logger import get_logger, log_error, log_operation, OperationTimer

logger = get_logger(__name__)

Weights = Union[WeightVector, np.ndarray, Sequence[float]]


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SplitPlan:
    """Disjoint train/select/test row indices."""
    train_idx: np.ndarray
    select_idx: np.ndarray
    test_idx: np.ndarray
    fractions: Tuple[float, float, float] = shared.DEFAULT_FRACTIONS

    def apply(self, data: Dataset) -> Tuple[Dataset, Dataset, Dataset]:
        return data.subset(self.train_idx), data.subset(self.select_idx), data.subset(self.test_idx)


def make_split(m: int, fractions: Tuple[float, float, float] = shared.DEFAULT_FRACTIONS,
               seed: int = 0) -> SplitPlan:
    """
    Uniform random train/select/test partition.

    Part sizes are floor(m · fraction); rows left over by rounding belong
    to no part.
    """
    if len(fractions) != 3 or any(f < 0 for f in fractions) or sum(fractions) > 1.0 + 1e-12:
        raise InvalidParameterError(f"fractions must be three nonnegative numbers summing to <= 1, got {fractions}")
    sizes = [int(math.floor(m * f + 1e-9)) for f in fractions]
    if any(size == 0 for size, f in zip(sizes, fractions) if f > 0):
        raise InvalidParameterError(f"m={m} is too small for split fractions {tuple(fractions)}")

    order = np.random.default_rng(seed).permutation(m)
    n_train, n_select, n_test = sizes
    return SplitPlan(
        train_idx=np.sort(order[:n_train]),
        select_idx=np.sort(order[n_train:n_train + n_select]),
        test_idx=np.sort(order[n_train + n_select:n_train + n_select + n_test]),
        fractions=tuple(float(f) for f in fractions),
    )


def kfold_splits(m: int, folds: int, seed: int = 0) -> List[Tuple[np.ndarray, np.ndarray]]:
    """V-fold (train, held-out) index pairs covering every row exactly once as held-out."""
    if folds < 2 or folds > m:
        raise InvalidParameterError(f"folds must lie in [2, m={m}], got {folds}")
    order = np.random.default_rng(seed).permutation(m)
    parts = np.array_split(order, folds)
    return [(np.sort(np.concatenate(parts[:v] + parts[v + 1:])), np.sort(parts[v])) for v in range(folds)]


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def r_squared(weights: Weights, test: Dataset) -> float:
    """1 − Σ(y − ŷ)² / Σ(y − ȳ)² on the test set; may be negative."""
    if test.m == 0:
        raise UndefinedMetricError("R² needs a nonempty test set")
    y = test.outputs
    total = float(((y - y.mean()) ** 2).sum())
    if total == 0.0:
        raise UndefinedMetricError("R² is undefined for a constant response")
    return 1.0 - residual_sum_of_squares(as_values(weights), test.inputs, y) / total


def residual_mean_square(weights: Weights, test: Dataset) -> float:
    """Σ(y − ŷ)² / (T − 1), unfloored."""
    if test.m < 2:
        raise UndefinedMetricError(f"residual mean square needs T >= 2, got T={test.m}")
    return residual_sum_of_squares(as_values(weights), test.inputs, test.outputs) / (test.m - 1)


def bic(weights: Weights, test: Dataset) -> float:
    """T·ln(RSS/(T − 1)) + k·ln T with k = ‖β‖₀; the mean square is floored at 1e-300."""
    beta = as_values(weights)
    T = test.m
    mean_square = max(residual_mean_square(beta, test), shared.RSS_FLOOR)
    return T * math.log(mean_square) + int(np.count_nonzero(beta)) * math.log(T)


def rms_error(estimated: Weights, truth: Weights) -> float:
    """sqrt(mean_j (β̂_j − β_j)²)."""
    a, b = as_values(estimated), as_values(truth)
    if a.shape != b.shape:
        raise DimensionError(f"estimated weights have length {a.shape[0]} but truth has length {b.shape[0]}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def estimation_variability(weight_samples: Sequence[Weights]) -> float:
    """Mean over coordinates of the per-coordinate standard deviation (n − 1) across samples."""
    if len(weight_samples) < 2:
        raise UndefinedMetricError(f"variability needs at least 2 samples, got {len(weight_samples)}")
    stacked = np.vstack([as_values(w) for w in weight_samples])
    return float(stacked.std(axis=0, ddof=1).mean())


def support_ratio(estimated: Weights, truth: GroundTruth) -> float:
    """‖β̂‖₀ / k_true."""
    if truth.k == 0:
        raise UndefinedMetricError("support ratio needs a nonempty true support")
    return int(np.count_nonzero(as_values(estimated))) / truth.k


def selection_errors(estimated: Weights, truth: GroundTruth) -> Tuple[int, int]:
    """(false positives, false negatives) of the estimated support against the true one."""
    estimated_mask = as_values(estimated) != 0
    true_mask = truth.support.mask()
    return int(np.sum(estimated_mask & ~true_mask)), int(np.sum(~estimated_mask & true_mask))


# ---------------------------------------------------------------------------
# Bootstrap protocol
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SweepPlan:
    """Coarse λ grid plus the refinement applied around the coarse optimum."""
    coarse_grid: np.ndarray
    refine_factor: float
    fine_points: int

    def __post_init__(self):
        grid = np.array(self.coarse_grid, dtype=np.float64).reshape(-1)
        if grid.size == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0) or not np.all(np.isfinite(grid)):
            raise InvalidParameterError("coarse grid must be positive, finite and strictly increasing")
        if not self.refine_factor > 0 or self.fine_points < 1:
            raise InvalidParameterError(
                f"refine_factor must be > 0 and fine_points >= 1, got {self.refine_factor}, {self.fine_points}")
        if grid.size > 1 and grid[-1] / grid[0] < 1e4:
            logger.warning(f"Coarse grid spans less than 4 orders of magnitude: [{grid[0]:g}, {grid[-1]:g}]")
        grid.setflags(write=False)
        object.__setattr__(self, 'coarse_grid', grid)

    @classmethod
    def default(cls, low: float = shared.DEFAULT_COARSE_LOW, high: float = shared.DEFAULT_COARSE_HIGH,
                points: int = shared.DEFAULT_COARSE_POINTS,
                fine_points: int = shared.DEFAULT_FINE_POINTS) -> 'SweepPlan':
        """Log-spaced coarse grid; refinement spans one coarse spacing on each side."""
        if not 0 < low < high or points < 2:
            raise InvalidParameterError(f"bad coarse grid: low={low}, high={high}, points={points}")
        spacing = (high / low) ** (1.0 / (points - 1))
        return cls(np.geomspace(low, high, points), spacing, fine_points)

    @classmethod
    def single(cls, lam: float) -> 'SweepPlan':
        """A sweep that evaluates exactly one λ."""
        return cls(np.array([lam]), 1.0, 1)

    def refine(self, center: float) -> np.ndarray:
        """fine_points log-spaced values in [center/f, center·f] that include center exactly."""
        if self.fine_points == 1:
            return np.array([center])
        fine = np.geomspace(center / self.refine_factor, center * self.refine_factor, self.fine_points)
        if self.fine_points % 2:
            fine[self.fine_points // 2] = center
        else:
            fine = np.append(fine, center)
        return np.unique(fine)


@dataclass(frozen=True)
class BootstrapSettings:
    """Solver and protocol settings shared by every iteration."""
    fractions: Tuple[float, float, float] = shared.DEFAULT_FRACTIONS
    tol: float = shared.DEFAULT_TOL
    max_iter: int = shared.DEFAULT_MAX_ITER
    n_permutations: int = shared.DEFAULT_PERMUTATIONS
    threshold_grid: Optional[ThresholdGrid] = field(default=None, compare=False)
    null_method: str = shared.NULL_PERMUTATION

    def grid(self) -> ThresholdGrid:
        return self.threshold_grid if self.threshold_grid is not None else ThresholdGrid.default()


@dataclass(frozen=True, eq=False)
class IterationRecord:
    """
    One bootstrap iteration: the split seed, its own best meta-parameter and
    test-set metrics for the weights fitted there. Truth-dependent fields are
    NaN when no ground truth is known; every metric is NaN for a failed
    iteration (error holds the cause).
    """
    seed: int
    meta_parameter: float
    weights: Optional[np.ndarray]
    test_r2: float
    test_bic: float
    test_residual_ms: float
    support_size: float
    rms: float = math.nan
    support_ratio: float = math.nan
    false_positives: float = math.nan
    false_negatives: float = math.nan
    consensus_r2: float = math.nan
    consensus_bic: float = math.nan
    consensus_rms: float = math.nan
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


METRIC_FIELDS = (
    'meta_parameter', 'test_r2', 'test_bic', 'test_residual_ms', 'support_size', 'rms',
    'support_ratio', 'false_positives', 'false_negatives', 'consensus_r2', 'consensus_bic',
    'consensus_rms',
)


@dataclass(frozen=True, eq=False)
class BootstrapReport:
    """
    Results of a bootstrap run for one method.

    aggregated maps each metric of METRIC_FIELDS to (mean, sd) over the
    successful iterations. meta_grid / mean_select_losses give the mean
    select loss at every meta-parameter evaluated.
    """
    method_tag: MethodTag
    per_iteration: List[IterationRecord]
    aggregated: Dict[str, Tuple[float, float]]
    beta_opt_expected: WeightVector
    consensus_meta_parameter: float
    variability: float
    weight_mean: np.ndarray
    weight_sd: np.ndarray
    meta_grid: np.ndarray
    mean_select_losses: np.ndarray
    failures: int

    @property
    def successful(self) -> List[IterationRecord]:
        return [record for record in self.per_iteration if not record.failed]


@dataclass
class _IterationSweep:
    plan: SplitPlan
    losses: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    reference: float = 0.0
    error: Optional[str] = None


def _sweep_penalized(method: MethodTag, train: Dataset, select: Dataset, lambdas: np.ndarray,
                     settings: BootstrapSettings) -> Tuple[np.ndarray, np.ndarray]:
    if method is MethodTag.RIDGE:
        fits = ridge_path(train, lambdas)
    elif method is MethodTag.LASSO:
        fits = lasso_path(train, lambdas, settings.tol, settings.max_iter)
    else:
        fits = elastic_net_path(train, lambdas, 0.5, settings.tol, settings.max_iter)
    weights = np.vstack([fit.weights.values for fit in fits])
    residual = select.outputs[:, None] - select.inputs @ weights.T
    return (residual ** 2).sum(axis=0), weights


def _sweep_boats(train: Dataset, select: Dataset, seed: int,
                 settings: BootstrapSettings) -> Tuple[np.ndarray, np.ndarray]:
    if settings.null_method == shared.NULL_MOMENT:
        null = moment_null(train)
    else:
        null = estimate_null(train, settings.n_permutations, derive_seed(seed, 'null'))
    result = boats_fit(train, select, null, settings.grid())
    losses = np.array([loss for _, loss in result.per_threshold_losses])
    return losses, np.array(result.per_threshold_weights)


def _sweep_ols(train: Dataset, select: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    fit = ols_fit(train)
    residual = select.outputs - select.inputs @ fit.weights.values
    return np.array([residual @ residual]), fit.weights.values[None, :].copy()


def _run_sweeps(data: Dataset, method: MethodTag, sweeps: List[_IterationSweep],
                lambdas: Optional[np.ndarray], settings: BootstrapSettings, seeds: List[int]) -> None:
    for i, sweep in enumerate(sweeps):
        if sweep.error is not None:
            continue
        train, select, _ = sweep.plan.apply(data)
        try:
            if method is MethodTag.BOATS:
                losses, weights = _sweep_boats(train, select, seeds[i], settings)
            elif method is MethodTag.OLS:
                losses, weights = _sweep_ols(train, select)
            else:
                losses, weights = _sweep_penalized(method, train, select, lambdas, settings)
            if not np.all(np.isfinite(losses)):
                raise FloatingPointError("non-finite select loss")
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as e:
            log_error(logger, e, f"Bootstrap iteration {i} ({method.value})")
            sweep.error = f"{type(e).__name__}: {e}"
            continue
        if sweep.losses is None:
            sweep.reference = float(select.outputs @ select.outputs)
            sweep.losses, sweep.weights = losses, weights
        else:
            sweep.losses = np.concatenate([sweep.losses, losses])
            sweep.weights = np.concatenate([sweep.weights, weights])


def _mean_losses(sweeps: List[_IterationSweep]) -> Tuple[np.ndarray, float]:
    ok = [s for s in sweeps if s.error is None]
    return np.mean([s.losses for s in ok], axis=0), float(np.mean([s.reference for s in ok]))


def _check_failures(sweeps: List[_IterationSweep], method: MethodTag) -> None:
    failures = sum(s.error is not None for s in sweeps)
    if failures > shared.MAX_FAILED_FRACTION * len(sweeps):
        raise BootstrapAbortedError(
            f"{failures} of {len(sweeps)} bootstrap iterations failed for {method.value}")
    if failures:
        logger.warning(f"{failures} of {len(sweeps)} bootstrap iterations failed for {method.value}; excluded")


def _test_metrics(beta: np.ndarray, test: Dataset, truth: Optional[GroundTruth]) -> Dict[str, float]:
    metrics = {'support_size': float(np.count_nonzero(beta))}
    # R² and BIC need at least two held-out rows
    if test.m < 2:
        metrics.update(test_r2=math.nan, test_bic=math.nan, test_residual_ms=math.nan)
    else:
        metrics.update(
            test_r2=r_squared(beta, test),
            test_bic=bic(beta, test),
            test_residual_ms=residual_mean_square(beta, test),
        )
    if truth is not None:
        false_positives, false_negatives = selection_errors(beta, truth)
        metrics.update(
            rms=rms_error(beta, truth.weights),
            support_ratio=support_ratio(beta, truth),
            false_positives=float(false_positives),
            false_negatives=float(false_negatives),
        )
    return metrics


def _aggregate(records: List[IterationRecord]) -> Dict[str, Tuple[float, float]]:
    aggregated = {}
    ok = [r for r in records if not r.failed]
    for name in METRIC_FIELDS:
        values = np.array([getattr(r, name) for r in ok], dtype=np.float64)
        if values.size == 0 or np.all(np.isnan(values)):
            aggregated[name] = (math.nan, math.nan)
            continue
        mean = float(np.mean(values))
        sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
        aggregated[name] = (mean, sd)
    return aggregated


def run_bootstrap(data: Dataset, method: Union[MethodTag, str], sweep: Optional[SweepPlan] = None,
                  iterations: int = shared.DEFAULT_ITERATIONS, master_seed: int = 0,
                  truth: Optional[GroundTruth] = None,
                  settings: Optional[BootstrapSettings] = None) -> BootstrapReport:
    """
    Bootstrap cross-validation of one estimator.

    Every iteration draws a fresh train/select/test split. Ridge, lasso and
    elastic net are evaluated on the coarse grid, then on a fine grid
    around the coarse consensus; BoATS sweeps its threshold grid once; OLS
    has no meta-parameter. The consensus meta-parameter minimizes the mean
    select loss over iterations, and beta_opt_expected averages the weights
    fitted there. Test metrics use each iteration's own best value, with the
    consensus_* fields repeating them at the consensus.

    Args:
        data: Full dataset
        method: Estimator tag
        sweep: λ sweep for ridge/lasso/elastic net (default SweepPlan.default())
        iterations: Number of bootstrap iterations
        master_seed: Seed from which every iteration seed is derived
        truth: Ground truth, enabling RMS and support metrics
        settings: Solver and protocol settings

    Returns:
        BootstrapReport

    Raises:
        BootstrapAbortedError: more than 10% of iterations failed
    """
    method = MethodTag(method)
    settings = settings or BootstrapSettings()
    if iterations < 1:
        raise InvalidParameterError(f"iterations must be >= 1, got {iterations}")
    if truth is not None and truth.d != data.d:
        raise DimensionError(f"truth has d={truth.d} but data has d={data.d}")

    with OperationTimer(logger, f"Bootstrap {method.value}", iterations=iterations, d=data.d, m=data.m):
        seeds = [derive_seed(master_seed, 'iteration', i) for i in range(iterations)]
        sweeps = [_IterationSweep(make_split(data.m, settings.fractions, seed)) for seed in seeds]
        if 0 < sweeps[0].plan.test_idx.size < 2:
            logger.warning(f"m={data.m} leaves one test row per iteration; test metrics will be NaN")

        if method is MethodTag.BOATS:
            grid = settings.grid().multipliers.copy()
            _run_sweeps(data, method, sweeps, None, settings, seeds)
        elif method is MethodTag.OLS:
            grid = np.zeros(1)
            _run_sweeps(data, method, sweeps, None, settings, seeds)
        else:
            sweep = sweep or SweepPlan.default()
            coarse = sweep.coarse_grid.copy()
            _run_sweeps(data, method, sweeps, coarse, settings, seeds)
            _check_failures(sweeps, method)
            center = float(coarse[best_threshold_index(*_mean_losses(sweeps))])
            fine = np.setdiff1d(sweep.refine(center), coarse)
            if fine.size:
                _run_sweeps(data, method, sweeps, fine, settings, seeds)
            # one ascending grid so ties resolve to the smallest λ
            grid = np.concatenate([coarse, fine])
            order = np.argsort(grid, kind='stable')
            grid = grid[order]
            for s in sweeps:
                if s.error is None:
                    s.losses, s.weights = s.losses[order], s.weights[order]

        _check_failures(sweeps, method)
        mean_losses, mean_reference = _mean_losses(sweeps)
        consensus = best_threshold_index(mean_losses, mean_reference)

        records: List[IterationRecord] = []
        for seed, s in zip(seeds, sweeps):
            if s.error is None:
                try:
                    _, _, test = s.plan.apply(data)
                    best = best_threshold_index(s.losses, s.reference)
                    beta = s.weights[best]
                    metrics = _test_metrics(beta, test, truth)
                    at_consensus = _test_metrics(s.weights[consensus], test, truth)
                    records.append(IterationRecord(
                        seed=seed,
                        meta_parameter=float(grid[best]),
                        weights=beta,
                        consensus_r2=at_consensus['test_r2'],
                        consensus_bic=at_consensus['test_bic'],
                        consensus_rms=at_consensus.get('rms', math.nan),
                        **metrics,
                    ))
                    continue
                except (ArithmeticError, ValueError) as e:
                    log_error(logger, e, f"Bootstrap test metrics ({method.value})")
                    s.error = f"{type(e).__name__}: {e}"
            records.append(IterationRecord(
                seed=seed, meta_parameter=math.nan, weights=None, test_r2=math.nan,
                test_bic=math.nan, test_residual_ms=math.nan, support_size=math.nan, error=s.error))

        _check_failures(sweeps, method)
        ok = [s for s in sweeps if s.error is None]
        best_weights = np.vstack([r.weights for r in records if not r.failed])
        consensus_weights = np.vstack([s.weights[consensus] for s in ok])
        failures = len(sweeps) - len(ok)

    report = BootstrapReport(
        method_tag=method,
        per_iteration=records,
        aggregated=_aggregate(records),
        beta_opt_expected=WeightVector(consensus_weights.mean(axis=0)),
        consensus_meta_parameter=float(grid[consensus]),
        variability=estimation_variability(list(best_weights)) if len(ok) > 1 else math.nan,
        weight_mean=best_weights.mean(axis=0),
        weight_sd=best_weights.std(axis=0, ddof=1) if len(ok) > 1 else np.zeros(data.d),
        meta_grid=grid,
        mean_select_losses=mean_losses,
        failures=failures,
    )
    log_operation(logger, f"Bootstrap {method.value}", success=True, iterations=iterations,
                  failures=failures, consensus=report.consensus_meta_parameter)
    return report
