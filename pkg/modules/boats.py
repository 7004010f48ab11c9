#!/usr/bin/env python3
"""
BoATS module.
Bootstrapped Adaptive Threshold Selection: permutation null magnitudes,
hard thresholding at multiples of the null, OLS refit of the survivors and
selection of the multiple by held-out loss.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .shared import (
    DEFAULT_PERMUTATIONS, DEFAULT_THRESHOLD_HIGH, DEFAULT_THRESHOLD_LOW,
    DEFAULT_THRESHOLD_POINTS, PERFECT_FIT_RTOL, DimensionError, InvalidParameterError,
)
from .model_core import (
    Dataset, FitResult, MethodTag, Support, WeightVector,
    least_squares_loss, lstsq_solve, ols_fit,
)
from .logger import get_logger, OperationTimer

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class NullWeightProfile:
    """
    Expected magnitude of each coefficient when inputs and outputs are unrelated.

    spread is the per-coordinate standard deviation of the null magnitudes
    (zeros when only one permutation, or for the moment-based profile).
    """
    magnitudes: np.ndarray
    n_permutations: int
    seed: int
    spread: Optional[np.ndarray] = None
    rank_deficient: bool = False

    def __post_init__(self):
        magnitudes = np.array(self.magnitudes, dtype=np.float64)
        if magnitudes.ndim != 1 or not np.all(np.isfinite(magnitudes)) or np.any(magnitudes < 0):
            raise InvalidParameterError("null magnitudes must be a finite nonnegative vector")
        if self.n_permutations < 1:
            raise InvalidParameterError(f"n_permutations must be >= 1, got {self.n_permutations}")
        spread = np.zeros_like(magnitudes) if self.spread is None else np.array(self.spread, dtype=np.float64)
        magnitudes.setflags(write=False)
        spread.setflags(write=False)
        object.__setattr__(self, 'magnitudes', magnitudes)
        object.__setattr__(self, 'spread', spread)

    @property
    def d(self) -> int:
        return self.magnitudes.shape[0]


@dataclass(frozen=True, eq=False)
class ThresholdGrid:
    """Candidate multipliers λ₃, starting at 0 and strictly increasing."""
    multipliers: np.ndarray

    def __post_init__(self):
        multipliers = np.array(self.multipliers, dtype=np.float64).reshape(-1)
        if multipliers.size == 0 or multipliers[0] != 0.0:
            raise InvalidParameterError("threshold grid must start at 0")
        if not np.all(np.isfinite(multipliers)) or np.any(np.diff(multipliers) <= 0):
            raise InvalidParameterError("threshold grid must be finite and strictly increasing")
        multipliers.setflags(write=False)
        object.__setattr__(self, 'multipliers', multipliers)

    @classmethod
    def default(cls, points: int = DEFAULT_THRESHOLD_POINTS, low: float = DEFAULT_THRESHOLD_LOW,
                high: float = DEFAULT_THRESHOLD_HIGH) -> 'ThresholdGrid':
        """{0} plus `points` geometrically spaced multipliers over [low, high]."""
        if not 0 < low < high or points < 1:
            raise InvalidParameterError(f"bad threshold grid: points={points}, low={low}, high={high}")
        return cls(np.concatenate(([0.0], np.geomspace(low, high, points))))

    def __len__(self) -> int:
        return self.multipliers.shape[0]


@dataclass(frozen=True, eq=False)
class BoatsResult:
    """
    Outcome of one threshold sweep.

    per_threshold_weights[i] is the refit at multipliers[i]. The chosen row is
    the one best_threshold_index picks from the select losses.
    """
    weights: WeightVector
    chosen_multiplier: float
    n_zeroed: int
    per_threshold_losses: List[Tuple[float, float]]
    refit_flags: List[bool]
    per_threshold_weights: np.ndarray
    chosen_index: int
    initial_fit: FitResult

    def as_fit_result(self, train: Dataset) -> FitResult:
        return FitResult(
            weights=self.weights,
            meta_parameter=self.chosen_multiplier,
            method_tag=MethodTag.BOATS,
            train_loss=least_squares_loss(self.weights, train),
            diagnostics={'rank_deficient': self.refit_flags[self.chosen_index],
                         'n_zeroed': self.n_zeroed},
        )


def estimate_null(data: Dataset, n_permutations: int = DEFAULT_PERMUTATIONS,
                  seed: int = 0) -> NullWeightProfile:
    """
    Null magnitudes from OLS fits on response permutations.

    magnitudes[j] is the mean over permutations of |β_perm^j| (not the
    magnitude of the mean, which vanishes by symmetry). All permutations
    share one factorization of X.

    Args:
        data: Dataset whose responses are permuted (X stays fixed)
        n_permutations: Number of permutations
        seed: Seed of the permutation generator

    Returns:
        NullWeightProfile
    """
    if n_permutations < 1:
        raise InvalidParameterError(f"n_permutations must be >= 1, got {n_permutations}")

    with OperationTimer(logger, "Estimate null", d=data.d, m=data.m, permutations=n_permutations):
        rng = np.random.default_rng(seed)
        permuted = np.empty((data.m, n_permutations))
        for p in range(n_permutations):
            permuted[:, p] = data.outputs[rng.permutation(data.m)]
        coef, rank = lstsq_solve(data.inputs, permuted)
        magnitudes = np.abs(coef)

    rank_deficient = rank < data.d
    if rank_deficient:
        logger.warning(f"Null estimation on rank-deficient design (rank {rank} < d={data.d})")
    spread = magnitudes.std(axis=1, ddof=1) if n_permutations > 1 else np.zeros(data.d)
    return NullWeightProfile(
        magnitudes=magnitudes.mean(axis=1),
        n_permutations=n_permutations,
        seed=seed,
        spread=spread,
        rank_deficient=rank_deficient,
    )


def moment_null(data: Dataset) -> NullWeightProfile:
    """Constant null profile (|mean(y)| + var(y)) / d with the unbiased variance."""
    if data.m < 2:
        raise InvalidParameterError(f"moment null needs m >= 2, got m={data.m}")
    y = data.outputs
    value = (abs(float(y.mean())) + float(y.var(ddof=1))) / data.d
    return NullWeightProfile(magnitudes=np.full(data.d, value), n_permutations=1, seed=0)


def threshold_weights(init: WeightVector, null: NullWeightProfile, multiplier: float) -> Support:
    """Coordinates with |init_j| >= null_j × multiplier (strictly smaller ones are zeroed)."""
    if init.d != null.d:
        raise DimensionError(f"weights have d={init.d} but null profile has d={null.d}")
    if multiplier < 0:
        raise InvalidParameterError(f"multiplier must be >= 0, got {multiplier}")
    return Support.from_mask(np.abs(init.values) >= null.magnitudes * multiplier)


def best_threshold_index(losses: np.ndarray, reference: float) -> int:
    """
    Index of the chosen threshold for a vector of select losses.

    The first minimum wins, except when some losses are perfect fits
    (at most PERFECT_FIT_RTOL × reference, with reference = Σy_sel²): then
    the last perfect fit, the sparsest model reproducing the select
    responses to machine precision, is chosen.
    """
    losses = np.asarray(losses)
    perfect = np.flatnonzero(losses <= PERFECT_FIT_RTOL * reference)
    if perfect.size and reference > 0:
        return int(perfect[-1])
    return int(np.argmin(losses))


def boats_fit(train: Dataset, select: Dataset, null: NullWeightProfile,
              grid: ThresholdGrid) -> BoatsResult:
    """
    Threshold sweep with OLS refits, choosing the multiplier by select-set loss.

    Args:
        train: Data for the initial fit and the refits
        select: Held-out data scoring each threshold
        null: Null magnitudes (length d)
        grid: Candidate multipliers

    Returns:
        BoatsResult; among equal losses the smallest multiplier wins unless
        the select responses are reproduced exactly, then the largest exact one
    """
    if train.d != select.d or train.d != null.d:
        raise DimensionError(
            f"train d={train.d}, select d={select.d} and null d={null.d} must agree")

    initial = ols_fit(train)
    n = len(grid)
    refits: Dict[Support, FitResult] = {}
    losses = np.empty(n)
    flags: List[bool] = []
    weights = np.zeros((n, train.d))
    supports: List[Support] = []

    for i, multiplier in enumerate(grid.multipliers):
        support = threshold_weights(initial.weights, null, float(multiplier))
        # identical supports share one refit
        if support not in refits:
            refits[support] = initial if support.k == train.d else ols_fit(train, support)
        refit = refits[support]
        supports.append(support)
        weights[i] = refit.weights.values
        flags.append(bool(refit.diagnostics.get('rank_deficient', False)))
        losses[i] = least_squares_loss(refit.weights, select)

    best = best_threshold_index(losses, float(select.outputs @ select.outputs))
    chosen = supports[best]
    logger.debug(f"BoATS chose multiplier {grid.multipliers[best]:.4g} keeping {chosen.k}/{train.d}")

    weights.setflags(write=False)
    return BoatsResult(
        weights=WeightVector(weights[best]),
        chosen_multiplier=float(grid.multipliers[best]),
        n_zeroed=train.d - chosen.k,
        per_threshold_losses=[(float(mult), float(loss)) for mult, loss in zip(grid.multipliers, losses)],
        refit_flags=flags,
        per_threshold_weights=weights,
        chosen_index=best,
        initial_fit=initial,
    )
