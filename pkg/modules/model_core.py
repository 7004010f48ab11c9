#!/usr/bin/env python3
"""
Model core module for the BoATS toolkit.
Provides the shared data types, the linear forward model and the
ordinary least-squares solver every estimator builds on.

There is no intercept term: responses are assumed zero-mean. Center real
data before fitting.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .shared import DimensionError, InvalidParameterError
from .logger import get_logger

logger = get_logger(__name__)

ArrayLike = Union[np.ndarray, Sequence[float]]


class MethodTag(str, Enum):
    """Estimator that produced a fit."""
    OLS = 'ols'
    RIDGE = 'ridge'
    LASSO = 'lasso'
    ELASTIC_NET = 'elastic_net'
    BOATS = 'boats'


def _frozen_array(values: ArrayLike, ndim: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64, copy=True)
    if array.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidParameterError(f"{name} contains NaN or Inf")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Model coefficients β of length d."""
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _frozen_array(self.values, 1, 'weights'))

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @classmethod
    def zeros(cls, d: int) -> 'WeightVector':
        return cls(np.zeros(d))

    def support(self) -> 'Support':
        return Support.from_weights(self)

    def l0(self) -> int:
        return int(np.count_nonzero(self.values))

    def __len__(self) -> int:
        return self.d


@dataclass(frozen=True, eq=False)
class Dataset:
    """m input-output pairs: inputs is m×d, outputs has length m."""
    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        inputs = _frozen_array(self.inputs, 2, 'inputs')
        outputs = _frozen_array(self.outputs, 1, 'outputs')
        if inputs.shape[0] != outputs.shape[0]:
            raise DimensionError(
                f"inputs have {inputs.shape[0]} rows but outputs have length {outputs.shape[0]}")
        object.__setattr__(self, 'inputs', inputs)
        object.__setattr__(self, 'outputs', outputs)

    @property
    def m(self) -> int:
        return self.inputs.shape[0]

    @property
    def d(self) -> int:
        return self.inputs.shape[1]

    def subset(self, indices: ArrayLike) -> 'Dataset':
        """Rows selected by indices, in the given order."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.inputs[idx], self.outputs[idx])


@dataclass(frozen=True, eq=False)
class Support:
    """Sorted nonzero coordinates of a weight vector in [0, d)."""
    nonzero_indices: np.ndarray
    d: int

    def __post_init__(self):
        idx = np.array(self.nonzero_indices, dtype=np.intp).reshape(-1)
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0 or idx[-1] >= self.d):
            raise InvalidParameterError(
                f"support indices must be strictly increasing in [0, {self.d})")
        idx.setflags(write=False)
        object.__setattr__(self, 'nonzero_indices', idx)

    @property
    def k(self) -> int:
        return int(self.nonzero_indices.size)

    @classmethod
    def full(cls, d: int) -> 'Support':
        return cls(np.arange(d), d)

    @classmethod
    def from_weights(cls, weights: WeightVector) -> 'Support':
        return cls(np.flatnonzero(weights.values), weights.d)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> 'Support':
        mask = np.asarray(mask, dtype=bool)
        return cls(np.flatnonzero(mask), mask.shape[0])

    def mask(self) -> np.ndarray:
        mask = np.zeros(self.d, dtype=bool)
        mask[self.nonzero_indices] = True
        return mask

    def __contains__(self, j: int) -> bool:
        return bool(np.any(self.nonzero_indices == j))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Support):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.nonzero_indices, other.nonzero_indices)

    def __hash__(self) -> int:
        return hash((self.d, self.nonzero_indices.tobytes()))


@dataclass(frozen=True, eq=False)
class FitResult:
    """
    Estimated weights with the meta-parameter that produced them.

    diagnostics keys used across the package: rank, rank_deficient,
    converged, n_iter, objective_history.
    """
    weights: WeightVector
    meta_parameter: float
    method_tag: MethodTag
    train_loss: float
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.meta_parameter < 0:
            raise InvalidParameterError(f"meta_parameter must be >= 0, got {self.meta_parameter}")
        if not (self.train_loss >= 0 and np.isfinite(self.train_loss)):
            raise InvalidParameterError(f"train_loss must be finite and >= 0, got {self.train_loss}")


def as_values(weights: Union[WeightVector, ArrayLike]) -> np.ndarray:
    """Raw coefficient array of a WeightVector or array-like."""
    if isinstance(weights, WeightVector):
        return weights.values
    return np.asarray(weights, dtype=np.float64)


def predict(weights: Union[WeightVector, ArrayLike], inputs: ArrayLike) -> np.ndarray:
    """Return Xβ."""
    beta = as_values(weights)
    X = np.asarray(inputs, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != beta.shape[0]:
        raise DimensionError(
            f"inputs have {X.shape[-1] if X.ndim else 0} columns but weights have length {beta.shape[0]}")
    return X @ beta


def residual_sum_of_squares(weights: Union[WeightVector, ArrayLike], inputs: ArrayLike,
                            outputs: ArrayLike) -> float:
    residual = np.asarray(outputs, dtype=np.float64) - predict(weights, inputs)
    return float(residual @ residual)


def least_squares_loss(weights: Union[WeightVector, ArrayLike], data: Dataset) -> float:
    """Σ_i (y_i − β·x_i)² over the dataset."""
    return residual_sum_of_squares(weights, data.inputs, data.outputs)


def lstsq_solve(inputs: np.ndarray, targets: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    Minimum-norm least-squares solution via a complete orthogonal factorization.

    Args:
        inputs: m×p design matrix
        targets: length-m vector or m×r matrix of right-hand sides

    Returns:
        (coefficients, numerical rank of inputs)
    """
    m, p = inputs.shape
    if p == 0:
        shape = (0,) if targets.ndim == 1 else (0, targets.shape[1])
        return np.zeros(shape), 0
    if m == 0:
        shape = (p,) if targets.ndim == 1 else (p, targets.shape[1])
        return np.zeros(shape), 0
    coef, _, rank, _ = scipy.linalg.lstsq(inputs, targets, lapack_driver='gelsy', check_finite=False)
    return coef, int(rank)


def ols_fit(data: Dataset, support: Optional[Support] = None) -> FitResult:
    """
    Ordinary least squares restricted to the columns of `support`.

    Weights outside the support are exactly 0. Rank-deficient or
    underdetermined systems return the minimum-norm solution with
    diagnostics['rank_deficient'] set.

    Args:
        data: Training data
        support: Columns to fit; all columns when None

    Returns:
        FitResult tagged OLS with meta_parameter 0
    """
    if support is None:
        columns = np.arange(data.d)
    else:
        if support.d != data.d:
            raise DimensionError(f"support has d={support.d} but data has d={data.d}")
        columns = support.nonzero_indices

    beta = np.zeros(data.d)
    coef, rank = lstsq_solve(data.inputs[:, columns], data.outputs)
    beta[columns] = coef
    rank_deficient = rank < columns.size
    if rank_deficient:
        logger.debug(f"Rank-deficient OLS: rank {rank} < {columns.size} columns (m={data.m})")

    weights = WeightVector(beta)
    return FitResult(
        weights=weights,
        meta_parameter=0.0,
        method_tag=MethodTag.OLS,
        train_loss=least_squares_loss(weights, data),
        diagnostics={'rank': rank, 'rank_deficient': rank_deficient},
    )


def generate_responses(weights: Union[WeightVector, ArrayLike], inputs: ArrayLike,
                       noise_sigma: float, rng_seed: int) -> np.ndarray:
    """y = Xβ + ε with ε ~ N(0, noise_sigma²) drawn from a seeded generator."""
    if noise_sigma < 0 or not np.isfinite(noise_sigma):
        raise InvalidParameterError(f"noise_sigma must be finite and >= 0, got {noise_sigma}")
    signal = predict(weights, inputs)
    if noise_sigma == 0:
        return signal
    rng = np.random.default_rng(rng_seed)
    return signal + noise_sigma * rng.standard_normal(signal.shape[0])
