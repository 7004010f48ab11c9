#!/usr/bin/env python3
"""
Synthgen module for the BoATS toolkit.
Generates sparse ground-truth models and standardized Gaussian designs.

Distribution parameterizations (overridable through ModelSpec.params):
    laplace                           location 0, scale 1, exact zeros redrawn
    uniform                           Uniform(-2, 2) without the dead zone (-0.05, 0.05)
    symmetric_increasing_exponential  random sign × (2 − E), E ~ Exp(rate 1.5) truncated to [0, 1.9]
    asymmetric_clustered              70% N(2, 0.1²), 30% N(-0.8, 0.1²)
"""

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .shared import DEFAULT_NOISE_FACTOR, InvalidParameterError
from .model_core import Dataset, Support, WeightVector, generate_responses
from .logger import get_logger

logger = get_logger(__name__)


class Distribution(str, Enum):
    """Shape of the nonzero true weights."""
    LAPLACE = 'laplace'
    UNIFORM = 'uniform'
    SYMMETRIC_INCREASING_EXPONENTIAL = 'symmetric_increasing_exponential'
    ASYMMETRIC_CLUSTERED = 'asymmetric_clustered'


DEFAULT_DISTRIBUTION_PARAMS: Dict[Distribution, Dict[str, float]] = {
    Distribution.LAPLACE: {'loc': 0.0, 'scale': 1.0},
    Distribution.UNIFORM: {'low': -2.0, 'high': 2.0, 'dead_zone': 0.05},
    Distribution.SYMMETRIC_INCREASING_EXPONENTIAL: {'peak': 2.0, 'rate': 1.5, 'truncate': 1.9},
    Distribution.ASYMMETRIC_CLUSTERED: {'share': 0.7, 'center_high': 2.0, 'center_low': -0.8, 'sd': 0.1},
}


def derive_seed(master_seed: int, *coordinates: Any) -> int:
    """Stable 63-bit seed from a master seed and any labelling coordinates."""
    key = repr((int(master_seed),) + tuple(str(c) for c in coordinates)).encode('utf-8')
    return int.from_bytes(hashlib.sha256(key).digest()[:8], 'big') >> 1


def dimension_for(k: int, sparsity: float) -> int:
    """d = round(k / (1 − sparsity))."""
    if not 0.0 <= sparsity < 1.0:
        raise InvalidParameterError(f"sparsity must lie in [0, 1), got {sparsity}")
    return int(round(k / (1.0 - sparsity)))


@dataclass(frozen=True)
class ModelSpec:
    """A synthetic sparse model: k nonzeros of a distribution padded with zeros to sparsity."""
    distribution: Distribution
    k: int
    sparsity: float
    noise_factor: float = DEFAULT_NOISE_FACTOR
    seed: int = 0
    params: Optional[Dict[str, float]] = field(default=None, hash=False)

    def __post_init__(self):
        object.__setattr__(self, 'distribution', Distribution(self.distribution))
        if self.k < 1:
            raise InvalidParameterError(f"k must be >= 1, got {self.k}")
        if not 0.0 <= self.sparsity < 1.0:
            raise InvalidParameterError(f"sparsity must lie in [0, 1), got {self.sparsity}")
        if not (self.noise_factor >= 0 and math.isfinite(self.noise_factor)):
            raise InvalidParameterError(f"noise_factor must be >= 0, got {self.noise_factor}")
        if self.params:
            unknown = set(self.params) - set(DEFAULT_DISTRIBUTION_PARAMS[self.distribution])
            if unknown:
                raise InvalidParameterError(
                    f"unknown {self.distribution.value} parameters: {sorted(unknown)}")

    @property
    def d(self) -> int:
        return dimension_for(self.k, self.sparsity)

    def distribution_params(self) -> Dict[str, float]:
        merged = dict(DEFAULT_DISTRIBUTION_PARAMS[self.distribution])
        merged.update(self.params or {})
        return merged


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """True weights, their support and the noise standard deviation applied."""
    weights: WeightVector
    support: Support
    noise_sigma: float

    @property
    def k(self) -> int:
        return self.support.k

    @property
    def d(self) -> int:
        return self.weights.d


def _draw_nonzero(distribution: Distribution, params: Dict[str, float], size: int,
                  rng: np.random.Generator) -> np.ndarray:
    if distribution is Distribution.LAPLACE:
        return rng.laplace(params['loc'], params['scale'], size)
    if distribution is Distribution.UNIFORM:
        values = rng.uniform(params['low'], params['high'], size)
        values[np.abs(values) < params['dead_zone']] = 0.0
        return values
    if distribution is Distribution.SYMMETRIC_INCREASING_EXPONENTIAL:
        rate, cap = params['rate'], params['truncate']
        # inverse CDF of the exponential truncated to [0, cap]
        u = rng.uniform(0.0, 1.0, size)
        excess = -np.log1p(-u * (1.0 - math.exp(-rate * cap))) / rate
        signs = rng.choice((-1.0, 1.0), size)
        return signs * (params['peak'] - excess)
    high = rng.uniform(0.0, 1.0, size) < params['share']
    centers = np.where(high, params['center_high'], params['center_low'])
    return rng.normal(centers, params['sd'])


def draw_weights(spec: ModelSpec) -> GroundTruth:
    """
    Draw the k nonzero weights and scatter them over d coordinates.

    Zero draws (the uniform dead zone, or an exact 0 from any sampler) are
    redrawn so the support always has exactly k entries.
    """
    rng = np.random.default_rng(spec.seed)
    params = spec.distribution_params()
    d = spec.d

    values = _draw_nonzero(spec.distribution, params, spec.k, rng)
    while np.any(values == 0.0):
        zeros = values == 0.0
        values[zeros] = _draw_nonzero(spec.distribution, params, int(zeros.sum()), rng)

    positions = np.sort(rng.choice(d, size=spec.k, replace=False))
    beta = np.zeros(d)
    beta[positions] = values
    weights = WeightVector(beta)
    return GroundTruth(
        weights=weights,
        support=Support(positions, d),
        noise_sigma=noise_sigma_for(spec, weights),
    )


def noise_sigma_for(spec: ModelSpec, weights: WeightVector) -> float:
    """Noise standard deviation sqrt(c · Σ|β|); the noise variance is c · Σ|β|."""
    if spec.noise_factor < 0:
        raise InvalidParameterError(f"noise_factor must be >= 0, got {spec.noise_factor}")
    return math.sqrt(spec.noise_factor * float(np.abs(weights.values).sum()))


def make_dataset(truth: GroundTruth, m: int, seed: int) -> Dataset:
    """m rows of i.i.d. standard normal inputs with responses from the true model."""
    if m < 1:
        raise InvalidParameterError(f"m must be >= 1, got {m}")
    rng = np.random.default_rng(seed)
    inputs = rng.standard_normal((m, truth.d))
    outputs = generate_responses(truth.weights, inputs, truth.noise_sigma, derive_seed(seed, 'noise'))
    return Dataset(inputs, outputs)


def samples_for(d: int, sample_ratio: float) -> int:
    """m = round(ratio · d), at least 1."""
    if not sample_ratio > 0:
        raise InvalidParameterError(f"sample ratio must be > 0, got {sample_ratio}")
    return max(1, int(round(sample_ratio * d)))


def make_problem(spec: ModelSpec, sample_ratio: float,
                 data_seed: Optional[int] = None) -> Tuple[GroundTruth, Dataset]:
    """Ground truth and a dataset with m = ratio · d rows."""
    truth = draw_weights(spec)
    seed = derive_seed(spec.seed, 'data') if data_seed is None else data_seed
    data = make_dataset(truth, samples_for(truth.d, sample_ratio), seed)
    logger.debug(f"Generated {spec.distribution.value} problem k={spec.k} d={truth.d} "
                 f"m={data.m} sigma={truth.noise_sigma:.4g}")
    return truth, data
