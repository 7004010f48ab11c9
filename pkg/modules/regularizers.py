#!/usr/bin/env python3
"""
Regularizers module for the BoATS toolkit.
Provides the structured baselines: ridge regression (closed form) and
LASSO / elastic net (cyclic coordinate descent with soft-thresholding).

Scaling:
    ridge        Σ(y − Xβ)² + λ₂‖β‖₂²
    lasso, EN    (1/2m)Σ(y − Xβ)² + λ₁‖β‖₁ + (λ₂/2)‖β‖₂²

so elastic_net_fit((0, λ₂)) equals ridge_fit(m·λ₂). Inputs are never
standardized internally.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .shared import DEFAULT_MAX_ITER, DEFAULT_TOL, DimensionError, InvalidParameterError
from .model_core import Dataset, FitResult, MethodTag, WeightVector, least_squares_loss
from .logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class RegularizerSpec:
    """Penalty weights: lambda1 on ‖β‖₁, lambda2 on ‖β‖₂²/2."""
    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not (self.lambda1 >= 0 and self.lambda2 >= 0):
            raise InvalidParameterError(
                f"lambda1 and lambda2 must be >= 0, got ({self.lambda1}, {self.lambda2})")
        if not (math.isfinite(self.lambda1) and math.isfinite(self.lambda2)):
            raise InvalidParameterError("lambda1 and lambda2 must be finite")

    @classmethod
    def split(cls, lam: float, l1_share: float = 0.5) -> 'RegularizerSpec':
        """Scalar λ divided between the L1 and L2 terms (0.5 is the 50/50 elastic net)."""
        if not 0.0 <= l1_share <= 1.0:
            raise InvalidParameterError(f"l1_share must lie in [0, 1], got {l1_share}")
        return cls(l1_share * lam, (1.0 - l1_share) * lam)

    @property
    def total(self) -> float:
        return self.lambda1 + self.lambda2


def _check_positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise InvalidParameterError(f"{name} must be a positive finite number, got {value}")


# ---------------------------------------------------------------------------
# Ridge
# ---------------------------------------------------------------------------

def _ridge_result(data: Dataset, beta: np.ndarray, lambda2: float) -> FitResult:
    weights = WeightVector(beta)
    return FitResult(
        weights=weights,
        meta_parameter=float(lambda2),
        method_tag=MethodTag.RIDGE,
        train_loss=least_squares_loss(weights, data),
        diagnostics={'converged': True, 'n_iter': 0},
    )


def ridge_fit(data: Dataset, lambda2: float) -> FitResult:
    """
    Ridge regression via the normal equations (XᵀX + λ₂I)β = Xᵀy.

    Args:
        data: Training data
        lambda2: Positive L2 penalty

    Returns:
        FitResult tagged RIDGE
    """
    _check_positive('lambda2', lambda2)
    X, y = data.inputs, data.outputs
    A = X.T @ X
    A[np.diag_indices_from(A)] += lambda2
    beta = scipy.linalg.solve(A, X.T @ y, assume_a='pos', check_finite=False)
    return _ridge_result(data, beta, lambda2)


def ridge_path(data: Dataset, lambdas: Sequence[float]) -> List[FitResult]:
    """Ridge fits for every λ₂ in `lambdas` from one eigendecomposition of XᵀX."""
    for lam in lambdas:
        _check_positive('lambda2', lam)
    X, y = data.inputs, data.outputs
    eigvals, eigvecs = scipy.linalg.eigh(X.T @ X, check_finite=False)
    eigvals = np.clip(eigvals, 0.0, None)
    projected = eigvecs.T @ (X.T @ y)
    return [_ridge_result(data, eigvecs @ (projected / (eigvals + lam)), lam) for lam in lambdas]


# ---------------------------------------------------------------------------
# Coordinate descent
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class _Gram:
    """Scaled sufficient statistics XᵀX/m, Xᵀy/m, yᵀy/m."""
    gram: np.ndarray
    xty: np.ndarray
    yty: float
    m: int

    @classmethod
    def of(cls, data: Dataset) -> '_Gram':
        X, y = data.inputs, data.outputs
        m = data.m
        return cls(X.T @ X / m, X.T @ y / m, float(y @ y) / m, m)


def _objective(stats: _Gram, beta: np.ndarray, spec: RegularizerSpec) -> float:
    smooth = 0.5 * stats.yty - beta @ stats.xty + 0.5 * beta @ (stats.gram @ beta)
    return float(smooth + spec.lambda1 * np.abs(beta).sum() + 0.5 * spec.lambda2 * beta @ beta)


def penalized_objective(weights: WeightVector, data: Dataset, spec: RegularizerSpec) -> float:
    """(1/2m)·RSS + λ₁‖β‖₁ + (λ₂/2)‖β‖₂² evaluated directly from residuals."""
    beta = weights.values
    return (least_squares_loss(weights, data) / (2 * data.m)
            + spec.lambda1 * float(np.abs(beta).sum())
            + 0.5 * spec.lambda2 * float(beta @ beta))


def _coordinate_descent(stats: _Gram, spec: RegularizerSpec, beta0: Optional[np.ndarray],
                        tol: float, max_iter: int,
                        track_objective: bool) -> Tuple[np.ndarray, bool, int, List[float]]:
    d = stats.gram.shape[0]
    beta = np.zeros(d) if beta0 is None else np.array(beta0, dtype=np.float64)
    gram = stats.gram
    diag = np.diag(gram).copy()
    # grad holds Xᵀ(y − Xβ)/m
    grad = stats.xty - gram @ beta
    l1, l2 = spec.lambda1, spec.lambda2
    history = [_objective(stats, beta, spec)] if track_objective else []

    converged = False
    sweep = 0
    for sweep in range(1, max_iter + 1):
        max_delta = 0.0
        for j in range(d):
            denom = diag[j] + l2
            old = beta[j]
            rho = grad[j] + diag[j] * old
            if denom <= 0.0 or abs(rho) <= l1:
                new = 0.0
            else:
                new = (rho - math.copysign(l1, rho)) / denom
            delta = new - old
            if delta != 0.0:
                beta[j] = new
                grad -= delta * gram[j]
                max_delta = max(max_delta, abs(delta))
        if track_objective:
            history.append(_objective(stats, beta, spec))
        if max_delta < tol:
            converged = True
            break

    return beta, converged, sweep, history


def _penalized_fit(data: Dataset, stats: _Gram, spec: RegularizerSpec, tag: MethodTag,
                   meta_parameter: float, tol: float, max_iter: int,
                   warm_start: Optional[np.ndarray], track_objective: bool) -> FitResult:
    if warm_start is not None and np.shape(warm_start) != (data.d,):
        raise DimensionError(f"warm start has shape {np.shape(warm_start)} but data has d={data.d}")
    beta, converged, n_iter, history = _coordinate_descent(
        stats, spec, warm_start, tol, max_iter, track_objective)
    if not converged:
        logger.warning(f"{tag.value} did not converge in {max_iter} sweeps "
                       f"(lambda1={spec.lambda1}, lambda2={spec.lambda2})")

    weights = WeightVector(beta)
    diagnostics = {'converged': converged, 'n_iter': n_iter}
    if track_objective:
        diagnostics['objective_history'] = history
    return FitResult(
        weights=weights,
        meta_parameter=float(meta_parameter),
        method_tag=tag,
        train_loss=least_squares_loss(weights, data),
        diagnostics=diagnostics,
    )


def lasso_fit(data: Dataset, lambda1: float, tol: float = DEFAULT_TOL,
              max_iter: int = DEFAULT_MAX_ITER, warm_start: Optional[np.ndarray] = None,
              track_objective: bool = False) -> FitResult:
    """
    LASSO by cyclic coordinate descent.

    Converged when the largest coordinate change of a sweep is below tol;
    otherwise diagnostics['converged'] is False after max_iter sweeps.
    """
    _check_positive('lambda1', lambda1)
    spec = RegularizerSpec(lambda1, 0.0)
    return _penalized_fit(data, _Gram.of(data), spec, MethodTag.LASSO, lambda1,
                          tol, max_iter, warm_start, track_objective)


def elastic_net_fit(data: Dataset, spec: RegularizerSpec, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER, warm_start: Optional[np.ndarray] = None,
                    track_objective: bool = False) -> FitResult:
    """
    Elastic net by cyclic coordinate descent.

    meta_parameter of the result is λ₁ + λ₂, the scalar λ of a split spec.
    """
    if spec.lambda1 <= 0 and spec.lambda2 <= 0:
        raise InvalidParameterError("elastic net needs lambda1 > 0 or lambda2 > 0")
    return _penalized_fit(data, _Gram.of(data), spec, MethodTag.ELASTIC_NET, spec.total,
                          tol, max_iter, warm_start, track_objective)


def _warm_path(data: Dataset, lambdas: Sequence[float], make_spec, tag: MethodTag,
               tol: float, max_iter: int) -> List[FitResult]:
    stats = _Gram.of(data)
    order = sorted(range(len(lambdas)), key=lambda i: -lambdas[i])
    results: List[Optional[FitResult]] = [None] * len(lambdas)
    beta = None
    for i in order:
        lam = lambdas[i]
        _check_positive('lambda', lam)
        fit = _penalized_fit(data, stats, make_spec(lam), tag, lam, tol, max_iter, beta, False)
        beta = fit.weights.values
        results[i] = fit
    return results


def lasso_path(data: Dataset, lambdas: Sequence[float], tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER) -> List[FitResult]:
    """LASSO fits along a descending, warm-started λ₁ path; results follow the input order."""
    return _warm_path(data, list(lambdas), lambda lam: RegularizerSpec(lam, 0.0),
                      MethodTag.LASSO, tol, max_iter)


def elastic_net_path(data: Dataset, lambdas: Sequence[float], l1_share: float = 0.5,
                     tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> List[FitResult]:
    """Elastic-net fits with λ₁ = l1_share·λ, λ₂ = (1 − l1_share)·λ along a warm-started path."""
    return _warm_path(data, list(lambdas), lambda lam: RegularizerSpec.split(lam, l1_share),
                      MethodTag.ELASTIC_NET, tol, max_iter)


def kkt_violation(weights: WeightVector, data: Dataset, spec: RegularizerSpec) -> float:
    """
    Largest violation of the optimality conditions of the penalized objective.

    Active coordinates need Xⱼᵀr/m − λ₂βⱼ = λ₁·sign(βⱼ); inactive ones need
    |Xⱼᵀr/m| ≤ λ₁.
    """
    beta = weights.values
    grad = data.inputs.T @ (data.outputs - data.inputs @ beta) / data.m
    active = beta != 0
    violation = np.zeros_like(beta)
    violation[active] = np.abs(grad[active] - spec.lambda2 * beta[active]
                               - spec.lambda1 * np.sign(beta[active]))
    violation[~active] = np.maximum(np.abs(grad[~active]) - spec.lambda1, 0.0)
    return float(violation.max()) if violation.size else 0.0
