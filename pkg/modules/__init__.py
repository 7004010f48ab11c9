#!/usr/bin/env python3
"""
BoATS toolkit modules package.
Main functions are exported for easy access.
"""

# Shared
from .shared import (
    BoatsError, DimensionError, InvalidParameterError, UndefinedMetricError,
    ConfigError, DatasetFormatError, BootstrapAbortedError, console
)

# Logging
from .logger import configure_logging, get_logger, log_operation, log_error, OperationTimer, timed

# Model core
from .model_core import (
    MethodTag, WeightVector, Dataset, Support, FitResult,
    predict, least_squares_loss, ols_fit, generate_responses
)

# Regularizers
from .regularizers import (
    RegularizerSpec, ridge_fit, ridge_path, lasso_fit, lasso_path,
    elastic_net_fit, elastic_net_path, penalized_objective, kkt_violation
)

# BoATS
from .boats import (
    NullWeightProfile, ThresholdGrid, BoatsResult,
    estimate_null, moment_null, threshold_weights, boats_fit
)

# Synthetic data
from .synthgen import (
    Distribution, ModelSpec, GroundTruth, derive_seed,
    draw_weights, make_dataset, make_problem
)

# Evaluation
from .evaluation import (
    SplitPlan, SweepPlan, BootstrapSettings, BootstrapReport, IterationRecord,
    make_split, kfold_splits, r_squared, residual_mean_square, bic, rms_error,
    estimation_variability, support_ratio, selection_errors, run_bootstrap
)

# Config, datasets and benchmark
from .config import ExperimentGrid, GridCell, load_grid, parse_grid, load_generate, preset_config
from .datasets import read_dataset, write_dataset, read_truth, read_metadata
from .benchmark import RESULT_COLUMNS, run_benchmark, load_results

__all__ = [
    # Shared
    'BoatsError', 'DimensionError', 'InvalidParameterError', 'UndefinedMetricError',
    'ConfigError', 'DatasetFormatError', 'BootstrapAbortedError', 'console',
    # Logging
    'configure_logging', 'get_logger', 'log_operation', 'log_error', 'OperationTimer', 'timed',
    # Model core
    'MethodTag', 'WeightVector', 'Dataset', 'Support', 'FitResult',
    'predict', 'least_squares_loss', 'ols_fit', 'generate_responses',
    # Regularizers
    'RegularizerSpec', 'ridge_fit', 'ridge_path', 'lasso_fit', 'lasso_path',
    'elastic_net_fit', 'elastic_net_path', 'penalized_objective', 'kkt_violation',
    # BoATS
    'NullWeightProfile', 'ThresholdGrid', 'BoatsResult',
    'estimate_null', 'moment_null', 'threshold_weights', 'boats_fit',
    # Synthetic data
    'Distribution', 'ModelSpec', 'GroundTruth', 'derive_seed',
    'draw_weights', 'make_dataset', 'make_problem',
    # Evaluation
    'SplitPlan', 'SweepPlan', 'BootstrapSettings', 'BootstrapReport', 'IterationRecord',
    'make_split', 'kfold_splits', 'r_squared', 'residual_mean_square', 'bic', 'rms_error',
    'estimation_variability', 'support_ratio', 'selection_errors', 'run_bootstrap',
    # Config, datasets and benchmark
    'ExperimentGrid', 'GridCell', 'load_grid', 'parse_grid', 'load_generate', 'preset_config',
    'read_dataset', 'write_dataset', 'read_truth', 'read_metadata',
    'RESULT_COLUMNS', 'run_benchmark', 'load_results',
]
