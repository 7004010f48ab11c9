#!/usr/bin/env python3
"""
Datasets module for the BoATS toolkit.
Reads and writes dataset CSVs (header x0..x{d-1},y), ground-truth weight
files and the YAML metadata sidecar that pins how a dataset was generated.

Floats are written in their shortest round-trip form, so regenerating a
dataset from its sidecar reproduces the files byte for byte.
"""

import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import yaml

from .shared import DatasetFormatError
from .model_core import Dataset, WeightVector
from .logger import get_logger, log_operation

logger = get_logger(__name__)

RESPONSE_COLUMN = 'y'
TRUTH_COLUMN = 'beta'
TRUTH_SUFFIX = '_truth.csv'
META_SUFFIX = '.meta.yaml'


def input_columns(d: int) -> List[str]:
    return [f"x{j}" for j in range(d)]


def truth_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.stem + TRUTH_SUFFIX)


def meta_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.stem + META_SUFFIX)


def write_dataset(data: Dataset, path: Union[str, Path], truth: Optional[WeightVector] = None,
                  metadata: Optional[Dict[str, Any]] = None) -> List[Path]:
    """
    Write a dataset CSV plus, optionally, its truth file and metadata sidecar.

    Args:
        data: Inputs and responses
        path: Dataset CSV path (the truth file and sidecar sit next to it)
        truth: True weights, written as a single 'beta' column
        metadata: Mapping dumped as YAML

    Returns:
        Paths of every file written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    frame = pd.DataFrame(data.inputs, columns=input_columns(data.d))
    frame[RESPONSE_COLUMN] = data.outputs
    frame.to_csv(path, index=False, lineterminator='\n')
    written = [path]

    if truth is not None:
        pd.DataFrame({TRUTH_COLUMN: truth.values}).to_csv(truth_path(path), index=False, lineterminator='\n')
        written.append(truth_path(path))
    if metadata is not None:
        with open(meta_path(path), 'w', encoding='utf-8') as f:
            yaml.safe_dump(metadata, f, default_flow_style=False, sort_keys=True)
        written.append(meta_path(path))

    log_operation(logger, "Write dataset", file=str(path), m=data.m, d=data.d, files=len(written))
    return written


def _numeric_frame(path: Path) -> pd.DataFrame:
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as e:
        raise DatasetFormatError(f"{path}: ragged CSV ({e})") from e
    except pd.errors.EmptyDataError as e:
        raise DatasetFormatError(f"{path}: file is empty") from e

    # short rows are padded with NaN even with keep_default_na=False
    if raw.isna().to_numpy().any():
        row = int(np.flatnonzero(raw.isna().to_numpy().any(axis=1))[0])
        raise DatasetFormatError(f"{path}: ragged CSV, data row {row + 1} has too few fields")

    # float() parses the shortest round-trip text back to the exact value
    numeric = raw.apply(lambda column: column.map(_parse_float)).astype(np.float64)
    bad = ~np.isfinite(numeric.to_numpy())
    if bad.any():
        row, col = (int(i[0]) for i in np.nonzero(bad))
        column = raw.columns[col]
        raise DatasetFormatError(
            f"{path}: non-numeric cell {raw.iat[row, col]!r} in column '{column}', data row {row + 1}")
    return numeric


def _parse_float(cell: str) -> float:
    try:
        return float(cell)
    except ValueError:
        return math.nan


def read_dataset(path: Union[str, Path], response_column: str = RESPONSE_COLUMN) -> Tuple[Dataset, List[str]]:
    """
    Read a CSV with a header row into a Dataset.

    Every column other than response_column is an input, in file order.

    Returns:
        (dataset, input column names)

    Raises:
        DatasetFormatError: ragged rows, non-numeric cells or a missing response column
    """
    path = Path(path)
    frame = _numeric_frame(path)
    if response_column not in frame.columns:
        raise DatasetFormatError(f"{path}: response column '{response_column}' not found")
    columns = [c for c in frame.columns if c != response_column]
    if not columns:
        raise DatasetFormatError(f"{path}: no input columns besides '{response_column}'")
    if len(frame) == 0:
        raise DatasetFormatError(f"{path}: no data rows")

    data = Dataset(frame[columns].to_numpy(), frame[response_column].to_numpy())
    logger.debug(f"Read dataset {path}: m={data.m}, d={data.d}")
    return data, columns


def read_truth(path: Union[str, Path]) -> WeightVector:
    """Ground-truth weights from a single-column 'beta' CSV."""
    path = Path(path)
    frame = _numeric_frame(path)
    if TRUTH_COLUMN not in frame.columns:
        raise DatasetFormatError(f"{path}: column '{TRUTH_COLUMN}' not found")
    return WeightVector(frame[TRUTH_COLUMN].to_numpy())


def read_metadata(path: Union[str, Path]) -> Dict[str, Any]:
    """Metadata sidecar of a dataset CSV (the CSV path or the sidecar path itself)."""
    path = Path(path)
    sidecar = path if path.name.endswith(META_SUFFIX) else meta_path(path)
    try:
        with open(sidecar, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise DatasetFormatError(f"{sidecar}: not valid YAML ({e})") from e


def write_weights(path: Union[str, Path], columns: List[str], values: Dict[str, np.ndarray]) -> Path:
    """Per-coordinate weight table: one row per input column, one column per entry of values."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({'column': columns})
    for name, column_values in values.items():
        frame[name] = np.asarray(column_values, dtype=np.float64)
    frame.to_csv(path, index=False, lineterminator='\n')
    logger.debug(f"Wrote weights for {len(columns)} columns to {path}")
    return path
