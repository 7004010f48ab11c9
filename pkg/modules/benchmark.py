#!/usr/bin/env python3
"""
Benchmark module for the BoATS toolkit.
Runs the bootstrap protocol over every cell × method of an experiment grid
and maintains the results CSV.

The results file has a fixed, versioned header. Rows are appended as cells
finish and the file is rewritten in canonical order at the end, so the
worker count never changes its bytes. Rows whose cell_hash matches the
current config are skipped on rerun.
"""

import hashlib
import json
import math
import multiprocessing
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from . import shared
from .shared import BoatsError, DatasetFormatError
from .config import ExperimentGrid, GridCell
from .evaluation import BootstrapReport, run_bootstrap
from .synthgen import derive_seed, make_problem
from .logger import get_logger, log_error, log_operation, OperationTimer

logger = get_logger(__name__)

RESULT_COLUMNS = [
    'schema_version', 'cell_hash',
    'distribution', 'sparsity', 'sample_ratio', 'noise_factor', 'method',
    'k', 'd', 'm', 'iterations', 'master_seed',
    'r2_mean', 'r2_sd',
    'rms_mean', 'rms_sd',
    'variability',
    'bic_mean', 'bic_sd',
    'residual_ms_mean',
    'support_ratio_mean', 'support_ratio_sd',
    'false_positives_mean', 'false_negatives_mean',
    'meta_parameter_mean', 'meta_parameter_sd',
    'consensus_meta_parameter', 'consensus_r2_mean', 'consensus_rms_mean',
    'runtime_seconds', 'failures', 'failure',
]
# aggregated metric -> (mean column, sd column or None)
METRIC_COLUMNS = {
    'test_r2': ('r2_mean', 'r2_sd'),
    'rms': ('rms_mean', 'rms_sd'),
    'test_bic': ('bic_mean', 'bic_sd'),
    'test_residual_ms': ('residual_ms_mean', None),
    'support_ratio': ('support_ratio_mean', 'support_ratio_sd'),
    'false_positives': ('false_positives_mean', None),
    'false_negatives': ('false_negatives_mean', None),
    'meta_parameter': ('meta_parameter_mean', 'meta_parameter_sd'),
    'consensus_r2': ('consensus_r2_mean', None),
    'consensus_rms': ('consensus_rms_mean', None),
}


@dataclass(frozen=True)
class BenchmarkTask:
    """One results row to compute."""
    grid: ExperimentGrid
    cell: GridCell
    method: str

    @property
    def key(self) -> str:
        return cell_hash(self.grid, self.cell, self.method)


def format_value(value: Any) -> str:
    """Shortest round-trip text of a CSV cell."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return '' if value is None else str(value)


def cell_hash(grid: ExperimentGrid, cell: GridCell, method: str) -> str:
    """Digest of everything that determines a row's numbers."""
    payload = {
        'schema_version': shared.RESULTS_SCHEMA_VERSION,
        'cell': [cell.distribution, format_value(cell.sparsity), format_value(cell.sample_ratio),
                 format_value(cell.noise_factor)],
        'method': method,
        'grid': grid.fingerprint(),
    }
    text = json.dumps(payload, sort_keys=True, default=format_value)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]


def cell_seed(grid: ExperimentGrid, cell: GridCell) -> int:
    """Seed of a cell's ground truth and data; shared by all methods so they see identical data."""
    return derive_seed(grid.master_seed, 'cell', cell.distribution, format_value(cell.sparsity),
                       format_value(cell.sample_ratio), format_value(cell.noise_factor))


def _base_row(task: BenchmarkTask) -> Dict[str, Any]:
    d, m = task.grid.dimensions(task.cell)
    row = {name: math.nan for name in RESULT_COLUMNS}
    row.update(
        schema_version=shared.RESULTS_SCHEMA_VERSION,
        cell_hash=task.key,
        distribution=task.cell.distribution,
        sparsity=task.cell.sparsity,
        sample_ratio=task.cell.sample_ratio,
        noise_factor=task.cell.noise_factor,
        method=task.method,
        k=task.grid.k, d=d, m=m,
        iterations=task.grid.iterations,
        master_seed=task.grid.master_seed,
        runtime_seconds=0.0,
        failures=0,
        failure='',
    )
    return row


def result_row(task: BenchmarkTask, report: BootstrapReport, runtime: float) -> Dict[str, Any]:
    """Flatten a bootstrap report into a results row."""
    row = _base_row(task)
    for metric, (mean_column, sd_column) in METRIC_COLUMNS.items():
        mean, sd = report.aggregated[metric]
        row[mean_column] = mean
        if sd_column:
            row[sd_column] = sd
    row.update(
        variability=report.variability,
        consensus_meta_parameter=report.consensus_meta_parameter,
        runtime_seconds=runtime if task.grid.record_runtime else 0.0,
        failures=report.failures,
    )
    return row


def run_task(task: BenchmarkTask) -> Dict[str, Any]:
    """
    Compute one results row. Failures are recorded in the row, never raised.
    """
    grid, cell = task.grid, task.cell
    seed = cell_seed(grid, cell)
    try:
        with OperationTimer(logger, "Benchmark cell", cell=str(cell), method=task.method) as timer:
            truth, data = make_problem(grid.model_spec(cell, seed), cell.sample_ratio)
            report = run_bootstrap(
                data, task.method,
                sweep=grid.sweep_plan(),
                iterations=grid.iterations,
                master_seed=derive_seed(seed, 'bootstrap'),
                truth=truth,
                settings=grid.settings(),
            )
    except (BoatsError, ArithmeticError, ValueError, np.linalg.LinAlgError) as e:
        log_error(logger, e, "Benchmark cell", cell=str(cell), method=task.method)
        row = _base_row(task)
        row['failures'] = grid.iterations
        row['failure'] = f"{type(e).__name__}: {e}".replace('\n', ' ')
        return row
    return result_row(task, report, timer.elapsed)


def _sort_key(row: Dict[str, str]) -> Tuple:
    method = row['method']
    method_rank = shared.METHODS.index(method) if method in shared.METHODS else len(shared.METHODS)
    return (row['distribution'], float(row['sparsity']), float(row['sample_ratio']),
            float(row['noise_factor']), method_rank, method)


def render_rows(rows: Iterable[Dict[str, str]]) -> str:
    """CSV text of rows in canonical order, header included."""
    frame = pd.DataFrame(sorted(rows, key=_sort_key), columns=RESULT_COLUMNS, dtype=str)
    return frame.to_csv(index=False, lineterminator='\n')


def read_results(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Existing rows as text cells (so rewriting them never changes their bytes)."""
    path = Path(path)
    if not path.exists() or path.stat().st_size == 0:
        return []
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as e:
        raise DatasetFormatError(f"{path}: unreadable results file ({e})") from e
    if list(frame.columns) != RESULT_COLUMNS:
        raise DatasetFormatError(
            f"{path}: results header does not match schema version {shared.RESULTS_SCHEMA_VERSION}; "
            "write to a new file")
    return frame.to_dict('records')


def _append_row(path: Path, row: Dict[str, str]) -> None:
    frame = pd.DataFrame([row], columns=RESULT_COLUMNS, dtype=str)
    header = not path.exists() or path.stat().st_size == 0
    frame.to_csv(path, mode='a', header=header, index=False, lineterminator='\n')


def plan_tasks(grid: ExperimentGrid, done: Iterable[str] = ()) -> List[BenchmarkTask]:
    """Tasks of the grid in canonical order, minus those whose hash is in done."""
    done = set(done)
    tasks = [BenchmarkTask(grid, cell, method) for cell in grid.cells() for method in grid.methods]
    return [task for task in tasks if task.key not in done]


def run_benchmark(grid: ExperimentGrid, out: Union[str, Path], progress: bool = True) -> Dict[str, int]:
    """
    Run every missing cell × method and finalize the results CSV.

    Args:
        grid: Validated experiment grid
        out: Results CSV path (created or resumed)
        progress: Show a tqdm progress bar

    Returns:
        Counts: computed, skipped, failed, rows
    """
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    existing = read_results(out)
    expected = {task.key for task in plan_tasks(grid)}
    kept = [row for row in existing if row['cell_hash'] in expected]
    if len(kept) < len(existing):
        logger.warning(f"Dropping {len(existing) - len(kept)} rows of {out} that do not match the current config")
    tasks = plan_tasks(grid, done=(row['cell_hash'] for row in kept))
    logger.info(f"Benchmark: {len(tasks)} tasks to run, {len(kept)} rows reused, workers={grid.workers}")

    if len(kept) < len(existing):
        out.write_text(render_rows(kept), encoding='utf-8')

    rows = list(kept)
    failed = 0
    if tasks:
        with OperationTimer(logger, "Benchmark", tasks=len(tasks), workers=grid.workers):
            if grid.workers > 1:
                with multiprocessing.Pool(min(grid.workers, len(tasks))) as pool:
                    results = pool.imap_unordered(run_task, tasks)
                    failed = _collect(results, len(tasks), out, rows, progress)
            else:
                failed = _collect(map(run_task, tasks), len(tasks), out, rows, progress)

    final = render_rows(rows)
    if not out.exists() or out.read_text(encoding='utf-8') != final:
        out.write_text(final, encoding='utf-8')

    summary = {'computed': len(tasks), 'skipped': len(kept), 'failed': failed, 'rows': len(rows)}
    log_operation(logger, "Benchmark", success=failed == 0, file=str(out), **summary)
    return summary


def _collect(results: Iterable[Dict[str, Any]], total: int, out: Path,
             rows: List[Dict[str, str]], progress: bool) -> int:
    failed = 0
    for row in tqdm(results, total=total, desc="Benchmark", unit="row", disable=not progress):
        text_row = {name: format_value(row[name]) for name in RESULT_COLUMNS}
        _append_row(out, text_row)
        rows.append(text_row)
        if row['failure']:
            failed += 1
            logger.warning(f"Cell failed: {row['distribution']} {row['sparsity']} "
                           f"{row['sample_ratio']} {row['noise_factor']} {row['method']}: {row['failure']}")
    return failed


def load_results(path: Union[str, Path]) -> pd.DataFrame:
    """Results CSV as a typed DataFrame for analysis."""
    frame = pd.read_csv(path, float_precision='round_trip')
    missing = [c for c in RESULT_COLUMNS if c not in frame.columns]
    if missing:
        raise DatasetFormatError(f"{path}: missing result columns {', '.join(missing)}")
    return frame
