#!/usr/bin/env python3
"""
CLI module for the BoATS toolkit.
Subcommands: generate (synthetic dataset), fit (one method on a CSV),
benchmark (experiment grid to results CSV) and presets (write a config).
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import shared
from .shared import BoatsError, InvalidParameterError, console
from .config import (
    PRESET_NAMES, describe_grid, load_grid, load_yaml, parse_generate, preset_config, save_config,
)
from .datasets import META_SUFFIX, read_dataset, write_dataset, write_weights
from .evaluation import BootstrapSettings, SweepPlan, run_bootstrap
from .benchmark import run_benchmark
from .model_core import MethodTag
from .synthgen import make_problem
from .logger import configure_logging, get_logger, log_error, log_operation, timed

logger = get_logger(__name__)

PENALIZED = (shared.METHOD_RIDGE, shared.METHOD_LASSO, shared.METHOD_ELASTIC_NET)


@timed()
def cmd_generate(args: argparse.Namespace) -> int:
    """Generate a synthetic dataset, its ground truth and a metadata sidecar."""
    path = Path(args.config)
    raw = load_yaml(path)
    # a sidecar regenerates its own dataset
    if path.name.endswith(META_SUFFIX):
        raw = raw.get('config', {})
    generate = parse_generate(raw, seed=args.seed)
    truth, data = make_problem(generate.spec, generate.sample_ratio)

    metadata = {
        'config': generate.raw,
        'd': data.d,
        'm': data.m,
        'k': truth.k,
        'noise_sigma': truth.noise_sigma,
        'schema_version': shared.RESULTS_SCHEMA_VERSION,
    }
    written = write_dataset(data, args.out, truth=truth.weights, metadata=metadata)
    console.print(f"[green]Wrote {data.m} rows x {data.d} columns[/green] to {args.out}")
    for extra in written[1:]:
        console.print(f"  {extra}")
    return 0


def _fractions(args: argparse.Namespace):
    select, test = args.select_fraction, args.test_fraction
    train = 1.0 - select - test
    if select <= 0 or test < 0 or train <= 0:
        raise InvalidParameterError(
            f"need select fraction > 0, test fraction >= 0 and their sum < 1, got {select}, {test}")
    return (train, select, test)


@timed()
def cmd_fit(args: argparse.Namespace) -> int:
    """
    Fit one method to a CSV with the bootstrap protocol.

    With --lambda the ridge/lasso/elastic net sweep collapses to that single
    value. Writes a weights CSV (consensus weights plus per-coordinate mean
    and sd over iterations) and a YAML report next to it.
    """
    method = MethodTag(args.method)
    if args.lam is not None and method.value not in PENALIZED:
        raise InvalidParameterError(f"--lambda applies to {', '.join(PENALIZED)} only, not {method.value}")
    if args.lam is not None and not args.lam > 0:
        raise InvalidParameterError(f"--lambda must be > 0, got {args.lam}")

    data, columns = read_dataset(args.data, args.response_column)
    fractions = _fractions(args)
    n_train = int(data.m * fractions[0])
    if method in (MethodTag.OLS, MethodTag.BOATS) and data.d >= n_train:
        message = f"d={data.d} >= {n_train} training rows: OLS-based fits are underdetermined"
        logger.warning(message)
        console.print(f"[yellow]Warning:[/yellow] {message}")

    sweep = SweepPlan.single(args.lam) if args.lam is not None else None
    report = run_bootstrap(
        data, method,
        sweep=sweep,
        iterations=args.iterations,
        master_seed=args.seed if args.seed is not None else 0,
        settings=BootstrapSettings(fractions=fractions),
    )

    out = Path(args.out)
    write_weights(out, columns, {
        'beta': report.beta_opt_expected.values,
        'beta_mean': report.weight_mean,
        'beta_sd': report.weight_sd,
    })
    summary = {
        'method': method.value,
        'data': str(args.data),
        'm': data.m,
        'd': data.d,
        'iterations': args.iterations,
        'failures': report.failures,
        'meta_parameter': report.consensus_meta_parameter,
        'support_size': int(np.count_nonzero(report.beta_opt_expected.values)),
        'fractions': list(fractions),
    }
    if fractions[2] > 0:
        mean, sd = report.aggregated['test_r2']
        summary.update(test_r2_mean=mean, test_r2_sd=sd)
    report_path = save_config(summary, out.with_name(out.stem + '.report.yaml'))

    log_operation(logger, "Fit", method=method.value, meta=report.consensus_meta_parameter,
                  support=summary['support_size'])
    console.print(f"[green]{method.value}[/green]: meta-parameter {report.consensus_meta_parameter:.6g}, "
                  f"{summary['support_size']}/{data.d} nonzero")
    if 'test_r2_mean' in summary:
        console.print(f"  held-out R² {summary['test_r2_mean']:.4f}")
    console.print(f"  weights: {out}\n  report:  {report_path}")
    return 0


@timed()
def cmd_benchmark(args: argparse.Namespace) -> int:
    """Run an experiment grid into the results CSV, resuming completed rows."""
    grid = load_grid(args.config, seed=args.seed, workers=args.workers)
    if args.method:
        unknown = [m for m in args.method if m not in shared.METHODS]
        if unknown:
            raise InvalidParameterError(f"unknown method(s): {', '.join(unknown)}")
        grid = replace(grid, methods=tuple(args.method))
    for line in describe_grid(grid):
        console.print(f"[cyan]{line}[/cyan]")

    summary = run_benchmark(grid, args.out, progress=not args.quiet)
    color = 'yellow' if summary['failed'] else 'green'
    console.print(f"[{color}]{summary['computed']} computed, {summary['skipped']} reused, "
                  f"{summary['failed']} failed[/{color}] -> {args.out}")
    return 0


def cmd_presets(args: argparse.Namespace) -> int:
    """Write the config of a named preset."""
    config = preset_config(args.name, args.scale)
    if args.seed is not None:
        config['master_seed'] = args.seed
    if args.workers is not None:
        config['workers'] = args.workers
    suffix = f"-{args.scale}" if args.scale and args.name != 'desk' else ''
    out = Path(args.out) if args.out else shared.CONFIG_DIR / f"{args.name}{suffix}.yaml"
    save_config(config, out)
    console.print(f"[green]Preset {args.name}[/green] written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='boats',
        description='Sparse linear estimation with BoATS and regularized baselines',
    )
    parser.add_argument('--log-file', default=shared.LOG_FILE, help='log file (default: %(default)s)')
    parser.add_argument('--log-level', default='DEBUG', help='log level (default: %(default)s)')
    sub = parser.add_subparsers(dest='command', required=True)

    generate = sub.add_parser('generate', help='generate a synthetic dataset')
    generate.add_argument('--config', required=True, help='generation config or dataset metadata sidecar')
    generate.add_argument('--out', required=True, help='dataset CSV path')
    generate.add_argument('--seed', type=int, help='overrides the config seed')
    generate.set_defaults(func=cmd_generate)

    fit = sub.add_parser('fit', help='fit one method to a dataset CSV')
    fit.add_argument('--data', required=True, help='dataset CSV with a header row')
    fit.add_argument('--out', required=True, help='weights CSV path')
    fit.add_argument('--method', default=shared.METHOD_BOATS, choices=shared.METHODS)
    fit.add_argument('--response-column', default='y', help='response column name (default: %(default)s)')
    fit.add_argument('--lambda', dest='lam', type=float, help='fixed λ for ridge/lasso/elastic_net')
    fit.add_argument('--select-fraction', type=float, default=0.1)
    fit.add_argument('--test-fraction', type=float, default=0.0)
    fit.add_argument('--iterations', type=int, default=1, help='bootstrap iterations (default: %(default)s)')
    fit.add_argument('--seed', type=int, help='master seed of the splits')
    fit.set_defaults(func=cmd_fit)

    bench = sub.add_parser('benchmark', help='run an experiment grid')
    bench.add_argument('--config', required=True, help='experiment grid YAML')
    bench.add_argument('--out', required=True, help='results CSV (resumed when present)')
    bench.add_argument('--seed', type=int, help='overrides master_seed')
    bench.add_argument('--workers', type=int, help='overrides workers')
    bench.add_argument('--method', action='append', help='restrict to this method (repeatable)')
    bench.add_argument('--quiet', action='store_true', help='no progress bar')
    bench.set_defaults(func=cmd_benchmark)

    presets = sub.add_parser('presets', help='write a preset config')
    presets.add_argument('name', choices=PRESET_NAMES)
    presets.add_argument('--scale', choices=('full', 'desk'), help='desk shrinks to k=20, 20 iterations')
    presets.add_argument('--out', help='config path (default: config/<name>.yaml)')
    presets.add_argument('--seed', type=int, help='master seed written into the config')
    presets.add_argument('--workers', type=int, help='workers written into the config')
    presets.set_defaults(func=cmd_presets)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the subcommand and map errors to exit code 1."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_file, args.log_level)
    logger.info(f"Command: {args.command}")
    try:
        return args.func(args)
    except (BoatsError, OSError) as e:
        log_error(logger, e, f"Command {args.command}")
        console.print(f"[red]Error:[/red] {e}")
        return 1
    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted[/yellow]")
        return 130


if __name__ == '__main__':
    sys.exit(main())
