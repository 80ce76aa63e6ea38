"""Command-line interface for tsrepair."""

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .adapters.bench import load_scenario, run_bench, summarize, write_table
from .adapters.output_writer import ReportWriter, generate_metadata
from .adapters.series_io import read_series_csv, write_frame, write_series_csv
from .core.config import (
    ConfigLoader,
    ErrorSpec,
    LabelingPolicy,
    ToolkitConfig,
    resolve_seed,
)
from .core.estimation import ModelParams
from .core.evaluation import (
    generate_truth,
    inject_many,
    place_windows,
    repair_summary,
    rms,
    sample_labels,
)
from .core.exceptions import InputError, NumericError
from .core.methods import run_method
from .core.models import TimeSeries
from .core.online import OnlineRepairer
from .core.schemas import METHODS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_INTERRUPTED = 130

EPILOG = """
Examples:
  # Repair a labeled series with IMR(1)
  tsrepair repair data.csv -o repaired.csv --method imr --order 1 --tau 0.1

  # Inject a shift window and sample 20% labels
  tsrepair inject clean.csv -o dirty.csv --kind shift --start 100 --len 50 --rate 0.2 --seed 7

  # RMS between truth and a repair
  tsrepair evaluate dirty.csv repaired.csv

  # Run a benchmark scenario with 4 workers
  tsrepair bench tsrepair/config/bench_smoke.yaml -o results.csv --workers 4
"""


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="YAML configuration file (defaults if omitted)")
    parser.add_argument("--seed", type=int, help="Random seed (overrides TSREPAIR_SEED and config)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging")
    parser.add_argument("--quiet", "-q", action="store_true", help="Only log errors")


def create_argument_parser() -> argparse.ArgumentParser:
    """Build the tsrepair argument parser."""
    parser = argparse.ArgumentParser(
        prog="tsrepair",
        description="tsrepair - iterative minimum repairing of time series",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    parser.add_argument("--version", action="version", version=f"tsrepair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    repair = sub.add_parser("repair", help="Repair a series CSV")
    _add_common(repair)
    repair.add_argument("input", type=Path, help="Series CSV (index,value[,label][,truth])")
    repair.add_argument("--output", "-o", type=Path, required=True, help="Repaired CSV path")
    repair.add_argument(
        "--method", choices=METHODS, default="imr", help="Repair method (default: imr)"
    )
    repair.add_argument("--order", type=int, help="Model order p")
    repair.add_argument("--tau", type=float, help="Convergence / repair threshold")
    repair.add_argument("--max-iter", dest="max_iterations", type=int, help="Iteration cap")
    repair.add_argument(
        "--backend", choices=["full", "pruned", "incremental"], help="Estimation backend"
    )
    repair.add_argument(
        "--phi", type=float, nargs="+", help="Fixed parameters (imr-static, ar, arx)"
    )
    repair.add_argument("--alpha", type=float, help="EWMA smoothing factor")
    repair.add_argument("--window", type=int, help="SMA window")
    repair.add_argument("--tol", type=float, help="Fixpoint tolerance (online)")
    repair.add_argument(
        "--trace", action="store_true", help="Include the per-iteration parameter trace"
    )

    inject = sub.add_parser("inject", help="Inject synthetic errors and sample labels")
    _add_common(inject)
    inject.add_argument("input", type=Path, help="Clean series CSV; its value column becomes truth")
    inject.add_argument("--output", "-o", type=Path, required=True, help="Dirty CSV path")
    inject.add_argument("--kind", choices=["shift", "innovational", "spike"], default="shift")
    inject.add_argument("--amount", type=float, default=3.0, help="Mean offset (default: 3)")
    inject.add_argument(
        "--variance", type=float, default=0.1, help="Offset variance (default: 0.1)"
    )
    inject.add_argument(
        "--decay", type=float, default=0.8, help="Innovational decay (default: 0.8)"
    )
    inject.add_argument(
        "--start", type=int, action="append",
        help="1-based window start; repeat for several windows (random placement if omitted)",
    )
    inject.add_argument(
        "--len", dest="length", type=int, default=1, help="Window length (default: 1)"
    )
    inject.add_argument(
        "--windows", type=int, default=1, help="Random windows when --start is omitted"
    )
    inject.add_argument("--rate", type=float, default=0.2, help="Labeling rate (default: 0.2)")
    inject.add_argument("--label-mode", choices=["uniform", "prefix"], default="uniform")

    evaluate = sub.add_parser("evaluate", help="RMS error between truth and a repair")
    _add_common(evaluate)
    evaluate.add_argument("truth", type=Path, help="CSV with the truth (truth column, else value)")
    evaluate.add_argument("repair", type=Path, help="CSV with the repaired value column")

    bench = sub.add_parser("bench", help="Run a benchmark scenario")
    _add_common(bench)
    bench.add_argument("scenario", type=Path, help="Scenario YAML")
    bench.add_argument("--output", "-o", type=Path, required=True, help="Results CSV path")
    bench.add_argument("--workers", type=int, help="Parallel workers (overrides scenario)")
    bench.add_argument("--timing", action="store_true", help="Add a wall-time seconds column")

    stream = sub.add_parser("stream", help="Online repair from a labeled prefix")
    _add_common(stream)
    stream.add_argument("input", type=Path, help="Series CSV whose labels form a prefix")
    stream.add_argument("--output", "-o", type=Path, required=True, help="Repaired CSV path")

    generate = sub.add_parser("generate", help="Write a synthetic clean series")
    _add_common(generate)
    generate.add_argument("--output", "-o", type=Path, required=True, help="Series CSV path")
    generate.add_argument("--n", type=int, default=3000, help="Series length (default: 3000)")
    generate.add_argument("--kind", choices=["sensor", "cyclic"], default="sensor")

    return parser


def _override(obj: Any, **changes: Any) -> Any:
    """dataclasses.replace with the None-valued flags dropped."""
    changes = {k: v for k, v in changes.items() if v is not None}
    return dataclasses.replace(obj, **changes) if changes else obj


def _load_config(args: argparse.Namespace) -> ToolkitConfig:
    if args.config:
        logger.info(f"Loading configuration from {args.config}")
        config = ConfigLoader.load(args.config)
    else:
        logger.debug("Using default configuration")
        config = ConfigLoader.get_default()
    config.seed = resolve_seed(args.seed, config.seed)

    errors = ConfigLoader.validate(config)
    if errors:
        raise InputError("configuration validation failed: " + "; ".join(errors))
    return config


def _report(
    method: str,
    config: ToolkitConfig,
    echo: Dict[str, Any],
    started: float,
    **fields: Any,
) -> Dict[str, Any]:
    record: Dict[str, Any] = {
        "method": method,
        "config": echo,
        "wall_ms": (time.perf_counter() - started) * 1000.0,
        "metadata": generate_metadata(__version__, config.seed, config.compute_hash()),
    }
    record.update({k: v for k, v in fields.items() if v is not None})
    return record


def cmd_repair(args: argparse.Namespace, config: ToolkitConfig, writer: ReportWriter) -> int:
    """Repair one CSV with the chosen method and report a single JSON line.

    Flags override the config file. With a truth column the report adds rms,
    and also ``changed`` and ``changed_clean`` counted against the points where
    value and truth differ.

    Raises:
        InputError: On bad input, a missing ``--phi`` for imr-static or an
            order that disagrees with ``--phi``.
        NumericError: Propagated from the repair method.
    """
    frame = read_series_csv(args.input)
    phi = ModelParams.of(*args.phi) if args.phi else None
    order = args.order if args.order is not None else (phi.p if phi is not None else None)

    repair_cfg = _override(
        config.repair, order=order, tau=args.tau,
        max_iterations=args.max_iterations, backend=args.backend,
    )
    smoother_cfg = _override(config.smoother, alpha=args.alpha, window=args.window)
    online_cfg = _override(config.online, tol=args.tol)
    if phi is not None and phi.p != repair_cfg.order:
        raise InputError(f"--phi has {phi.p} values but the order is {repair_cfg.order}")

    logger.info(
        f"Repairing {args.input} ({frame.n} points, {len(frame.labels)} labels) with {args.method}"
    )
    started = time.perf_counter()
    outcome = run_method(
        args.method, frame.values, frame.labels,
        repair=repair_cfg, smoother=smoother_cfg, online_cfg=online_cfg, phi=phi,
    )
    write_frame(args.output, frame, values=outcome.values)

    if args.method in ("ewma", "sma"):
        echo: Dict[str, Any] = dataclasses.asdict(smoother_cfg)
    elif args.method == "online":
        echo = dataclasses.asdict(online_cfg)
    elif args.method == "interpolate":
        echo = {}
    else:
        echo = dataclasses.asdict(repair_cfg)

    summary = None
    if frame.truth is not None:
        dirty_points = np.flatnonzero(frame.values.values != frame.truth.values) + 1
        summary = repair_summary(frame.truth, frame.values, outcome.values, dirty_points.tolist())

    record = _report(
        args.method, config, echo, started,
        iterations=outcome.iterations,
        converged=outcome.converged,
        rms=summary.rms if summary is not None else None,
        changed=summary.changed if summary is not None else None,
        changed_clean=summary.changed_clean if summary is not None else None,
        phi_trace=outcome.phi_trace if args.trace else None,
        output=str(args.output),
        **outcome.extra,
    )
    writer.emit(record)
    return EXIT_OK


def cmd_inject(args: argparse.Namespace, config: ToolkitConfig, writer: ReportWriter) -> int:
    """Inject error windows into a clean series and sample labels from it.

    The clean values become the truth column. Window placement, labels and
    each window's noise draw from seeds split off the run seed.
    """
    frame = read_series_csv(args.input)
    truth = frame.values
    starts: List[int] = args.start or []
    state = np.random.SeedSequence(config.seed).generate_state(2 + max(len(starts), args.windows))
    seeds = [int(s) for s in state]
    window_seed, label_seed, error_seeds = seeds[0], seeds[1], seeds[2:]
    if not starts:
        starts = place_windows(truth.n, args.length, args.windows, window_seed)

    started = time.perf_counter()
    specs = [
        ErrorSpec(
            kind=args.kind, start=start, length=args.length, amount=args.amount,
            variance=args.variance, decay=args.decay, seed=error_seeds[k],
        )
        for k, start in enumerate(starts)
    ]
    dirty, mask = inject_many(truth, specs)
    policy = LabelingPolicy(rate=args.rate, seed=label_seed, mode=args.label_mode)
    labels = sample_labels(truth, mask, policy)
    write_series_csv(args.output, dirty.values, labels=labels, truth=truth.values)
    logger.info(f"Injected {len(mask)} dirty points and {len(labels)} labels into {args.output}")

    echo = {
        "kind": args.kind, "amount": args.amount, "variance": args.variance, "decay": args.decay,
        "starts": starts, "length": args.length, "rate": args.rate, "label_mode": args.label_mode,
    }
    writer.emit(_report(
        "inject", config, echo, started,
        dirty_points=len(mask), labels=len(labels), output=str(args.output),
    ))
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, config: ToolkitConfig, writer: ReportWriter) -> int:
    """RMS between a repair and the truth column (or values) of another file."""
    truth_frame = read_series_csv(args.truth)
    repair_frame = read_series_csv(args.repair)
    truth = truth_frame.truth if truth_frame.truth is not None else truth_frame.values
    started = time.perf_counter()
    error = rms(truth, repair_frame.values)
    writer.emit(_report(
        "evaluate", config, {"truth": str(args.truth), "repair": str(args.repair)}, started,
        rms=error,
    ))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace, config: ToolkitConfig, writer: ReportWriter) -> int:
    """Run a scenario file and write the result table atomically.

    The seed comes from ``--seed``, then the environment, then the scenario,
    then the config.
    """
    bench_cfg, scenario_seed = load_scenario(args.scenario)
    seed = resolve_seed(args.seed, scenario_seed if scenario_seed is not None else config.seed)
    bench_cfg = _override(bench_cfg, workers=args.workers, timing=True if args.timing else None)

    started = time.perf_counter()
    table = run_bench(bench_cfg, seed, smoother=config.smoother)
    write_table(args.output, table)
    logger.info(f"Wrote {len(table)} rows to {args.output}")

    record = _report(
        "bench", config, bench_cfg.to_dict(), started,
        rows=len(table), seed=seed, summary=summarize(table), output=str(args.output),
    )
    writer.emit(record)
    return EXIT_OK


def cmd_stream(args: argparse.Namespace, config: ToolkitConfig, writer: ReportWriter) -> int:
    """Feed a file through the streaming repairer, one point at a time."""
    frame = read_series_csv(args.input)
    repairer = OnlineRepairer()
    started = time.perf_counter()
    values = np.empty(frame.n)
    for t in range(1, frame.n + 1):
        x_t = frame.values.at(t)
        if t in frame.labels:
            values[t - 1] = repairer.extend_labeled(x_t, frame.labels.labels[t])
        else:
            values[t - 1] = repairer.extend(x_t)
    write_frame(args.output, frame, values=values)

    writer.emit(_report(
        "online", config, {"mode": "stream"}, started,
        phi1=repairer.phi1,
        ell=repairer.ell,
        bound_condition=repairer.bound_condition,
        rms=rms(frame.truth, values) if frame.truth is not None else None,
        output=str(args.output),
    ))
    return EXIT_OK


def cmd_generate(args: argparse.Namespace, config: ToolkitConfig, writer: ReportWriter) -> int:
    started = time.perf_counter()
    truth: TimeSeries = generate_truth(args.n, args.kind, config.seed)
    write_series_csv(args.output, truth.values)
    writer.emit(_report(
        "generate", config, {"n": args.n, "kind": args.kind}, started, output=str(args.output),
    ))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, ToolkitConfig, ReportWriter], int]] = {
    "repair": cmd_repair,
    "inject": cmd_inject,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
    "stream": cmd_stream,
    "generate": cmd_generate,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the tsrepair CLI.

    Args:
        argv: Command-line arguments (uses sys.argv if None)

    Returns:
        Exit code: 0 success, 2 bad input, 3 numeric failure, 130 interrupted
    """
    parser = create_argument_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_INPUT

    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.ERROR)

    try:
        config = _load_config(args)
        with ReportWriter() as writer:
            return COMMANDS[args.command](args, config, writer)
    except (InputError, FileNotFoundError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INPUT
    except NumericError as e:
        logger.error(f"Numeric failure: {e}")
        return EXIT_NUMERIC
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
