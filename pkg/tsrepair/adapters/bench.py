"""Benchmark harness: methods x error lengths x repetitions over synthetic data."""

import concurrent.futures
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd
import yaml

from ..core.config import BenchConfig, ErrorSpec, LabelingPolicy, RepairConfig, SmootherConfig
from ..core.evaluation import (
    generate_truth,
    inject_many,
    place_windows,
    repair_summary,
    sample_labels,
)
from ..core.exceptions import InputError
from ..core.methods import run_method
from ..core.schemas import validate_scenario
from .output_writer import atomic_write

logger = logging.getLogger(__name__)

COLUMNS = [
    "method", "error_length", "rep", "order", "tau", "label_rate", "max_iterations",
    "rms", "changed", "changed_clean", "iterations", "converged",
]


@dataclass(frozen=True)
class BenchCell:
    """One (error length, repetition) pair; every method sees the same data."""
    index: int
    error_length: int
    rep: int
    seed: int
    config: BenchConfig
    smoother: SmootherConfig


def load_scenario(path: Path | str) -> tuple[BenchConfig, int | None]:
    """Read and validate a scenario YAML; returns the config and its seed (if any)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"scenario file not found: {path}")
    with open(path, "r") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise InputError(f"{path}: not valid YAML: {e}") from e
    if not isinstance(data, dict):
        raise InputError(f"{path}: scenario must be a mapping")
    scenario = validate_scenario(data)
    fields = scenario.model_dump()
    seed = fields.pop("seed")
    return BenchConfig(**fields), seed


def _cell_seeds(seed: int, error_length: int, rep: int) -> List[int]:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(error_length, rep))
    return [int(s) for s in ss.generate_state(4)]


def run_cell(cell: BenchCell) -> List[Dict[str, Any]]:
    """Generate one dirty series and run every method and sweep point on it."""
    cfg = cell.config
    truth_seed, window_seed, error_seed, label_seed = _cell_seeds(
        cell.seed, cell.error_length, cell.rep
    )
    truth = generate_truth(cfg.n, cfg.generator, truth_seed)
    starts = place_windows(cfg.n, cell.error_length, cfg.windows, window_seed)
    specs = [
        ErrorSpec(
            kind=cfg.kind, start=start, length=cell.error_length,
            amount=cfg.amount, variance=cfg.variance, seed=error_seed + k,
        )
        for k, start in enumerate(starts)
    ]
    dirty, mask = inject_many(truth, specs)

    rows: List[Dict[str, Any]] = []
    for order, tau, rate, cap in cfg.grid():
        policy = LabelingPolicy(rate=rate, seed=label_seed, mode=cfg.label_mode)
        labels = sample_labels(truth, mask, policy)
        repair = RepairConfig(order=order, tau=tau, max_iterations=cap, backend=cfg.backend)
        for method in cfg.methods:
            start = time.perf_counter()
            outcome = run_method(method, dirty, labels, repair=repair, smoother=cell.smoother)
            elapsed = time.perf_counter() - start
            summary = repair_summary(truth, dirty, outcome.values, mask)
            row: Dict[str, Any] = {
                "method": method,
                "error_length": cell.error_length,
                "rep": cell.rep,
                "order": order,
                "tau": tau,
                "label_rate": rate,
                "max_iterations": cap,
                "rms": summary.rms,
                "changed": summary.changed,
                "changed_clean": summary.changed_clean,
                "iterations": outcome.iterations,
                "converged": outcome.converged,
            }
            if cfg.timing:
                row["seconds"] = elapsed
            rows.append(row)
    return rows


def run_bench(
    config: BenchConfig, seed: int, smoother: SmootherConfig | None = None
) -> pd.DataFrame:
    """Run every cell, in parallel when ``config.workers > 1``; row order is fixed."""
    smoother = smoother or SmootherConfig()
    cells = [
        BenchCell(i, length, rep, seed, config, smoother)
        for i, (length, rep) in enumerate(
            (length, rep) for length in config.error_lengths for rep in range(config.repetitions)
        )
    ]
    logger.info(f"Running {len(cells)} bench cells with {config.workers} workers")
    start_time = time.time()

    if config.workers == 1:
        results = []
        for cell in cells:
            logger.info(
                f"Cell {cell.index + 1}/{len(cells)}: length={cell.error_length} rep={cell.rep}"
            )
            results.append(run_cell(cell))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as executor:
            # map keeps submission order
            results = list(executor.map(run_cell, cells))

    elapsed = time.time() - start_time
    logger.info(f"Bench complete in {elapsed:.2f}s")
    columns = COLUMNS + (["seconds"] if config.timing else [])
    return pd.DataFrame([row for rows in results for row in rows], columns=columns)


def summarize(table: pd.DataFrame) -> List[Dict[str, Any]]:
    """Median RMS per method and error length, in first-seen order."""
    grouped = table.groupby(["method", "error_length"], sort=False)["rms"].median()
    return [
        {"method": method, "error_length": int(length), "median_rms": float(value)}
        for (method, length), value in grouped.items()
    ]


def write_table(path: Path | str, table: pd.DataFrame) -> Path:
    path = Path(path)
    with atomic_write(path) as f:
        table.to_csv(f, index=False, lineterminator="\n")
    return path
