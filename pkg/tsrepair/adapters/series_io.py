"""CSV ingestion and emission for series files.

Schema: header row ``index,value[,label][,truth]``; indices run 1..n; an
empty label cell means unlabeled. Floats are written with ``repr`` so a
parse/emit/parse cycle is value-identical.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from ..core.exceptions import InputError
from ..core.models import LabeledSeries, TimeSeries
from .output_writer import atomic_write

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("index", "value")
OPTIONAL_COLUMNS = ("label", "truth")


@dataclass
class SeriesFrame:
    """Parsed series file."""
    values: TimeSeries
    labels: LabeledSeries
    truth: Optional[TimeSeries] = None
    has_label_column: bool = False

    @property
    def n(self) -> int:
        return self.values.n


def _column(df: pd.DataFrame, name: str, path: Path) -> np.ndarray:
    try:
        return pd.to_numeric(df[name], errors="raise").to_numpy(dtype=np.float64)
    except (ValueError, TypeError) as e:
        raise InputError(f"{path}: column '{name}' is not numeric: {e}") from e


def read_series_csv(path: Path | str) -> SeriesFrame:
    """Parse a series CSV.

    Raises:
        InputError: missing file, bad header, non-numeric or non-finite
            cells, or indices that are not exactly 1..n
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"input file not found: {path}")
    try:
        df = pd.read_csv(
            path, float_precision="round_trip", skipinitialspace=True, encoding="utf-8"
        )
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise InputError(f"{path}: cannot parse CSV: {e}") from e

    columns = [str(c).strip() for c in df.columns]
    df.columns = columns
    missing = [c for c in REQUIRED_COLUMNS if c not in columns]
    if missing:
        raise InputError(f"{path}: missing column(s) {missing}; header must start with index,value")
    unknown = [c for c in columns if c not in REQUIRED_COLUMNS + OPTIONAL_COLUMNS]
    if unknown:
        raise InputError(f"{path}: unknown column(s) {unknown}")
    if df.empty:
        raise InputError(f"{path}: no data rows")

    index = _column(df, "index", path)
    expected = np.arange(1, len(df) + 1, dtype=np.float64)
    if not np.array_equal(index, expected):
        raise InputError(f"{path}: index column must run 1..{len(df)} in order")

    values = TimeSeries(_column(df, "value", path))
    labels = LabeledSeries()
    if "label" in columns:
        labels = LabeledSeries.from_optional(list(_column(df, "label", path)))
    truth = None
    if "truth" in columns:
        truth = TimeSeries(_column(df, "truth", path))

    logger.debug("read %d rows (%d labeled) from %s", values.n, len(labels), path)
    return SeriesFrame(
        values=values, labels=labels, truth=truth, has_label_column="label" in columns
    )


def _cell(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def write_series_csv(
    path: Path | str,
    values: Sequence[float],
    labels: Optional[LabeledSeries] = None,
    truth: Optional[Sequence[float]] = None,
) -> Path:
    """Write a series CSV atomically; returns the path."""
    path = Path(path)
    vals = np.asarray(values, dtype=np.float64)
    n = vals.size
    if truth is not None and len(truth) != n:
        raise InputError(f"truth has {len(truth)} points, values have {n}")
    label_cells: Optional[List[Optional[float]]] = (
        labels.to_optional(n) if labels is not None else None
    )

    header = list(REQUIRED_COLUMNS)
    if label_cells is not None:
        header.append("label")
    if truth is not None:
        header.append("truth")

    with atomic_write(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for i in range(n):
            row = [str(i + 1), _cell(vals[i])]
            if label_cells is not None:
                row.append(_cell(label_cells[i]))
            if truth is not None:
                row.append(_cell(truth[i]))
            writer.writerow(row)
    logger.debug("wrote %d rows to %s", n, path)
    return path


def write_frame(
    path: Path | str, frame: SeriesFrame, values: Optional[Sequence[float]] = None
) -> Path:
    """Write ``frame`` back out, optionally replacing its value column."""
    return write_series_csv(
        path,
        frame.values.values if values is None else values,
        labels=frame.labels if frame.has_label_column else None,
        truth=frame.truth.values if frame.truth is not None else None,
    )
