"""Adapters between the core library and files.

Available adapters:
- series_io: read and write series CSV files
- output_writer: JSON-lines run reports, metadata and atomic writes
- bench: benchmark scenarios and their results tables
"""

from .series_io import SeriesFrame, read_series_csv, write_frame, write_series_csv
from .output_writer import ReportWriter, atomic_write, generate_metadata
from .bench import load_scenario, run_bench, summarize, write_table

__all__ = [
    "SeriesFrame",
    "read_series_csv",
    "write_frame",
    "write_series_csv",
    "ReportWriter",
    "atomic_write",
    "generate_metadata",
    "load_scenario",
    "run_bench",
    "summarize",
    "write_table",
]
