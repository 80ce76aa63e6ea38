"""Run reports (JSON lines), run metadata and atomic file writes."""

import json
import os
import sys
import tempfile
from contextlib import contextmanager
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import IO, Any, Dict, Iterator, List, Optional

import numpy as np

from ..core.schemas import validate_report


class TsRepairJSONEncoder(json.JSONEncoder):
    """JSON encoder for tsrepair data types.

    Handles numpy scalars and arrays, enums, paths and objects exposing
    ``to_dict()``.
    """

    def default(self, obj: Any) -> Any:
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, Path):
            return str(obj)
        if isinstance(obj, datetime):
            return obj.isoformat()
        if hasattr(obj, "to_dict") and callable(obj.to_dict):
            return obj.to_dict()
        return super().default(obj)


def dumps_record(record: Dict[str, Any]) -> str:
    """One report record as a single sorted-key JSON line (no newline)."""
    return json.dumps(record, cls=TsRepairJSONEncoder, sort_keys=True, separators=(", ", ": "))


@contextmanager
def atomic_write(path: Path | str) -> Iterator[IO[str]]:
    """Write to a temp file beside ``path`` and rename it into place on success.

    On any exception the temp file is removed and ``path`` is left untouched.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            yield f
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except FileNotFoundError:
            pass
        raise


class ReportWriter:
    """Writes validated run reports as JSON lines.

    Reports go to stdout by default so that several runs concatenate into
    one stream.
    """

    def __init__(self, stream: Optional[IO[str]] = None):
        self.stream = stream if stream is not None else sys.stdout
        self.records: List[Dict[str, Any]] = []

    def emit(self, record: Dict[str, Any]) -> str:
        line = dumps_record(record)
        validate_report(json.loads(line))
        self.stream.write(line + "\n")
        self.stream.flush()
        self.records.append(record)
        return line

    def __enter__(self) -> "ReportWriter":
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> bool:
        self.stream.flush()
        return False


def generate_metadata(
    version: str, seed: Optional[int], config_hash: str, additional: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """Metadata block attached to run reports (not to data files)."""
    from ..core.evaluation import RNG_NAME

    metadata = {
        "version": version,
        "seed": seed,
        "config_hash": config_hash,
        "rng": RNG_NAME,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "generator": "tsrepair",
    }
    if additional:
        metadata.update(additional)
    return metadata
