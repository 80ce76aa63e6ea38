"""Core data models for tsrepair.

Indices are 1-based everywhere they cross the public API (labels, segments,
candidates, trace entries). Arrays are 0-based numpy storage underneath.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InputError


def _as_finite_array(values: Any, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InputError(f"{what} must be one-dimensional, got shape {arr.shape}")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise InputError(f"{what} has a non-finite value at index {int(bad[0]) + 1}")
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Observation sequence x of n points.

    The values are copied into a read-only float64 array on construction.
    """
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_finite_array(self.values, "TimeSeries")
        if arr.size == 0:
            raise InputError("TimeSeries needs at least one value")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def at(self, t: int) -> float:
        """Value at 1-based index t."""
        if not 1 <= t <= self.n:
            raise InputError(f"index {t} outside [1, {self.n}]")
        return float(self.values[t - 1])

    def to_list(self) -> List[float]:
        return [float(v) for v in self.values]

    @classmethod
    def of(cls, values: Sequence[float]) -> "TimeSeries":
        return cls(np.asarray(values, dtype=np.float64))


@dataclass(frozen=True)
class LabeledSeries:
    """Partial map from 1-based index to a trusted truth value."""
    labels: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: Dict[int, float] = {}
        for idx, value in self.labels.items():
            if int(idx) != idx or idx < 1:
                raise InputError(f"label index must be a positive integer, got {idx!r}")
            value = float(value)
            if not np.isfinite(value):
                raise InputError(f"label at index {idx} is not finite")
            clean[int(idx)] = value
        object.__setattr__(self, "labels", dict(sorted(clean.items())))

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, t: object) -> bool:
        return t in self.labels

    def indices(self) -> List[int]:
        return list(self.labels.keys())

    def check_bounds(self, n: int) -> None:
        """Raise InputError if any labeled index lies outside [1, n]."""
        for idx in self.labels:
            if idx > n:
                raise InputError(f"label index {idx} outside [1, {n}]")

    def mask(self, n: int) -> np.ndarray:
        self.check_bounds(n)
        out = np.zeros(n, dtype=bool)
        if self.labels:
            out[np.fromiter(self.labels.keys(), dtype=np.int64) - 1] = True
        return out

    @classmethod
    def from_optional(cls, values: Sequence[Optional[float]]) -> "LabeledSeries":
        """Build from a per-index column where None or NaN means unlabeled."""
        labels = {}
        for i, v in enumerate(values, start=1):
            if v is None or (isinstance(v, float) and np.isnan(v)):
                continue
            labels[i] = float(v)
        return cls(labels)

    def to_optional(self, n: int) -> List[Optional[float]]:
        self.check_bounds(n)
        return [self.labels.get(t) for t in range(1, n + 1)]


class RepairState:
    """Evolving repair y(k) plus the labeled mask.

    Labeled entries are fixed at construction; `assign` refuses to touch them.
    """

    def __init__(self, current: np.ndarray, labeled_mask: np.ndarray):
        current = _as_finite_array(current, "RepairState")
        labeled_mask = np.asarray(labeled_mask, dtype=bool)
        if labeled_mask.shape != current.shape:
            raise InputError(
                f"labeled mask length {labeled_mask.size} != sequence length {current.size}"
            )
        self._current = current
        self._mask = labeled_mask.copy()
        self._mask.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self._current.size)

    @property
    def current(self) -> np.ndarray:
        """Read-only view of y(k)."""
        view = self._current.view()
        view.setflags(write=False)
        return view

    @property
    def labeled_mask(self) -> np.ndarray:
        return self._mask

    def is_labeled(self, t: int) -> bool:
        return bool(self._mask[t - 1])

    def value(self, t: int) -> float:
        return float(self._current[t - 1])

    def assign(self, t: int, value: float) -> float:
        """Set y_t (1-based) and return the previous value."""
        if not 1 <= t <= self.n:
            raise InputError(f"index {t} outside [1, {self.n}]")
        if self._mask[t - 1]:
            raise InputError(f"index {t} is labeled and cannot be repaired")
        if not np.isfinite(value):
            raise InputError(f"repair value for index {t} is not finite")
        old = float(self._current[t - 1])
        self._current[t - 1] = value
        return old

    def snapshot(self) -> np.ndarray:
        return self._current.copy()

    def copy(self) -> "RepairState":
        return RepairState(self._current.copy(), self._mask)


@dataclass(frozen=True, eq=False)
class DiffSeries:
    """Displacements z_i = y_i - x_i."""
    diffs: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_finite_array(self.diffs, "DiffSeries")
        arr.setflags(write=False)
        object.__setattr__(self, "diffs", arr)

    def __len__(self) -> int:
        return int(self.diffs.size)

    @property
    def n(self) -> int:
        return int(self.diffs.size)

    def at(self, t: int) -> float:
        """z_t for 1-based t; indices outside [1, n] read as 0."""
        if 1 <= t <= self.diffs.size:
            return float(self.diffs[t - 1])
        return 0.0


@dataclass(frozen=True)
class SegmentIndex:
    """Maximal runs of labeled indices as 1-based (start, end) pairs."""
    segments: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        prev_end = -1
        for s, e in self.segments:
            if not 1 <= s <= e:
                raise InputError(f"invalid segment ({s}, {e})")
            if s <= prev_end + 1:
                raise InputError(f"segment ({s}, {e}) overlaps or touches its predecessor")
            prev_end = e

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[Tuple[int, int]]:
        return iter(self.segments)

    @property
    def m(self) -> int:
        return len(self.segments)

    def start(self, j: int) -> int:
        """s(j) for 1-based segment number j."""
        return self.segments[j - 1][0]

    def end(self, j: int) -> int:
        """e(j) for 1-based segment number j; e(0) is 0."""
        if j == 0:
            return 0
        return self.segments[j - 1][1]


class RepairStep(NamedTuple):
    """One applied change: 1-based index, value before, value after."""
    index: int
    old: float
    new: float


@dataclass(frozen=True)
class CandidateSet:
    """Candidate repairs keyed by 1-based index, ascending."""
    candidates: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", dict(sorted(self.candidates.items())))

    def __len__(self) -> int:
        return len(self.candidates)

    def __contains__(self, t: object) -> bool:
        return t in self.candidates

    def __getitem__(self, t: int) -> float:
        return self.candidates[t]

    def items(self) -> List[Tuple[int, float]]:
        return list(self.candidates.items())


@dataclass
class RepairResult:
    """Output of an iterative repair job."""
    final: np.ndarray
    iterations: int
    converged: bool
    phi_trace: List[np.ndarray] = field(default_factory=list)
    changed_trace: List[RepairStep] = field(default_factory=list)
    estimate_seconds: List[float] = field(default_factory=list)
    backend: str = "incremental"

    def to_dict(self, include_trace: bool = False) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "iterations": self.iterations,
            "converged": self.converged,
            "backend": self.backend,
            "estimate_seconds": float(sum(self.estimate_seconds)),
        }
        if include_trace:
            out["phi_trace"] = [[float(v) for v in phi] for phi in self.phi_trace]
            out["changed_trace"] = [list(step) for step in self.changed_trace]
        return out


def init_repair_state(x: TimeSeries, labels: LabeledSeries) -> RepairState:
    """Build y(0): labels where known, observations elsewhere."""
    mask = labels.mask(x.n)
    current = np.array(x.values, dtype=np.float64)
    for idx, value in labels.labels.items():
        current[idx - 1] = value
    return RepairState(current, mask)


def labeled_segments(labels: LabeledSeries, n: int) -> SegmentIndex:
    """Group labeled indices into maximal runs of consecutive positions.

    Raises:
        InputError: If a label lies past n.
    """
    labels.check_bounds(n)
    runs: List[Tuple[int, int]] = []
    for idx in labels.indices():
        if runs and runs[-1][1] == idx - 1:
            runs[-1] = (runs[-1][0], idx)
        else:
            runs.append((idx, idx))
    return SegmentIndex(tuple(runs))


def diff(state: RepairState, x: TimeSeries) -> DiffSeries:
    """z = y(k) - x."""
    if state.n != x.n:
        raise InputError(f"length mismatch: state has {state.n} points, x has {x.n}")
    return DiffSeries(state.current - x.values)
