"""Evaluation kit: RMS error, synthetic truth, error injection, label sampling."""

import logging
import math
from typing import FrozenSet, Iterable, List, NamedTuple, Optional, Sequence, Set, Union

import numpy as np

from .config import ErrorKind, ErrorSpec, LabelingPolicy, LabelMode
from .exceptions import InputError
from .models import LabeledSeries, TimeSeries

logger = logging.getLogger(__name__)

# recorded in run metadata so results can be reproduced
RNG_NAME = "numpy.random.default_rng/PCG64"

ArrayLike = Union[TimeSeries, Sequence[float], np.ndarray]


def _values(seq: ArrayLike) -> np.ndarray:
    if isinstance(seq, TimeSeries):
        return seq.values
    return np.asarray(seq, dtype=np.float64)


def rms(truth: ArrayLike, repair: ArrayLike) -> float:
    a, b = _values(truth), _values(repair)
    if a.shape != b.shape:
        raise InputError(f"length mismatch: truth has {a.size} points, repair has {b.size}")
    if a.size == 0:
        raise InputError("cannot compute RMS of an empty sequence")
    return float(np.sqrt(np.mean((a - b) ** 2)))


class InjectionResult(NamedTuple):
    """Dirty series and the 1-based indices that were perturbed."""
    dirty: TimeSeries
    mask: FrozenSet[int]


def _offsets(spec: ErrorSpec, rng: np.random.Generator) -> np.ndarray:
    scale = math.sqrt(spec.variance)
    if spec.kind is ErrorKind.INNOVATIONAL:
        decay = spec.decay ** np.arange(spec.length, dtype=np.float64)
        return spec.amount * decay + rng.normal(0.0, scale, spec.length)
    return rng.normal(spec.amount, scale, spec.length)


def inject_errors(truth: TimeSeries, spec: ErrorSpec) -> InjectionResult:
    """Perturb truth over [spec.start, spec.end]; everything else stays bit-identical.

    Shift windows add ``N(amount, variance)`` per point; innovational windows
    add ``amount * decay**k`` plus zero-mean noise; a spike is a one-point shift.

    Raises:
        InputError: If the window runs past the end of the series.
    """
    if spec.end > truth.n:
        raise InputError(f"error window [{spec.start}, {spec.end}] exceeds series length {truth.n}")
    rng = np.random.default_rng(spec.seed)
    dirty = np.array(truth.values)
    dirty[spec.start - 1 : spec.end] += _offsets(spec, rng)
    return InjectionResult(TimeSeries(dirty), frozenset(range(spec.start, spec.end + 1)))


def inject_many(truth: TimeSeries, specs: Iterable[ErrorSpec]) -> InjectionResult:
    """Apply several windows in order; overlapping offsets add up."""
    current = truth
    mask: Set[int] = set()
    for spec in specs:
        current, window = inject_errors(current, spec)
        mask |= window
    return InjectionResult(current, frozenset(mask))


def place_windows(n: int, length: int, count: int, seed: int) -> List[int]:
    """Random 1-based starts of `count` non-overlapping windows of `length` points."""
    free = n - count * length
    if length < 1 or count < 1 or free < 0:
        raise InputError(f"cannot place {count} windows of length {length} in {n} points")
    rng = np.random.default_rng(seed)
    slack = np.sort(rng.integers(0, free + 1, size=count))
    return [int(s) + i * length + 1 for i, s in enumerate(slack)]


def sample_labels(
    truth: TimeSeries, error_mask: Optional[Iterable[int]], policy: LabelingPolicy
) -> LabeledSeries:
    """Pick truth points to expose as labels.

    Args:
        truth: Clean series the label values are copied from.
        error_mask: Injected positions, used only for the debug count.
        policy: Rate, seed and mode. Uniform mode labels each point
            independently with probability ``rate``; prefix mode labels
            the first ``ceil(rate * n)`` points.

    Returns:
        Labels keyed by 1-based index.
    """
    n = truth.n
    if policy.mode is LabelMode.PREFIX:
        # rate * n can land just above an integer in binary (0.07 * 100)
        chosen = np.arange(min(n, math.ceil(round(policy.rate * n, 9))))
    else:
        rng = np.random.default_rng(policy.seed)
        chosen = np.flatnonzero(rng.random(n) < policy.rate)
    labels = LabeledSeries({int(i) + 1: float(truth.values[i]) for i in chosen})
    if error_mask is not None:
        covered = sum(1 for t in error_mask if t in labels)
        logger.debug("sampled %d labels, %d inside error windows", len(labels), covered)
    return labels


def generate_truth(n: int, kind: str = "sensor", seed: int = 1337) -> TimeSeries:
    """Synthetic clean series.

    ``sensor`` is a slowly wandering level around 20 with light measurement
    noise; ``cyclic`` is a yearly (period 365) sinusoid around 15 with noise.
    """
    if n < 1:
        raise InputError(f"series length must be positive, got {n}")
    rng = np.random.default_rng(seed)
    if kind == "sensor":
        drift = np.empty(n)
        level = 0.0
        steps = rng.normal(0.0, 0.05, n)
        for t in range(n):
            level = 0.98 * level + steps[t]
            drift[t] = level
        values = 20.0 + drift + rng.normal(0.0, 0.02, n)
    elif kind == "cyclic":
        t = np.arange(n, dtype=np.float64)
        values = 15.0 + 10.0 * np.sin(2.0 * np.pi * t / 365.0) + rng.normal(0.0, 0.3, n)
    else:
        raise InputError(f"unknown generator {kind!r}; expected 'sensor' or 'cyclic'")
    return TimeSeries(values)


def changed_points(x: ArrayLike, repair: ArrayLike, atol: float = 0.0) -> int:
    """Number of positions where repair differs from x by more than atol."""
    a, b = _values(x), _values(repair)
    if a.shape != b.shape:
        raise InputError(f"length mismatch: {a.size} vs {b.size}")
    return int(np.count_nonzero(np.abs(a - b) > atol))


class RepairSummary(NamedTuple):
    rms: float
    changed: int
    changed_clean: int


def repair_summary(
    truth: ArrayLike, dirty: ArrayLike, repair: ArrayLike, error_mask: Iterable[int] = ()
) -> RepairSummary:
    """RMS against truth plus how many points moved, and how many of those were clean."""
    moved = np.flatnonzero(_values(dirty) != _values(repair)) + 1
    dirty_points = set(error_mask)
    return RepairSummary(
        rms=rms(truth, repair),
        changed=int(moved.size),
        changed_clean=sum(1 for t in moved if int(t) not in dirty_points),
    )
