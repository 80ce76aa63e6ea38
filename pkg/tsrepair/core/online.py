"""Closed-form IMR(1) repair: labeled prefix, streaming, and multi-segment.

With the first ell points labeled and diffs z_t = y_t - x_t, the converged
first-order repair is

    phi = sum_{t<ell} z_t z_{t+1} / sum_{t<ell} z_t^2
    y_i = x_i + phi^(i-ell) * z_ell          for i > ell

For labels spread over several maximal runs, phi solves an implicit equation
in which each gap of g unlabeled points contributes phi^g terms; it is found
by damped fixpoint iteration.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Tuple

import numpy as np

from .exceptions import DegenerateLabels, InputError, NoFixpoint
from .models import LabeledSeries, TimeSeries, labeled_segments

logger = logging.getLogger(__name__)


class _PrefixStats:
    """Running sums over consecutive diffs of one labeled run."""

    __slots__ = ("cross", "square", "last", "count")

    def __init__(self) -> None:
        self.cross = 0.0
        self.square = 0.0
        self.last: Optional[float] = None
        self.count = 0

    def add(self, z: float) -> None:
        if self.last is not None:
            self.cross += self.last * z
            self.square += self.last * self.last
        self.last = z
        self.count += 1

    def ratio(self) -> float:
        if self.square == 0.0:
            raise DegenerateLabels("labeled diffs are all zero; parameter is undefined")
        return self.cross / self.square

    def bounded(self) -> bool:
        return abs(self.cross) < self.square


def _prefix_diffs(x: TimeSeries, labels: LabeledSeries, ell: int) -> List[float]:
    if ell < 2:
        raise InputError(f"labeled prefix needs at least 2 points, got {ell}")
    if ell > x.n:
        raise InputError(f"prefix length {ell} exceeds series length {x.n}")
    missing = [t for t in range(1, ell + 1) if t not in labels]
    if missing:
        raise InputError(f"prefix index {missing[0]} is not labeled")
    return [labels.labels[t] - x.at(t) for t in range(1, ell + 1)]


def _prefix_stats(x: TimeSeries, labels: LabeledSeries, ell: int) -> _PrefixStats:
    stats = _PrefixStats()
    for z in _prefix_diffs(x, labels, ell):
        stats.add(z)
    return stats


def phi_single(x: TimeSeries, labels: LabeledSeries, ell: int) -> float:
    """Converged IMR(1) parameter for a labeled prefix 1..ell.

    Equals sum z_t z_{t+1} / sum z_t^2 over the prefix, with the last term
    left out of the denominator.

    Raises:
        InputError: If ell < 2, ell > n or a prefix index is unlabeled.
        DegenerateLabels: If every diff but the last is zero.
    """
    return _prefix_stats(x, labels, ell).ratio()


def check_bound_condition(x: TimeSeries, labels: LabeledSeries, ell: int) -> bool:
    """True iff |sum z_t z_{t+1}| < sum z_t^2 over the prefix (strict).

    When it holds, the converged parameter has magnitude below one and
    propagated repairs decay along the tail.
    """
    return _prefix_stats(x, labels, ell).bounded()


@dataclass(frozen=True)
class OnlinePrefixModel:
    """Converged IMR(1) state after a labeled prefix of length ell."""
    phi1: float
    ell: int
    z_ell: float
    prefix: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.ell < 2:
            raise InputError(f"ell must be at least 2, got {self.ell}")
        if not (np.isfinite(self.phi1) and np.isfinite(self.z_ell)):
            raise InputError("phi1 and z_ell must be finite")
        if self.prefix and len(self.prefix) != self.ell:
            raise InputError(f"prefix has {len(self.prefix)} values, expected {self.ell}")

    @classmethod
    def fit(cls, x: TimeSeries, labels: LabeledSeries, ell: int) -> "OnlinePrefixModel":
        stats = _prefix_stats(x, labels, ell)
        assert stats.last is not None
        return cls(
            phi1=stats.ratio(),
            ell=ell,
            z_ell=stats.last,
            prefix=tuple(labels.labels[t] for t in range(1, ell + 1)),
        )


def _propagate(tail: Iterable[float], phi: float, z: float) -> Iterable[float]:
    carry = z
    for obs in tail:
        carry *= phi
        yield obs + carry


def repair_single(x: TimeSeries, model: OnlinePrefixModel) -> np.ndarray:
    """Fill every point after the prefix with y_i = x_i + phi1**(i - ell) * z_ell.

    Args:
        x: Observations, at least ``model.ell`` of them.
        model: Fitted prefix model.

    Returns:
        The repaired sequence; the prefix carries its labels.
    """
    if model.ell > x.n:
        raise InputError(f"prefix length {model.ell} exceeds series length {x.n}")
    if model.prefix:
        head = np.asarray(model.prefix, dtype=np.float64)
    else:
        # without the stored prefix only y_ell is known
        head = np.array(x.values[: model.ell])
        head[-1] += model.z_ell
    tail = list(_propagate(x.values[model.ell :], model.phi1, model.z_ell))
    return np.concatenate([head, np.asarray(tail, dtype=np.float64)])


class OnlineRepairer:
    """Streaming IMR(1) over one growing labeled prefix.

    Labeled points extend the prefix and update phi in O(1). The first
    unlabeled observation freezes the prefix; each later observation is
    repaired immediately.
    """

    def __init__(self) -> None:
        self._stats = _PrefixStats()
        self._prefix: List[float] = []
        self._carry: Optional[float] = None
        self._phi: Optional[float] = None

    @property
    def ell(self) -> int:
        return self._stats.count

    @property
    def frozen(self) -> bool:
        return self._carry is not None

    @property
    def phi1(self) -> float:
        if self._phi is not None:
            return self._phi
        return self._stats.ratio()

    @property
    def bound_condition(self) -> bool:
        return self._stats.bounded()

    def extend_labeled(self, x_t: float, y_t: float) -> float:
        if self.frozen:
            raise InputError(
                f"label after the prefix was frozen (point {self.ell + 1} onwards is streaming)"
            )
        if not (np.isfinite(x_t) and np.isfinite(y_t)):
            raise InputError("labeled point must be finite")
        self._stats.add(float(y_t) - float(x_t))
        self._prefix.append(float(y_t))
        return float(y_t)

    def extend(self, x_t: float) -> float:
        if not np.isfinite(x_t):
            raise InputError("observation must be finite")
        if self._carry is None:
            if self.ell < 2:
                raise InputError(f"labeled prefix needs at least 2 points, got {self.ell}")
            self._phi = self._stats.ratio()
            assert self._stats.last is not None
            self._carry = self._stats.last
            logger.debug(
                "prefix frozen: ell=%d phi1=%.6g bounded=%s",
                self.ell, self._phi, self.bound_condition,
            )
        assert self._phi is not None
        self._carry *= self._phi
        return float(x_t) + self._carry

    def model(self) -> OnlinePrefixModel:
        if self._stats.last is None or self.ell < 2:
            raise InputError(f"labeled prefix needs at least 2 points, got {self.ell}")
        return OnlinePrefixModel(
            phi1=self.phi1, ell=self.ell, z_ell=self._stats.last, prefix=tuple(self._prefix)
        )


class FixpointResult(NamedTuple):
    """Solution of the multi-segment parameter equation."""
    phi: float
    residual: float
    steps: int


class _SegmentTerms(NamedTuple):
    within_cross: float
    within_square: float
    gaps: np.ndarray      # unlabeled run lengths between consecutive segments
    tails: np.ndarray     # z at the end of the earlier segment
    heads: np.ndarray     # z at the start of the later segment


def _segment_terms(x: TimeSeries, labels: LabeledSeries) -> _SegmentTerms:
    segments = labeled_segments(labels, x.n)
    if segments.m == 0:
        raise DegenerateLabels("no labeled segments")
    cross = square = 0.0
    gaps, tails, heads = [], [], []
    for j, (s, e) in enumerate(segments, start=1):
        stats = _PrefixStats()
        for t in range(s, e + 1):
            stats.add(labels.labels[t] - x.at(t))
        cross += stats.cross
        square += stats.square
        if j > 1:
            prev_end = segments.end(j - 1)
            gaps.append(s - 1 - prev_end)
            tails.append(labels.labels[prev_end] - x.at(prev_end))
            heads.append(labels.labels[s] - x.at(s))
    return _SegmentTerms(
        cross, square, np.asarray(gaps, dtype=np.int64),
        np.asarray(tails, dtype=np.float64), np.asarray(heads, dtype=np.float64),
    )


def _implied_phi(terms: _SegmentTerms, phi: float) -> float:
    lift = phi ** terms.gaps * terms.tails
    num = terms.within_cross + float(np.sum(lift * terms.heads))
    den = terms.within_square + float(np.sum(lift * lift))
    if den == 0.0:
        raise NoFixpoint(f"parameter equation has a zero denominator at phi={phi}")
    return num / den


def multi_segment_phi(
    x: TimeSeries,
    labels: LabeledSeries,
    tol: float = 1e-10,
    max_steps: int = 10000,
    damping: float = 0.5,
) -> FixpointResult:
    """Solve for phi by damped iteration phi <- damping*phi + (1-damping)*F(phi).

    Raises:
        DegenerateLabels: no labels, or every labeled diff is zero
        NoFixpoint: the iteration does not settle within max_steps
    """
    terms = _segment_terms(x, labels)
    if terms.within_square == 0.0 and not np.any(terms.tails):
        raise DegenerateLabels("labeled diffs carry no information for the parameter")
    phi = terms.within_cross / terms.within_square if terms.within_square else 0.5
    for step in range(1, max_steps + 1):
        nxt = damping * phi + (1.0 - damping) * _implied_phi(terms, phi)
        if not np.isfinite(nxt):
            raise NoFixpoint(f"parameter iteration diverged at step {step}")
        if abs(nxt - phi) <= tol:
            residual = abs(_implied_phi(terms, nxt) - nxt)
            logger.debug("fixpoint phi=%.10g residual=%.3g steps=%d", nxt, residual, step)
            return FixpointResult(nxt, residual, step)
        phi = nxt
    raise NoFixpoint(f"parameter iteration did not settle within {max_steps} steps")


class MultiSegmentOutcome(NamedTuple):
    values: np.ndarray
    fit: Optional[FixpointResult]


def repair_multi_segment_detailed(
    x: TimeSeries,
    labels: LabeledSeries,
    tol: float = 1e-10,
    max_steps: int = 10000,
    damping: float = 0.5,
) -> MultiSegmentOutcome:
    """Repair from several labeled segments with one shared IMR(1) parameter.

    Points before the first segment stay as observed. Every unlabeled run
    after a segment decays from that segment's last diff.

    Returns:
        Values plus the fixpoint fit, or None when no point needed filling.

    Raises:
        DegenerateLabels: no labels, or nothing to estimate the parameter from
        NoFixpoint: propagated from :func:`multi_segment_phi`
    """
    segments = labeled_segments(labels, x.n)
    y = np.array(x.values)
    for t, value in labels.labels.items():
        y[t - 1] = value
    if segments.m == 0:
        raise DegenerateLabels("no labeled segments")
    first_start = segments.start(1)
    if all(t in labels for t in range(first_start, x.n + 1)):
        # nothing after the first label to fill
        return MultiSegmentOutcome(y, None)

    fit = multi_segment_phi(x, labels, tol=tol, max_steps=max_steps, damping=damping)
    for j, (_, e) in enumerate(segments, start=1):
        stop = segments.start(j + 1) - 1 if j < segments.m else x.n
        z_end = labels.labels[e] - x.at(e)
        y[e:stop] = list(_propagate(x.values[e:stop], fit.phi, z_end))
    return MultiSegmentOutcome(y, fit)


def repair_multi_segment(x: TimeSeries, labels: LabeledSeries, tol: float = 1e-10) -> np.ndarray:
    """Values-only form of :func:`repair_multi_segment_detailed`."""
    return repair_multi_segment_detailed(x, labels, tol=tol).values
