"""Iterative minimum repairing engine."""

import logging
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import RepairConfig
from .estimation import ModelParams, ParameterEstimator
from .exceptions import InputError, SingularSystem
from .models import (
    CandidateSet,
    LabeledSeries,
    RepairResult,
    RepairState,
    RepairStep,
    TimeSeries,
    init_repair_state,
)

logger = logging.getLogger(__name__)


def predict_diffs(z: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """ARX displacement forecast sum_i phi_i * z_{t-i}; zero for the first p points."""
    p, n = phi.size, z.size
    pred = np.zeros(n)
    for i in range(1, p + 1):
        pred[p:] += phi[i - 1] * z[p - i : n - i]
    return pred


def _candidate_arrays(
    x: np.ndarray, y: np.ndarray, mask: np.ndarray, phi: np.ndarray, tau: float
) -> Tuple[np.ndarray, np.ndarray]:
    """0-based eligible indices and their candidate values."""
    p = phi.size
    y_hat = predict_diffs(y - x, phi) + x
    eligible = ~mask & (np.abs(y_hat - y) > tau)
    eligible[:p] = False
    idx = np.flatnonzero(eligible)
    return idx, y_hat[idx]


def generate_candidates(
    x: TimeSeries, state: RepairState, phi: ModelParams, tau: float
) -> CandidateSet:
    """Candidate repairs for the current state under parameters ``phi``.

    A point is a candidate when it is unlabeled, lies past the first ``p``
    positions and its forecast ``x_t + sum_i phi_i * z_{t-i}`` differs from the
    current value by more than ``tau``.

    Args:
        x: Observations.
        state: Current repair y(k) and its labeled mask.
        phi: Model parameters.
        tau: Repair threshold.

    Returns:
        Candidate values keyed by 1-based index.

    Raises:
        InputError: On a length mismatch or a series no longer than ``p``.
    """
    if state.n != x.n:
        raise InputError(f"length mismatch: state has {state.n} points, x has {x.n}")
    if x.n <= phi.p:
        raise InputError(f"series length {x.n} must exceed order {phi.p}")
    idx, values = _candidate_arrays(x.values, state.current, state.labeled_mask, phi.phi, tau)
    return CandidateSet({int(i) + 1: float(v) for i, v in zip(idx, values)})


def select_minimum_repair(cands: CandidateSet, x: TimeSeries) -> Optional[Tuple[int, float]]:
    """Candidate closest to its observation; smallest index on ties."""
    best: Optional[Tuple[int, float]] = None
    best_dist = np.inf
    for t, value in cands.items():
        dist = abs(value - x.at(t))
        if dist < best_dist:
            best, best_dist = (t, value), dist
    return best


def converged(prev: Sequence[float], next: Sequence[float], tau: float) -> bool:
    """True when no position moved by more than tau."""
    a = np.asarray(prev, dtype=np.float64)
    b = np.asarray(next, dtype=np.float64)
    if a.shape != b.shape:
        raise InputError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        return True
    return bool(np.max(np.abs(a - b)) <= tau)


class RepairEngine:
    """Drives one repair job, applying one single-point repair per step.

    With ``static_phi`` set, the parameter is never re-estimated.
    """

    def __init__(
        self,
        x: TimeSeries,
        labels: LabeledSeries,
        config: RepairConfig,
        static_phi: Optional[ModelParams] = None,
    ):
        if x.n <= config.order:
            raise InputError(f"series length {x.n} must exceed order {config.order}")
        if static_phi is not None and static_phi.p != config.order:
            raise InputError(f"static phi has order {static_phi.p}, config expects {config.order}")
        self.x = x
        self.config = config
        self.state = init_repair_state(x, labels)
        self._z = self.state.snapshot() - x.values
        self._static_phi = static_phi
        self._estimator = (
            ParameterEstimator(config.order, config.backend) if static_phi is None else None
        )
        self.phi_trace: List[np.ndarray] = []
        self.changed_trace: List[RepairStep] = []
        self.estimate_seconds: List[float] = []

    @property
    def backend(self) -> str:
        return "static" if self._static_phi is not None else self.config.backend

    def current_params(self) -> ModelParams:
        if self._static_phi is not None:
            return self._static_phi
        assert self._estimator is not None
        start = time.perf_counter()
        try:
            phi = self._estimator.estimate(self._z)
        except SingularSystem as e:
            logger.debug("singular normal equations, falling back to phi=0: %s", e)
            phi = ModelParams.zeros(self.config.order)
        self.estimate_seconds.append(time.perf_counter() - start)
        return phi

    def step(self) -> Optional[RepairStep]:
        """Run one iteration; returns the applied change or None when no candidate remains."""
        phi = self.current_params()
        self.phi_trace.append(np.array(phi.phi))
        x = self.x.values
        idx, values = _candidate_arrays(
            x, self.state.current, self.state.labeled_mask, phi.phi, self.config.tau
        )
        if idx.size == 0:
            return None
        pick = int(np.argmin(np.abs(values - x[idx])))
        t = int(idx[pick]) + 1
        value = float(values[pick])
        z_new = value - float(x[t - 1])
        # normal equations see the pre-change diffs
        if self._estimator is not None:
            self._estimator.record_change(self._z, t, z_new)
        old = self.state.assign(t, value)
        self._z[t - 1] = z_new
        change = RepairStep(t, old, value)
        self.changed_trace.append(change)
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(
                "k=%d phi=%s t=%d %.6g -> %.6g",
                len(self.changed_trace) - 1, phi.to_list(), t, old, value,
            )
        return change

    def run(self) -> RepairResult:
        """Step until no candidate remains or the iteration cap is hit."""
        done = False
        while len(self.changed_trace) < self.config.max_iterations:
            change = self.step()
            if change is None:
                done = True
                break
        if not done:
            logger.warning(
                "iteration cap %d reached without convergence", self.config.max_iterations
            )
        logger.info(
            "repair finished: iterations=%d converged=%s backend=%s",
            len(self.changed_trace), done, self.backend,
        )
        return RepairResult(
            final=self.state.snapshot(),
            iterations=len(self.changed_trace),
            converged=done,
            phi_trace=self.phi_trace,
            changed_trace=self.changed_trace,
            estimate_seconds=self.estimate_seconds,
            backend=self.backend,
        )


def imr_repair(x: TimeSeries, labels: LabeledSeries, cfg: RepairConfig) -> RepairResult:
    """Repair x from labels, re-estimating the parameters after every single-point repair.

    Labeled points keep their label values. ``converged`` is False only when
    ``cfg.max_iterations`` repairs were applied and candidates still remained.

    Raises:
        InputError: If the series is no longer than ``cfg.order``.
    """
    return RepairEngine(x, labels, cfg).run()


def imr_repair_static(
    x: TimeSeries, labels: LabeledSeries, cfg: RepairConfig, phi: ModelParams
) -> RepairResult:
    """Same loop as :func:`imr_repair` with ``phi`` held fixed."""
    return RepairEngine(x, labels, cfg, static_phi=phi).run()
