"""One-pass reference repairers: AR, ARX, EWMA, SMA and linear interpolation."""

import logging
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd

from .estimation import (
    ModelParams,
    build_design_matrices,
    check_order,
    normal_from_design,
    solve_normal,
)
from .exceptions import InputError, SingularSystem
from .models import DiffSeries, LabeledSeries, TimeSeries, init_repair_state

logger = logging.getLogger(__name__)


class BaselineOutcome(NamedTuple):
    """Repaired sequence plus the parameter it was produced with."""
    values: np.ndarray
    phi: ModelParams
    modified: int


def _ols_or_zero(values: np.ndarray, p: int) -> ModelParams:
    try:
        return solve_normal(normal_from_design(build_design_matrices(DiffSeries(values), p)))
    except SingularSystem as e:
        logger.debug("singular system in baseline fit, using phi=0: %s", e)
        return ModelParams.zeros(p)


def _forecast(seq: np.ndarray, phi: np.ndarray, t: int) -> float:
    """sum_i phi_i * seq[t-i] for 0-based t, accumulated left to right."""
    acc = 0.0
    for i in range(1, phi.size + 1):
        acc += phi[i - 1] * seq[t - i]
    return acc


def ar_fit(x: TimeSeries, labels: LabeledSeries, p: int) -> ModelParams:
    """AR(p) coefficients by OLS on the label-substituted values, no intercept."""
    check_order(p)
    return _ols_or_zero(init_repair_state(x, labels).snapshot(), p)


def ar_repair_detailed(
    x: TimeSeries, labels: LabeledSeries, p: int, tau: float, phi: Optional[ModelParams] = None
) -> BaselineOutcome:
    """One left-to-right pass with an AR(p) model of the values themselves.

    Each unlabeled point whose forecast differs from it by more than tau is
    replaced by the forecast.

    Args:
        x: Observations.
        labels: Labels, substituted before fitting and never changed.
        p: Model order.
        tau: Repair threshold.
        phi: Fixed coefficients; fitted by OLS when omitted.

    Returns:
        Values, coefficients and the number of modified points.

    Raises:
        InputError: If p is out of range or n <= p.
    """
    check_order(p)
    if x.n <= p:
        raise InputError(f"series length {x.n} must exceed order {p}")
    state = init_repair_state(x, labels)
    seq = state.snapshot()
    mask = state.labeled_mask
    params = phi if phi is not None else _ols_or_zero(seq.copy(), p)
    modified = 0
    for t in range(p, x.n):
        if mask[t]:
            continue
        # repairs feed forward into later forecasts
        guess = _forecast(seq, params.phi, t)
        if abs(guess - seq[t]) > tau:
            seq[t] = guess
            modified += 1
    return BaselineOutcome(seq, params, modified)


def ar_repair(x: TimeSeries, labels: LabeledSeries, p: int, tau: float) -> np.ndarray:
    """Values-only form of :func:`ar_repair_detailed`."""
    return ar_repair_detailed(x, labels, p, tau).values


def arx_fit(x: TimeSeries, labels: LabeledSeries, p: int) -> ModelParams:
    """ARX(p) coefficients by OLS on the initial diffs y(0) - x."""
    check_order(p)
    state = init_repair_state(x, labels)
    return _ols_or_zero(state.snapshot() - x.values, p)


def arx_repair_detailed(
    x: TimeSeries, labels: LabeledSeries, p: int, tau: float, phi: Optional[ModelParams] = None
) -> BaselineOutcome:
    """One pass with an AR(p) model of the label diffs y - x.

    Forecast diffs come from earlier diffs, repaired ones included, and the
    forecast replaces x_t when it moves x_t by more than tau.

    Raises:
        InputError: If p is out of range, n <= p or phi has the wrong order.
    """
    check_order(p)
    if x.n <= p:
        raise InputError(f"series length {x.n} must exceed order {p}")
    if phi is not None and phi.p != p:
        raise InputError(f"phi has order {phi.p}, expected {p}")
    state = init_repair_state(x, labels)
    y = state.snapshot()
    mask = state.labeled_mask
    obs = x.values
    z = y - obs
    params = phi if phi is not None else _ols_or_zero(z.copy(), p)
    modified = 0
    for t in range(p, x.n):
        if mask[t]:
            continue
        guess = _forecast(z, params.phi, t) + obs[t]
        if abs(guess - obs[t]) > tau:
            y[t] = guess
            z[t] = guess - obs[t]
            modified += 1
    return BaselineOutcome(y, params, modified)


def arx_repair(
    x: TimeSeries,
    labels: LabeledSeries,
    p: int,
    tau: float,
    phi: Optional[ModelParams] = None,
) -> np.ndarray:
    """Values-only form of :func:`arx_repair_detailed`."""
    return arx_repair_detailed(x, labels, p, tau, phi).values


def ewma(x: TimeSeries, alpha: float) -> np.ndarray:
    """s_1 = x_1, s_t = alpha * x_t + (1 - alpha) * s_{t-1}."""
    if not 0 < alpha <= 1:
        raise InputError(f"alpha must be in (0, 1], got {alpha}")
    return pd.Series(x.values).ewm(alpha=alpha, adjust=False).mean().to_numpy()


def sma(x: TimeSeries, window: int) -> np.ndarray:
    """Trailing mean over the last `window` points (fewer at the start)."""
    if window < 1:
        raise InputError(f"window must be at least 1, got {window}")
    if window == 1:
        return np.array(x.values)
    return pd.Series(x.values).rolling(window, min_periods=1).mean().to_numpy()


def linear_interpolate(x: TimeSeries, labels: LabeledSeries) -> np.ndarray:
    """Connect labeled points with straight lines; hold the end labels flat."""
    if not len(labels):
        return np.array(x.values)
    labels.check_bounds(x.n)
    known = np.array(labels.indices(), dtype=np.float64)
    values = np.array(list(labels.labels.values()), dtype=np.float64)
    out = np.interp(np.arange(1, x.n + 1, dtype=np.float64), known, values)
    # labeled points stay bit-identical
    out[known.astype(np.int64) - 1] = values
    return out
