"""Single entry point that runs any repair method by name."""

import logging
from typing import Any, Dict, List, NamedTuple, Optional

import numpy as np

from . import baselines, online
from .config import OnlineConfig, RepairConfig, SmootherConfig
from .engine import imr_repair, imr_repair_static
from .estimation import ModelParams
from .exceptions import InputError
from .models import LabeledSeries, TimeSeries, labeled_segments
from .schemas import METHODS

logger = logging.getLogger(__name__)


class MethodOutcome(NamedTuple):
    """Repaired values plus whatever the method reports about itself."""
    values: np.ndarray
    iterations: Optional[int] = None
    converged: Optional[bool] = None
    phi_trace: Optional[List[List[float]]] = None
    extra: Dict[str, Any] = {}


def _prefix_length(labels: LabeledSeries, n: int) -> int:
    segments = labeled_segments(labels, n)
    if segments.m == 1 and segments.start(1) == 1:
        return segments.end(1)
    return 0


def run_method(
    method: str,
    x: TimeSeries,
    labels: LabeledSeries,
    repair: Optional[RepairConfig] = None,
    smoother: Optional[SmootherConfig] = None,
    online_cfg: Optional[OnlineConfig] = None,
    phi: Optional[ModelParams] = None,
) -> MethodOutcome:
    """Run ``method`` on (x, labels).

    Raises:
        InputError: unknown method or missing method parameter
        NumericError: from the online solver
    """
    repair = repair or RepairConfig()
    smoother = smoother or SmootherConfig()
    online_cfg = online_cfg or OnlineConfig()

    if method == "imr":
        result = imr_repair(x, labels, repair)
        return MethodOutcome(
            result.final, result.iterations, result.converged,
            [[float(v) for v in p] for p in result.phi_trace],
            {"backend": result.backend},
        )
    if method == "imr-static":
        if phi is None:
            raise InputError("imr-static needs a parameter (--phi)")
        result = imr_repair_static(x, labels, repair, phi)
        return MethodOutcome(
            result.final, result.iterations, result.converged, None, {"phi": phi.to_list()}
        )
    if method == "ar":
        out = baselines.ar_repair_detailed(x, labels, repair.order, repair.tau, phi)
        return MethodOutcome(out.values, extra={"phi": out.phi.to_list(), "modified": out.modified})
    if method == "arx":
        out = baselines.arx_repair_detailed(x, labels, repair.order, repair.tau, phi)
        return MethodOutcome(out.values, extra={"phi": out.phi.to_list(), "modified": out.modified})
    if method == "ewma":
        return MethodOutcome(baselines.ewma(x, smoother.alpha))
    if method == "sma":
        return MethodOutcome(baselines.sma(x, smoother.window))
    if method == "interpolate":
        return MethodOutcome(baselines.linear_interpolate(x, labels))
    if method == "online":
        outcome = online.repair_multi_segment_detailed(
            x, labels,
            tol=online_cfg.tol, max_steps=online_cfg.max_steps, damping=online_cfg.damping,
        )
        extra: Dict[str, Any] = {}
        if outcome.fit is not None:
            fit = outcome.fit
            extra.update(phi=fit.phi, residual=fit.residual, steps=fit.steps)
        ell = _prefix_length(labels, x.n)
        if ell >= 2:
            extra["bound_condition"] = online.check_bound_condition(x, labels, ell)
        return MethodOutcome(outcome.values, extra=extra)
    raise InputError(f"unknown method {method!r}; expected one of {list(METHODS)}")
