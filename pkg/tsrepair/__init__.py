"""
tsrepair - Iterative Minimum Repairing of time series

Repairs dirty observations in a time series using a small set of labeled
(trusted) points. The repair alternates between estimating an ARX model of
the repair displacements and applying the single smallest proposed change,
until the changes settle. Includes fast estimation backends, a closed-form
online mode, reference baselines and an injection/evaluation harness.

Version: 0.1.0
"""

__version__ = "0.1.0"
__author__ = "tsrepair developers"

from .core.models import LabeledSeries, RepairResult, TimeSeries
from .core.config import RepairConfig
from .core.estimation import ModelParams, ParameterEstimator
from .core.engine import RepairEngine, imr_repair, imr_repair_static

__all__ = [
    "TimeSeries",
    "LabeledSeries",
    "RepairResult",
    "RepairConfig",
    "ModelParams",
    "ParameterEstimator",
    "RepairEngine",
    "imr_repair",
    "imr_repair_static",
]
