"""Core tsrepair components: models, estimation, repair engine, baselines and evaluation."""

from .models import (
    CandidateSet,
    DiffSeries,
    LabeledSeries,
    RepairResult,
    RepairState,
    RepairStep,
    SegmentIndex,
    TimeSeries,
)
from .estimation import ModelParams, NormalEquations, ParameterEstimator, estimate
from .engine import RepairEngine, imr_repair, imr_repair_static
from .config import ConfigLoader, RepairConfig, ToolkitConfig
from .exceptions import (
    DegenerateLabels,
    InputError,
    NoFixpoint,
    NumericError,
    RepairError,
    SingularSystem,
)
from . import baselines, evaluation, online

__all__ = [
    "CandidateSet",
    "DiffSeries",
    "LabeledSeries",
    "RepairResult",
    "RepairState",
    "RepairStep",
    "SegmentIndex",
    "TimeSeries",
    "ModelParams",
    "NormalEquations",
    "ParameterEstimator",
    "estimate",
    "RepairEngine",
    "imr_repair",
    "imr_repair_static",
    "ConfigLoader",
    "RepairConfig",
    "ToolkitConfig",
    "DegenerateLabels",
    "InputError",
    "NoFixpoint",
    "NumericError",
    "RepairError",
    "SingularSystem",
    "baselines",
    "evaluation",
    "online",
]
