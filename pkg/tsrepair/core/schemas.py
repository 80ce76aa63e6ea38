"""Pydantic schemas for reports, bench scenarios and config files."""

from typing import Any, Dict, List, Literal, Optional, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .exceptions import InputError

METHODS = ("imr", "imr-static", "ar", "arx", "ewma", "sma", "online", "interpolate")


class RunReportSchema(BaseModel):
    """One line of run output."""
    model_config = ConfigDict(
        extra="allow",
        json_schema_extra={
            "example": {
                "method": "imr",
                "config": {"order": 1, "tau": 0.1, "max_iterations": 100000},
                "iterations": 6,
                "converged": True,
                "rms": 0.0123,
                "wall_ms": 0.41,
            }
        },
    )

    method: str = Field(description="Repair method name")
    config: Dict[str, Any] = Field(
        default_factory=dict, description="Echo of the effective parameters"
    )
    iterations: Optional[int] = Field(None, ge=0, description="Repairs applied (iterative methods)")
    converged: Optional[bool] = Field(None, description="Whether the iteration settled")
    rms: Optional[float] = Field(None, ge=0, description="RMS error against truth, when given")
    wall_ms: float = Field(ge=0, description="Wall-clock time in milliseconds")
    phi_trace: Optional[List[List[float]]] = Field(None, description="Per-iteration parameters")


class ScenarioSchema(BaseModel):
    """Benchmark scenario file."""
    model_config = ConfigDict(extra="forbid")

    seed: Optional[int] = Field(None, ge=0)
    methods: List[str] = Field(default_factory=lambda: ["imr", "arx", "ewma"], min_length=1)
    error_lengths: List[int] = Field(default_factory=lambda: [1, 10, 50], min_length=1)
    repetitions: int = Field(5, ge=1)
    n: int = Field(3000, ge=2)
    kind: Literal["shift", "innovational", "spike"] = "shift"
    amount: float = 3.0
    variance: float = Field(0.1, ge=0)
    windows: int = Field(1, ge=1)
    label_rate: float = Field(0.2, ge=0, le=1)
    label_mode: Literal["uniform", "prefix"] = "uniform"
    order: int = Field(1, ge=1, le=8)
    tau: float = Field(0.1, ge=0)
    max_iterations: int = Field(100000, ge=1)
    backend: Literal["full", "pruned", "incremental"] = "incremental"
    workers: int = Field(1, ge=1)
    generator: Literal["sensor", "cyclic"] = "sensor"
    timing: bool = False
    taus: Optional[List[float]] = None
    orders: Optional[List[int]] = None
    label_rates: Optional[List[float]] = None
    iteration_caps: Optional[List[int]] = None

    @field_validator("methods")
    @classmethod
    def validate_methods(cls, v: List[str]) -> List[str]:
        unknown = [m for m in v if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; expected a subset of {list(METHODS)}")
        if "imr-static" in v:
            # bench cells carry no fixed parameters
            raise ValueError("imr-static needs fixed parameters and cannot be benchmarked")
        return v

    @field_validator("error_lengths", "orders", "iteration_caps")
    @classmethod
    def validate_positive(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        if v is not None and any(item < 1 for item in v):
            raise ValueError("entries must be positive")
        return v

    @model_validator(mode="after")
    def validate_spike_length(self) -> "ScenarioSchema":
        if self.kind == "spike" and any(length != 1 for length in self.error_lengths):
            raise ValueError("spike errors have length 1")
        if max(self.error_lengths) * self.windows > self.n:
            raise ValueError("error windows do not fit in the series")
        return self


class RepairSchema(BaseModel):
    """The ``repair`` section of a configuration file."""
    model_config = ConfigDict(extra="forbid")

    order: Optional[int] = Field(None, ge=1, le=8, description="Model order p")
    tau: Optional[float] = Field(None, ge=0, description="Repair threshold")
    max_iterations: Optional[int] = Field(None, ge=1, description="Iteration cap")
    backend: Optional[Literal["full", "pruned", "incremental"]] = None


class SmootherSchema(BaseModel):
    """The ``smoother`` section: EWMA factor and SMA window."""
    model_config = ConfigDict(extra="forbid")

    alpha: Optional[float] = Field(None, gt=0, le=1)
    window: Optional[int] = Field(None, ge=1)


class OnlineSchema(BaseModel):
    """The ``online`` section: damped fixpoint settings."""
    model_config = ConfigDict(extra="forbid")

    tol: Optional[float] = Field(None, gt=0)
    max_steps: Optional[int] = Field(None, ge=1)
    damping: Optional[float] = Field(None, ge=0, lt=1)


class ConfigSchema(BaseModel):
    """Schema for tsrepair configuration files."""
    version: str = Field("0.1.0", description="Configuration version")
    seed: int = Field(1337, ge=0, description="Random seed")
    repair: Optional[RepairSchema] = Field(None, description="Repair engine settings")
    smoother: Optional[SmootherSchema] = Field(None, description="EWMA/SMA settings")
    online: Optional[OnlineSchema] = Field(None, description="Fixpoint solve settings")
    bench: Optional[ScenarioSchema] = Field(None, description="Benchmark scenario")

    @field_validator("version")
    @classmethod
    def validate_version(cls, v: str) -> str:
        if not v or "." not in v:
            raise ValueError("Version must be in format X.Y.Z")
        return v


def _checked(schema: Type[BaseModel], data: Any) -> Any:
    """Instantiate ``schema`` from a mapping, turning every failure into InputError."""
    if not isinstance(data, dict):
        kind = type(data).__name__
        raise InputError(f"invalid {schema.__name__}: expected a mapping, got {kind}")
    try:
        return schema.model_validate(data)
    except ValidationError as e:
        raise InputError(f"invalid {schema.__name__}: {e}") from e


def validate_report(data: Dict[str, Any]) -> RunReportSchema:
    return _checked(RunReportSchema, data)


def validate_scenario(data: Dict[str, Any]) -> ScenarioSchema:
    """Check a parsed scenario file; unknown keys and methods are rejected."""
    return _checked(ScenarioSchema, data)


def validate_config_dict(data: Dict[str, Any]) -> ConfigSchema:
    """Check a parsed config file, including the types inside each section.

    Raises:
        InputError: If the data is not a mapping or any field is out of range.
    """
    return _checked(ConfigSchema, data)
