"""Configuration management for tsrepair."""

import hashlib
import json
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import yaml

from .exceptions import InputError

SEED_ENV_VAR = "TSREPAIR_SEED"
DEFAULT_SEED = 1337


class ErrorKind(Enum):
    """Synthetic error shapes."""
    SHIFT = "shift"
    INNOVATIONAL = "innovational"
    SPIKE = "spike"


class LabelMode(Enum):
    UNIFORM = "uniform"
    PREFIX = "prefix"


@dataclass
class RepairConfig:
    """Configuration for the iterative repair engine."""
    order: int = 1
    tau: float = 0.1
    max_iterations: int = 100000
    backend: str = "incremental"

    def __post_init__(self) -> None:
        if not 1 <= self.order <= 8:
            raise InputError(f"order must be in [1, 8], got {self.order}")
        if not self.tau >= 0:
            raise InputError(f"tau must be non-negative, got {self.tau}")
        if self.max_iterations < 1:
            raise InputError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if self.backend not in ("full", "pruned", "incremental"):
            raise InputError(f"unknown backend {self.backend!r}")


@dataclass
class SmootherConfig:
    """Configuration for the EWMA and SMA smoothers."""
    alpha: float = 0.5
    window: int = 3

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise InputError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.window < 1:
            raise InputError(f"window must be at least 1, got {self.window}")


@dataclass
class OnlineConfig:
    """Configuration for the multi-segment fixpoint solve."""
    tol: float = 1e-10
    max_steps: int = 10000
    damping: float = 0.5

    def __post_init__(self) -> None:
        if self.tol <= 0:
            raise InputError(f"tol must be positive, got {self.tol}")
        if self.max_steps < 1:
            raise InputError(f"max_steps must be at least 1, got {self.max_steps}")
        if not 0 <= self.damping < 1:
            raise InputError(f"damping must be in [0, 1), got {self.damping}")


@dataclass
class ErrorSpec:
    """One window of injected errors; start is 1-based."""
    kind: ErrorKind = ErrorKind.SHIFT
    start: int = 1
    length: int = 1
    amount: float = 3.0
    variance: float = 0.1
    decay: float = 0.8
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if isinstance(self.kind, str):
            self.kind = ErrorKind(self.kind)
        if self.length < 1:
            raise InputError(f"error length must be at least 1, got {self.length}")
        if self.kind is ErrorKind.SPIKE and self.length != 1:
            raise InputError(f"spike errors have length 1, got {self.length}")
        if self.start < 1:
            raise InputError(f"error start must be at least 1, got {self.start}")
        if self.variance < 0:
            raise InputError(f"variance must be non-negative, got {self.variance}")
        if self.kind is ErrorKind.INNOVATIONAL and not 0 < self.decay < 1:
            raise InputError(f"decay must be in (0, 1), got {self.decay}")

    @property
    def end(self) -> int:
        return self.start + self.length - 1


@dataclass
class LabelingPolicy:
    """How truth labels are sampled."""
    rate: float = 0.2
    seed: int = DEFAULT_SEED
    mode: LabelMode = LabelMode.UNIFORM

    def __post_init__(self) -> None:
        if isinstance(self.mode, str):
            self.mode = LabelMode(self.mode)
        if not 0 <= self.rate <= 1:
            raise InputError(f"labeling rate must be in [0, 1], got {self.rate}")


@dataclass
class BenchConfig:
    """Benchmark scenario: methods x error lengths x repetitions, plus sweeps."""
    methods: List[str] = field(default_factory=lambda: ["imr", "arx", "ewma"])
    error_lengths: List[int] = field(default_factory=lambda: [1, 10, 50])
    repetitions: int = 5
    n: int = 3000
    kind: str = "shift"
    amount: float = 3.0
    variance: float = 0.1
    windows: int = 1
    label_rate: float = 0.2
    label_mode: str = "uniform"
    order: int = 1
    tau: float = 0.1
    max_iterations: int = 100000
    backend: str = "incremental"
    workers: int = 1
    generator: str = "sensor"
    timing: bool = False
    taus: Optional[List[float]] = None
    orders: Optional[List[int]] = None
    label_rates: Optional[List[float]] = None
    iteration_caps: Optional[List[int]] = None

    def grid(self) -> Iterator[Tuple[int, float, float, int]]:
        """Yield (order, tau, label_rate, max_iterations) in a fixed order."""
        for order in self.orders or [self.order]:
            for tau in self.taus or [self.tau]:
                for rate in self.label_rates or [self.label_rate]:
                    for cap in self.iteration_caps or [self.max_iterations]:
                        yield order, tau, rate, cap

    def to_dict(self) -> Dict[str, Any]:
        return {
            "methods": list(self.methods),
            "error_lengths": list(self.error_lengths),
            "repetitions": self.repetitions,
            "n": self.n,
            "kind": self.kind,
            "amount": self.amount,
            "variance": self.variance,
            "windows": self.windows,
            "label_rate": self.label_rate,
            "label_mode": self.label_mode,
            "order": self.order,
            "tau": self.tau,
            "max_iterations": self.max_iterations,
            "backend": self.backend,
            "workers": self.workers,
            "generator": self.generator,
            "timing": self.timing,
            "taus": self.taus,
            "orders": self.orders,
            "label_rates": self.label_rates,
            "iteration_caps": self.iteration_caps,
        }


@dataclass
class ToolkitConfig:
    """Complete tsrepair configuration."""
    version: str = "0.1.0"
    seed: int = DEFAULT_SEED
    repair: RepairConfig = field(default_factory=RepairConfig)
    smoother: SmootherConfig = field(default_factory=SmootherConfig)
    online: OnlineConfig = field(default_factory=OnlineConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)

    def compute_hash(self) -> str:
        """Short sha256 of the canonical dict form."""
        config_str = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(config_str.encode()).hexdigest()[:16]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "seed": self.seed,
            "repair": {
                "order": self.repair.order,
                "tau": self.repair.tau,
                "max_iterations": self.repair.max_iterations,
                "backend": self.repair.backend,
            },
            "smoother": {
                "alpha": self.smoother.alpha,
                "window": self.smoother.window,
            },
            "online": {
                "tol": self.online.tol,
                "max_steps": self.online.max_steps,
                "damping": self.online.damping,
            },
            "bench": self.bench.to_dict(),
        }


def resolve_seed(explicit: Optional[int], config_seed: int = DEFAULT_SEED) -> int:
    """Pick the seed: explicit flag, then TSREPAIR_SEED, then the config value."""
    if explicit is not None:
        return explicit
    env = os.environ.get(SEED_ENV_VAR)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None
    return config_seed


class ConfigLoader:
    """Loader for tsrepair configuration files."""

    @staticmethod
    def load(path: Path | str) -> ToolkitConfig:
        """Load configuration from a YAML file.

        Raises:
            FileNotFoundError: If the file doesn't exist
            InputError: If the content is invalid
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Configuration file not found: {path}")

        with open(path, "r") as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise InputError(f"{path}: not valid YAML: {e}") from e

        from .schemas import validate_config_dict

        checked = validate_config_dict(data)
        return ConfigLoader.from_dict(checked.model_dump(exclude_none=True))

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> ToolkitConfig:
        defaults = ToolkitConfig()

        repair_data = data.get("repair") or {}
        repair = RepairConfig(
            order=repair_data.get("order", defaults.repair.order),
            tau=repair_data.get("tau", defaults.repair.tau),
            max_iterations=repair_data.get("max_iterations", defaults.repair.max_iterations),
            backend=repair_data.get("backend", defaults.repair.backend),
        )

        smoother_data = data.get("smoother") or {}
        smoother = SmootherConfig(
            alpha=smoother_data.get("alpha", defaults.smoother.alpha),
            window=smoother_data.get("window", defaults.smoother.window),
        )

        online_data = data.get("online") or {}
        online = OnlineConfig(
            tol=online_data.get("tol", defaults.online.tol),
            max_steps=online_data.get("max_steps", defaults.online.max_steps),
            damping=online_data.get("damping", defaults.online.damping),
        )

        bench_defaults = defaults.bench.to_dict()
        bench_data = {**bench_defaults, **(data.get("bench") or {})}
        bench = BenchConfig(**{key: bench_data[key] for key in bench_defaults})

        return ToolkitConfig(
            version=data.get("version", defaults.version),
            seed=data.get("seed", defaults.seed),
            repair=repair,
            smoother=smoother,
            online=online,
            bench=bench,
        )

    @staticmethod
    def save(config: ToolkitConfig, path: Path | str) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(path, "w") as f:
            yaml.dump(config.to_dict(), f, default_flow_style=False, sort_keys=False)

    @staticmethod
    def get_default() -> ToolkitConfig:
        return ToolkitConfig()

    @staticmethod
    def validate(config: ToolkitConfig) -> List[str]:
        """Validate cross-field rules.

        Returns:
            List of validation error messages (empty if valid)
        """
        errors = []

        if config.seed < 0:
            errors.append("Seed must be non-negative")

        bench = config.bench
        if bench.repetitions < 1:
            errors.append("Bench repetitions must be at least 1")
        if bench.workers < 1:
            errors.append("Bench workers must be at least 1")
        if bench.windows < 1:
            errors.append("Bench windows must be at least 1")
        if not bench.methods:
            errors.append("Bench needs at least one method")
        if any(length < 1 for length in bench.error_lengths):
            errors.append("Bench error lengths must be positive")
        needed = max(bench.error_lengths, default=0) * bench.windows
        if needed > bench.n:
            errors.append(f"Bench series length {bench.n} too short for {needed} error points")
        for rate in bench.label_rates or [bench.label_rate]:
            if not 0 <= rate <= 1:
                errors.append(f"Label rate must be in [0, 1], got {rate}")
        for order in bench.orders or [bench.order]:
            if not 1 <= order <= 8:
                errors.append(f"Order must be in [1, 8], got {order}")
            if order >= bench.n:
                errors.append(f"Bench series length {bench.n} must exceed order {order}")

        return errors
