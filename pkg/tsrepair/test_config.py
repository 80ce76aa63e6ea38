"""Tests for configuration loading and schema validation."""

from pathlib import Path

import pytest
import yaml

from tsrepair.core.config import (
    DEFAULT_SEED,
    SEED_ENV_VAR,
    BenchConfig,
    ConfigLoader,
    OnlineConfig,
    RepairConfig,
    SmootherConfig,
    ToolkitConfig,
    resolve_seed,
)
from tsrepair.core.exceptions import InputError
from tsrepair.core.schemas import (
    ScenarioSchema,
    validate_config_dict,
    validate_report,
    validate_scenario,
)

CONFIG_DIR = Path(__file__).parent / "config"


def test_defaults():
    config = ConfigLoader.get_default()
    assert config.seed == DEFAULT_SEED
    assert config.repair.order == 1
    assert config.repair.tau == 0.1
    assert config.repair.backend == "incremental"
    assert config.smoother.alpha == 0.5
    assert ConfigLoader.validate(config) == []


def test_shipped_default_matches_code_defaults():
    loaded = ConfigLoader.load(CONFIG_DIR / "default.yaml")
    assert loaded.to_dict() == ToolkitConfig().to_dict()


def test_save_and_load(tmp_path):
    config = ToolkitConfig(seed=7, repair=RepairConfig(order=3, tau=0.5))
    path = tmp_path / "nested" / "config.yaml"
    ConfigLoader.save(config, path)
    loaded = ConfigLoader.load(path)
    assert loaded.seed == 7
    assert loaded.repair.order == 3
    assert loaded.compute_hash() == config.compute_hash()


def test_partial_file_keeps_defaults(tmp_path):
    path = tmp_path / "partial.yaml"
    path.write_text(yaml.safe_dump({"version": "0.1.0", "repair": {"tau": 0.2}}))
    loaded = ConfigLoader.load(path)
    assert loaded.repair.tau == 0.2
    assert loaded.repair.order == 1
    assert loaded.bench.repetitions == 5


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        ConfigLoader.load("does/not/exist.yaml")


def test_bad_values_raise_input_error(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump({"repair": {"order": 12}}))
    with pytest.raises(InputError):
        ConfigLoader.load(path)
    path.write_text(yaml.safe_dump({"seed": -1}))
    with pytest.raises(InputError):
        ConfigLoader.load(path)


@pytest.mark.parametrize(
    "text",
    [
        "repair: [unclosed\n",
        "repair:\n  order: one\n",
        "repair: 5\n",
        "- repair\n- smoother\n",
        "smoother:\n  alpha: high\n",
        "online:\n  damping: 1.5\n",
        "repair:\n  lag: 2\n",
    ],
)
def test_malformed_file_raises_input_error(tmp_path, text):
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    with pytest.raises(InputError):
        ConfigLoader.load(path)


def test_empty_sections_keep_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("repair:\nsmoother:\n  window:\n")
    loaded = ConfigLoader.load(path)
    assert loaded.repair.order == 1
    assert loaded.smoother.window == 3


def test_compute_hash_changes_with_content():
    a = ToolkitConfig()
    b = ToolkitConfig(repair=RepairConfig(tau=0.2))
    assert a.compute_hash() == ToolkitConfig().compute_hash()
    assert a.compute_hash() != b.compute_hash()
    assert len(a.compute_hash()) == 16


@pytest.mark.parametrize(
    "factory",
    [
        lambda: RepairConfig(order=0),
        lambda: RepairConfig(tau=-1.0),
        lambda: RepairConfig(max_iterations=0),
        lambda: RepairConfig(backend="sparse"),
        lambda: SmootherConfig(alpha=0.0),
        lambda: SmootherConfig(window=0),
        lambda: OnlineConfig(tol=0.0),
        lambda: OnlineConfig(damping=1.0),
    ],
)
def test_dataclass_validation(factory):
    with pytest.raises(InputError):
        factory()


def test_validate_reports_bench_problems():
    config = ToolkitConfig(bench=BenchConfig(n=40, error_lengths=[50]))
    errors = ConfigLoader.validate(config)
    assert errors


def test_resolve_seed(monkeypatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    assert resolve_seed(None, 5) == 5
    monkeypatch.setenv(SEED_ENV_VAR, "42")
    assert resolve_seed(None, 5) == 42
    assert resolve_seed(3, 5) == 3
    monkeypatch.setenv(SEED_ENV_VAR, "abc")
    with pytest.raises(InputError):
        resolve_seed(None, 5)


def test_bench_grid_order():
    bench = BenchConfig(taus=[0.1, 0.2], orders=[1, 2])
    assert list(bench.grid()) == [
        (1, 0.1, 0.2, 100000),
        (1, 0.2, 0.2, 100000),
        (2, 0.1, 0.2, 100000),
        (2, 0.2, 0.2, 100000),
    ]


@pytest.mark.parametrize("name", ["bench_smoke.yaml", "bench_trend.yaml", "bench_sweep.yaml"])
def test_shipped_scenarios_validate(name):
    with open(CONFIG_DIR / name) as f:
        validate_scenario(yaml.safe_load(f))


def test_scenario_rejects_unknown_fields_and_methods():
    with pytest.raises(InputError):
        validate_scenario({"methods": ["imr", "kalman"]})
    with pytest.raises(InputError, match="imr-static"):
        validate_scenario({"methods": ["imr", "imr-static"]})
    with pytest.raises(InputError):
        validate_scenario({"reps": 3})
    with pytest.raises(InputError):
        validate_scenario({"kind": "spike", "error_lengths": [1, 5]})
    with pytest.raises(InputError):
        validate_scenario({"n": 100, "error_lengths": [60], "windows": 2})


def test_scenario_defaults():
    scenario = ScenarioSchema()
    assert scenario.methods == ["imr", "arx", "ewma"]
    assert scenario.timing is False


def test_report_schema():
    validate_report({"method": "imr", "wall_ms": 1.0, "rms": 0.1, "extra_field": [1, 2]})
    with pytest.raises(InputError):
        validate_report({"method": "imr"})
    with pytest.raises(InputError):
        validate_report({"method": "imr", "wall_ms": 1.0, "rms": -1.0})


def test_config_schema_version():
    with pytest.raises(InputError):
        validate_config_dict({"version": "1"})
