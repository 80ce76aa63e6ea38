"""Tests for the benchmark harness."""

from pathlib import Path

import pandas as pd
import pytest

from tsrepair.adapters.bench import (
    COLUMNS,
    BenchCell,
    _cell_seeds,
    load_scenario,
    run_bench,
    run_cell,
    summarize,
    write_table,
)
from tsrepair.core.config import BenchConfig, SmootherConfig
from tsrepair.core.exceptions import InputError

CONFIG_DIR = Path(__file__).parent / "config"


def _small(**changes):
    base = dict(methods=["imr", "arx", "ewma"], error_lengths=[2, 6], repetitions=2, n=120)
    base.update(changes)
    return BenchConfig(**base)


def test_single_cell_row():
    table = run_bench(BenchConfig(methods=["imr"], error_lengths=[5], repetitions=1, n=200), seed=1)
    assert len(table) == 1
    assert list(table.columns) == COLUMNS
    row = table.iloc[0]
    assert row["method"] == "imr"
    assert row["error_length"] == 5
    assert row["rms"] >= 0


def test_timing_adds_seconds_column():
    table = run_bench(_small(timing=True), seed=3)
    assert list(table.columns) == COLUMNS + ["seconds"]
    assert (table["seconds"] >= 0).all()


def test_row_order_is_fixed():
    table = run_bench(_small(), seed=3)
    assert len(table) == 3 * 2 * 2
    assert list(table["method"][:3]) == ["imr", "arx", "ewma"]
    assert list(table["error_length"]) == [2] * 6 + [6] * 6
    assert list(table["rep"][:6]) == [0, 0, 0, 1, 1, 1]


def test_parallel_matches_sequential():
    sequential = run_bench(_small(workers=1), seed=11)
    parallel = run_bench(_small(workers=2), seed=11)
    pd.testing.assert_frame_equal(sequential, parallel)


def test_same_seed_same_table_other_seed_differs():
    a = run_bench(_small(), seed=5)
    b = run_bench(_small(), seed=5)
    c = run_bench(_small(), seed=6)
    pd.testing.assert_frame_equal(a, b)
    assert not a["rms"].equals(c["rms"])


def test_methods_share_cell_data():
    # a cell carries one dirty series; ewma at alpha 1 leaves it untouched, so
    # its rms is the same for every ewma entry in a repeated cell
    config = BenchConfig(methods=["ewma", "ewma"], error_lengths=[4], repetitions=1, n=100)
    rows = run_cell(BenchCell(0, 4, 0, 9, config, SmootherConfig(alpha=1.0)))
    assert rows[0]["rms"] == rows[1]["rms"]
    assert rows[0]["rms"] > 0


def test_rows_count_changed_points():
    config = BenchConfig(methods=["ewma", "sma", "imr"], error_lengths=[5], repetitions=1, n=100)
    identity, smoothed, imr = run_cell(BenchCell(0, 5, 0, 9, config, SmootherConfig(alpha=1.0)))
    assert identity["changed"] == identity["changed_clean"] == 0
    # a moving average also moves the clean points
    assert smoothed["changed_clean"] > 0
    assert smoothed["changed"] - smoothed["changed_clean"] <= 5
    assert 0 <= imr["changed_clean"] <= imr["changed"]


def test_cell_seeds_are_distinct():
    seeds = {tuple(_cell_seeds(1, length, rep)) for length in (1, 10) for rep in range(3)}
    assert len(seeds) == 6
    assert _cell_seeds(1, 10, 2) == _cell_seeds(1, 10, 2)


def test_sweep_grid_rows():
    config = _small(
        methods=["imr"], error_lengths=[3], repetitions=1, taus=[0.1, 0.5], orders=[1, 2]
    )
    table = run_bench(config, seed=2)
    assert len(table) == 4
    assert list(zip(table["order"], table["tau"])) == [(1, 0.1), (1, 0.5), (2, 0.1), (2, 0.5)]


def test_summarize_medians():
    table = pd.DataFrame(
        {
            "method": ["imr", "imr", "imr", "ewma"],
            "error_length": [5, 5, 5, 5],
            "rms": [0.1, 0.3, 0.2, 1.0],
        }
    )
    assert summarize(table) == [
        {"method": "imr", "error_length": 5, "median_rms": pytest.approx(0.2)},
        {"method": "ewma", "error_length": 5, "median_rms": 1.0},
    ]


def test_write_table(tmp_path):
    table = run_bench(BenchConfig(methods=["ewma"], error_lengths=[1], repetitions=1, n=50), seed=1)
    path = write_table(tmp_path / "out" / "bench.csv", table)
    text = path.read_text()
    assert text.startswith(",".join(COLUMNS) + "\n")
    assert "\r" not in text


def test_load_scenario(tmp_path):
    config, seed = load_scenario(CONFIG_DIR / "bench_sweep.yaml")
    assert seed == 7
    assert config.orders == [1, 2, 3]
    assert config.windows == 2

    bare = tmp_path / "bare.yaml"
    bare.write_text("methods: [imr]\n")
    config, seed = load_scenario(bare)
    assert seed is None
    assert config.error_lengths == [1, 10, 50]


def test_load_scenario_errors(tmp_path):
    with pytest.raises(InputError):
        load_scenario(tmp_path / "absent.yaml")
    listed = tmp_path / "list.yaml"
    listed.write_text("- imr\n")
    with pytest.raises(InputError):
        load_scenario(listed)


@pytest.mark.slow
def test_long_errors_favour_imr():
    config, seed = load_scenario(CONFIG_DIR / "bench_trend.yaml")
    medians = {row["method"]: row["median_rms"] for row in summarize(run_bench(config, seed))}
    assert medians["imr"] < medians["arx"] < medians["ewma"]
