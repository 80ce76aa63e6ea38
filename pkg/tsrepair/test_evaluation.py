"""Tests for RMS, synthetic truth, error injection and label sampling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsrepair.core.config import ErrorSpec, LabelingPolicy
from tsrepair.core.evaluation import (
    changed_points,
    generate_truth,
    inject_errors,
    inject_many,
    place_windows,
    repair_summary,
    rms,
    sample_labels,
)
from tsrepair.core.exceptions import InputError
from tsrepair.core.models import TimeSeries


def test_rms_by_hand():
    assert rms([0.0, 0.0], [5.0, 0.0]) == pytest.approx(3.5355, abs=1e-4)
    assert rms([1.0, 2.0], [1.0, 2.0]) == 0.0
    with pytest.raises(InputError):
        rms([1.0], [1.0, 2.0])


def test_shift_with_zero_variance_is_exact():
    truth = TimeSeries.of([2.0] * 10)
    spec = ErrorSpec(kind="shift", start=5, length=4, amount=3.0, variance=0.0)
    dirty, mask = inject_errors(truth, spec)
    assert mask == frozenset({5, 6, 7, 8})
    np.testing.assert_array_equal(dirty.values[4:8], [5.0] * 4)
    np.testing.assert_array_equal(dirty.values[:4], truth.values[:4])
    np.testing.assert_array_equal(dirty.values[8:], truth.values[8:])


def test_shift_offsets_center_on_amount():
    length = 50
    truth = TimeSeries.of([0.0] * length)
    spec = ErrorSpec(kind="shift", start=1, length=length, amount=3.0, variance=0.1, seed=21)
    dirty, _ = inject_errors(truth, spec)
    offset = float(np.mean(dirty.values - truth.values))
    assert abs(offset - 3.0) <= 3 * math.sqrt(0.1 / length)


def test_innovational_decays():
    truth = TimeSeries.of([0.0] * 5)
    dirty, _ = inject_errors(
        truth,
        ErrorSpec(kind="innovational", start=1, length=3, amount=2.0, variance=0.0, decay=0.5),
    )
    np.testing.assert_allclose(dirty.values, [2.0, 1.0, 0.5, 0.0, 0.0])


def test_spike_is_length_one():
    with pytest.raises(InputError):
        ErrorSpec(kind="spike", length=2)
    truth = TimeSeries.of([0.0] * 3)
    _, mask = inject_errors(truth, ErrorSpec(kind="spike", start=2, variance=0.0))
    assert mask == frozenset({2})


def test_window_must_fit():
    with pytest.raises(InputError):
        inject_errors(TimeSeries.of([0.0] * 3), ErrorSpec(start=3, length=2))


def test_injection_is_deterministic():
    truth = generate_truth(200, "sensor", seed=3)
    spec = ErrorSpec(start=50, length=20, seed=99)
    first, _ = inject_errors(truth, spec)
    second, _ = inject_errors(truth, spec)
    np.testing.assert_array_equal(first.values, second.values)


def test_inject_many_accumulates_overlaps():
    truth = TimeSeries.of([0.0] * 6)
    specs = [
        ErrorSpec(start=1, length=3, amount=1.0, variance=0.0),
        ErrorSpec(start=3, length=2, amount=2.0, variance=0.0),
    ]
    dirty, mask = inject_many(truth, specs)
    np.testing.assert_array_equal(dirty.values, [1.0, 1.0, 3.0, 2.0, 0.0, 0.0])
    assert mask == frozenset({1, 2, 3, 4})


@given(
    n=st.integers(min_value=10, max_value=500),
    length=st.integers(min_value=1, max_value=20),
    count=st.integers(min_value=1, max_value=5),
    seed=st.integers(min_value=0, max_value=2**31),
)
@settings(max_examples=100)
def test_place_windows_do_not_overlap(n, length, count, seed):
    if count * length > n:
        with pytest.raises(InputError):
            place_windows(n, length, count, seed)
        return
    starts = place_windows(n, length, count, seed)
    assert len(starts) == count
    assert starts[0] >= 1
    assert starts[-1] + length - 1 <= n
    for a, b in zip(starts, starts[1:]):
        assert b >= a + length


def test_sample_labels_rates():
    truth = generate_truth(100, seed=1)
    everything = sample_labels(truth, None, LabelingPolicy(rate=1.0))
    assert everything.indices() == list(range(1, 101))
    assert everything.labels[7] == truth.at(7)
    assert len(sample_labels(truth, None, LabelingPolicy(rate=0.0))) == 0


def test_sample_labels_prefix_mode():
    truth = generate_truth(40, seed=1)
    labels = sample_labels(truth, None, LabelingPolicy(rate=0.25, mode="prefix"))
    assert labels.indices() == list(range(1, 11))


@pytest.mark.parametrize(
    "rate, n, expected", [(0.07, 100, 7), (0.14, 100, 14), (0.57, 100, 57), (0.015, 200, 3)]
)
def test_sample_labels_prefix_count_is_exact(rate, n, expected):
    labels = sample_labels(generate_truth(n, seed=1), None, LabelingPolicy(rate, mode="prefix"))
    assert labels.indices() == list(range(1, expected + 1))


def test_sample_labels_uniform_count():
    truth = generate_truth(1000, seed=4)
    labels = sample_labels(truth, None, LabelingPolicy(rate=0.2, seed=11))
    assert 160 <= len(labels) <= 240


def test_sample_labels_nested_across_rates():
    truth = generate_truth(300, seed=2)
    low = sample_labels(truth, None, LabelingPolicy(rate=0.1, seed=5))
    high = sample_labels(truth, None, LabelingPolicy(rate=0.3, seed=5))
    assert set(low.indices()) <= set(high.indices())


def test_labeling_policy_range():
    with pytest.raises(InputError):
        LabelingPolicy(rate=1.5)


@pytest.mark.parametrize("kind", ["sensor", "cyclic"])
def test_generate_truth_is_seeded(kind):
    a = generate_truth(400, kind, seed=11)
    b = generate_truth(400, kind, seed=11)
    c = generate_truth(400, kind, seed=12)
    np.testing.assert_array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert np.all(np.isfinite(a.values))


def test_generate_truth_shapes():
    sensor = generate_truth(3000, "sensor", seed=0)
    assert abs(float(np.mean(sensor.values)) - 20.0) < 2.0
    cyclic = generate_truth(730, "cyclic", seed=0)
    # one period apart the seasonal component repeats
    assert abs(float(np.mean(cyclic.values[:365] - cyclic.values[365:]))) < 0.2
    with pytest.raises(InputError):
        generate_truth(10, "weather")


def test_changed_points_and_summary():
    truth = [1.0, 2.0, 3.0, 4.0]
    dirty = [1.0, 5.0, 3.0, 4.0]
    repair = [1.5, 2.0, 3.0, 4.0]
    assert changed_points(dirty, repair) == 2
    summary = repair_summary(truth, dirty, repair, error_mask={2})
    assert summary.changed == 2
    assert summary.changed_clean == 1
    assert summary.rms == pytest.approx(math.sqrt(0.25 / 4))
