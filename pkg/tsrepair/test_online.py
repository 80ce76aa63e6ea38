"""Tests for the closed-form and streaming IMR(1) repairs."""

import numpy as np
import pytest

from tsrepair.core.config import RepairConfig
from tsrepair.core.engine import imr_repair
from tsrepair.core.exceptions import DegenerateLabels, InputError, NoFixpoint
from tsrepair.core.models import LabeledSeries, TimeSeries
from tsrepair.core.online import (
    OnlinePrefixModel,
    OnlineRepairer,
    check_bound_condition,
    multi_segment_phi,
    phi_single,
    repair_multi_segment,
    repair_multi_segment_detailed,
    repair_single,
)


def _prefix_instances(count, seed=0):
    """Random series whose first ell points are labeled and satisfy the bound check."""
    rng = np.random.default_rng(seed)
    found = []
    while len(found) < count:
        n = int(rng.integers(12, 25))
        ell = int(rng.integers(3, 8))
        x = rng.normal(0, 1, n)
        z = np.cumsum(rng.normal(0, 1, ell)) * 0.5
        labels = LabeledSeries({t: float(x[t - 1] + z[t - 1]) for t in range(1, ell + 1)})
        series = TimeSeries(x)
        if not check_bound_condition(series, labels, ell):
            continue
        # keep the iterative reference well conditioned
        if abs(z[-1]) < 1e-3 or np.sum(z[:-1] ** 2) < 0.2:
            continue
        if abs(phi_single(series, labels, ell)) > 0.8:
            continue
        found.append((series, labels, ell))
    return found


def test_phi_single_by_hand():
    x = TimeSeries.of([0.0, 0.0, 0.0, 5.0])
    labels = LabeledSeries({1: 1.0, 2: 0.5, 3: 0.5})
    # cross = 1*0.5 + 0.5*0.5, square = 1 + 0.25
    assert phi_single(x, labels, 3) == pytest.approx(0.75 / 1.25)
    assert check_bound_condition(x, labels, 3)


def test_repair_single_propagates():
    x = TimeSeries.of([0.0, 0.0, 10.0, 20.0])
    labels = LabeledSeries({1: 2.0, 2: 1.0})
    model = OnlinePrefixModel.fit(x, labels, 2)
    assert model.phi1 == pytest.approx(0.5)
    np.testing.assert_allclose(repair_single(x, model), [2.0, 1.0, 10.5, 20.25])


def test_prefix_must_be_labeled():
    x = TimeSeries.of([0.0, 0.0, 0.0])
    with pytest.raises(InputError):
        phi_single(x, LabeledSeries({1: 1.0, 3: 1.0}), 2)
    with pytest.raises(InputError):
        phi_single(x, LabeledSeries({1: 1.0}), 1)


def test_zero_prefix_is_degenerate():
    x = TimeSeries.of([1.0, 2.0, 3.0])
    with pytest.raises(DegenerateLabels):
        phi_single(x, LabeledSeries({1: 1.0, 2: 2.0}), 2)


def test_bounded_parameter_and_closed_form_match_iterative():
    for x, labels, ell in _prefix_instances(100):
        closed = repair_single(x, OnlinePrefixModel.fit(x, labels, ell))
        result = imr_repair(x, labels, RepairConfig(order=1, tau=1e-6, backend="incremental"))
        assert result.converged
        assert all(abs(phi[0]) < 1 for phi in result.phi_trace)
        np.testing.assert_allclose(result.final, closed, rtol=0, atol=1e-3)


def test_streaming_matches_batch():
    for x, labels, ell in _prefix_instances(20, seed=9):
        repairer = OnlineRepairer()
        out = []
        for t in range(1, x.n + 1):
            if t <= ell:
                out.append(repairer.extend_labeled(x.at(t), labels.labels[t]))
            else:
                out.append(repairer.extend(x.at(t)))
        batch = repair_single(x, OnlinePrefixModel.fit(x, labels, ell))
        np.testing.assert_array_equal(out, batch)
        assert repairer.ell == ell
        assert repairer.frozen
        assert repairer.phi1 == phi_single(x, labels, ell)
        assert repairer.bound_condition


def test_streaming_freezes_prefix():
    repairer = OnlineRepairer()
    repairer.extend_labeled(0.0, 1.0)
    repairer.extend_labeled(0.0, 0.5)
    assert not repairer.frozen
    assert repairer.extend(3.0) == pytest.approx(3.25)
    with pytest.raises(InputError):
        repairer.extend_labeled(0.0, 1.0)


def test_streaming_needs_two_labels():
    repairer = OnlineRepairer()
    repairer.extend_labeled(0.0, 1.0)
    with pytest.raises(InputError):
        repairer.extend(1.0)


def test_streaming_model_snapshot():
    repairer = OnlineRepairer()
    for x_t, y_t in [(0.0, 1.0), (0.0, 0.5), (1.0, 1.25)]:
        repairer.extend_labeled(x_t, y_t)
    model = repairer.model()
    assert model.ell == 3
    assert model.z_ell == 0.25
    assert model.prefix == (1.0, 0.5, 1.25)


def test_two_segment_fixpoint():
    x = TimeSeries.of([0.0] * 8)
    labels = LabeledSeries({1: 1.0, 2: 0.8, 3: 0.6, 6: 0.3})
    fit = multi_segment_phi(x, labels)
    assert fit.phi == pytest.approx(0.7832, abs=1e-3)
    assert fit.residual < 1e-8
    phi = fit.phi
    # the fixpoint satisfies phi = (Wc + phi^2 * 0.6 * 0.3) / (Ws + (phi^2 * 0.6)^2)
    implied = (1.28 + phi**2 * 0.18) / (1.64 + (phi**2 * 0.6) ** 2)
    assert phi == pytest.approx(implied, abs=1e-8)

    y = repair_multi_segment(x, labels)
    np.testing.assert_allclose(
        y, [1.0, 0.8, 0.6, phi * 0.6, phi**2 * 0.6, 0.3, phi * 0.3, phi**2 * 0.3], atol=1e-12
    )


def test_two_segment_repair_matches_iterative_engine():
    rng = np.random.default_rng(17)
    compared = 0
    for _ in range(50):
        x = rng.normal(0, 1, 8)
        head = rng.normal(0, 1)
        diffs = [head, 0.7 * head + rng.normal(0, 0.2)]
        diffs += [0.7 * diffs[-1] + rng.normal(0, 0.2), rng.normal(0, 0.5)]
        labels = LabeledSeries({t: float(x[t - 1] + d) for t, d in zip((1, 2, 3, 6), diffs)})
        series = TimeSeries(x)
        try:
            outcome = repair_multi_segment_detailed(series, labels)
        except NoFixpoint:
            continue
        if abs(outcome.fit.phi) >= 1.0:
            continue
        result = imr_repair(series, labels, RepairConfig(order=1, tau=1e-6, max_iterations=20000))
        if not result.converged:
            continue
        np.testing.assert_allclose(outcome.values, result.final, rtol=0, atol=1e-3)
        compared += 1
    assert compared >= 25


def test_single_segment_equals_prefix_repair():
    for x, labels, ell in _prefix_instances(20, seed=4):
        multi = repair_multi_segment(x, labels)
        single = repair_single(x, OnlinePrefixModel.fit(x, labels, ell))
        np.testing.assert_array_equal(multi, single)


def test_points_before_first_label_are_kept():
    x = TimeSeries.of([5.0, 6.0, 0.0, 0.0, 0.0])
    y = repair_multi_segment(x, LabeledSeries({3: 1.0, 4: 0.5}))
    np.testing.assert_allclose(y, [5.0, 6.0, 1.0, 0.5, 0.25])


def test_all_labeled_needs_no_solve():
    x = TimeSeries.of([0.0, 0.0, 0.0])
    outcome = repair_multi_segment_detailed(x, LabeledSeries({1: 1.0, 2: 1.0, 3: 1.0}))
    assert outcome.fit is None
    np.testing.assert_array_equal(outcome.values, [1.0, 1.0, 1.0])


def test_multi_segment_degenerate():
    x = TimeSeries.of([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(DegenerateLabels):
        repair_multi_segment(x, LabeledSeries({1: 1.0, 2: 2.0}))
    with pytest.raises(DegenerateLabels):
        repair_multi_segment(x, LabeledSeries())


def test_multi_segment_step_cap():
    x = TimeSeries.of([0.0] * 8)
    labels = LabeledSeries({1: 1.0, 2: 0.8, 3: 0.6, 6: 0.3})
    with pytest.raises(NoFixpoint):
        multi_segment_phi(x, labels, tol=1e-15, max_steps=2)
