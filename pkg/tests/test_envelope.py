"""Tests for envelope grids, phase schedules and pulse metrics."""
from __future__ import annotations

import math

import numpy as np
import pytest

from envelope import EnvelopeGrid, PhaseSchedule, Snapshot, gaussian_pulse, pulse_metrics


def test_grid_defaults_and_properties():
    grid = EnvelopeGrid(0.5 * np.arange(8), np.ones(8), np.zeros(8))
    assert grid.n == 8
    assert grid.d_tau == 0.5
    assert grid.omega_c.dtype == complex and not grid.omega_c.any()
    assert grid.z == 0.0
    assert grid.is_finite()


@pytest.mark.parametrize(
    "tau",
    [
        np.array([0.0]),
        np.array([0.0, 1.0, 3.0]),
        np.array([2.0, 1.0, 0.0]),
    ],
)
def test_grid_rejects_bad_tau(tau):
    with pytest.raises(ValueError):
        EnvelopeGrid(tau, np.zeros(len(tau)), np.zeros(len(tau)))


def test_grid_rejects_shape_mismatch():
    with pytest.raises(ValueError, match="omega_b"):
        EnvelopeGrid(np.arange(4.0), np.zeros(4), np.zeros(3))


def test_copy_and_evolve_do_not_alias():
    grid = EnvelopeGrid(np.arange(4.0), np.ones(4), np.ones(4), z=1.0)
    clone = grid.copy()
    clone.omega_e[0] = 5.0
    assert grid.omega_e[0] == 1.0
    moved = grid.evolve(np.zeros(4), np.zeros(4), 2.0)
    assert moved.z == 2.0 and moved.tau is grid.tau
    assert grid.omega_e[1] == 1.0


def test_non_finite_grid_is_flagged():
    grid = EnvelopeGrid(np.arange(4.0), [1, np.nan, 0, 0], np.zeros(4))
    assert not grid.is_finite()


def test_gaussian_pulse_is_a_vacuum_eigenvector():
    tau = np.linspace(0, 100, 201)
    omega_e, omega_b = gaussian_pulse(tau, 50.0, 8.0, 2e-9, 1, 7.3e-3)
    assert abs(omega_e[100]) == pytest.approx(2e-9)
    assert np.all(omega_e.imag == 0)
    grid = EnvelopeGrid(tau, omega_e, omega_b)
    assert grid.chirality_residual(1, 7.3e-3) == 0.0
    assert grid.chirality_residual(-1, 7.3e-3) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        gaussian_pulse(tau, 50.0, 0.0, 1.0, 1, 7.3e-3)


def test_gaussian_metrics():
    tau = 0.25 * np.arange(1024)
    sigma, amplitude = 12.0, 3e-9
    omega_e, omega_b = gaussian_pulse(tau, 128.0, sigma, amplitude, 1, 7.3e-3)
    metrics = pulse_metrics(EnvelopeGrid(tau, omega_e, omega_b, z=0.5))
    assert metrics["z"] == 0.5
    assert metrics["peak"] == pytest.approx(amplitude)
    assert metrics["centroid"] == pytest.approx(128.0, rel=1e-12)
    assert metrics["phase"] == 0.0
    # integral of A^2 exp(-t^2 / sigma^2)
    assert metrics["energy"] == pytest.approx(amplitude**2 * sigma * math.sqrt(math.pi), rel=1e-10)


def test_phase_is_unwrapped_through_the_pulse():
    tau = 0.1 * np.arange(2000)
    chirped = np.exp(-((tau - 100) ** 2) / 200) * np.exp(1j * 0.05 * (tau - 80) ** 2)
    metrics = pulse_metrics(EnvelopeGrid(tau, chirped, np.zeros_like(chirped)))
    # 0.05 * 20^2 = 20 rad, well past one turn
    assert metrics["phase"] == pytest.approx(20.0 - 2 * math.pi * 3, abs=1e-9)


def test_zero_envelope_has_no_metrics():
    with pytest.raises(ValueError, match="all-zero"):
        pulse_metrics(EnvelopeGrid(np.arange(4.0), np.zeros(4), np.zeros(4)))


def test_snapshot_keeps_a_private_copy(small_pulse):
    snap = Snapshot(z=0.0, grid=small_pulse)
    small_pulse.omega_e[:] = 0
    assert snap.grid.omega_e.any()
    assert snap.metrics["centroid"] == pytest.approx(50.0, rel=1e-9)


def test_constant_schedule():
    schedule = PhaseSchedule.constant(math.pi / 2)
    assert schedule.is_constant
    assert schedule(-100.0) == schedule(1e6) == math.pi / 2
    assert schedule(np.array([0.0, 1.0])).shape == (2,)


def test_switching_schedule():
    schedule = PhaseSchedule(((0.0, math.pi / 2), (400.0, 0.0), (800.0, math.pi / 2)), ramp=5.0)
    assert not schedule.is_constant
    t = np.array([0.0, 399.0, 400.0, 402.5, 405.0, 600.0, 805.0, 1e4])
    values = schedule(t)
    np.testing.assert_allclose(values, [math.pi / 2, math.pi / 2, math.pi / 2, math.pi / 4, 0.0, 0.0,
                                        math.pi / 2, math.pi / 2], atol=1e-15)
    ramp = schedule(np.linspace(400, 405, 51))
    assert np.all(np.diff(ramp) <= 0)


def test_sharp_switch():
    schedule = PhaseSchedule(((0.0, 0.0), (10.0, 1.0)), ramp=0.0)
    assert schedule(9.999) == 0.0
    assert schedule(10.0) == 1.0


@pytest.mark.parametrize(
    ("segments", "ramp"),
    [
        ((), 5.0),
        (((0.0, 4.0),), 5.0),
        (((0.0, -math.pi),), 5.0),
        (((0.0, 0.0), (0.0, 1.0)), 5.0),
        (((0.0, 0.0), (3.0, 1.0)), 5.0),
        (((0.0, 0.0),), -1.0),
    ],
)
def test_schedule_validation(segments, ramp):
    with pytest.raises(ValueError):
        PhaseSchedule(segments, ramp=ramp)


def test_pi_is_an_allowed_phase():
    assert PhaseSchedule.constant(math.pi)(0.0) == math.pi
