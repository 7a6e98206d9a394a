"""Tests for the Maxwell-Bloch z-march."""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from config import medium_dark_state
from dispersion import group_index, propagate_analytic
from envelope import EnvelopeGrid, PhaseSchedule, gaussian_pulse
from maxwell_bloch import MaxwellBlochSolver, PropagationError, SolverSettings, source_terms


def _solver(params, depth, dz, **kwargs):
    schedule = PhaseSchedule.constant(params.phi0)
    return MaxwellBlochSolver(params, schedule, SolverSettings(dz=dz, depth=depth, **kwargs))


def test_settings_validation():
    with pytest.raises(ValueError):
        SolverSettings(dz=0.0, depth=1.0)
    with pytest.raises(ValueError):
        SolverSettings(dz=0.1, depth=-1.0)
    with pytest.raises(ValueError, match="snapshot"):
        SolverSettings(dz=0.1, depth=1.0, snapshots=(2.0,))


def test_step_count():
    assert SolverSettings(dz=1e-5, depth=1e-4).steps == 10
    assert SolverSettings(dz=3e-5, depth=1e-4).steps == 4
    assert SolverSettings(dz=1.0, depth=0.0).steps == 0
    assert SolverSettings(dz=1.0, depth=1e-6).steps == 1


def test_control_field_carries_the_loop_phase(fig_medium):
    solver = _solver(fig_medium, 1e-4, 1e-5)
    omega_c = solver.control_field(np.linspace(0, 10, 5), 0.0)
    np.testing.assert_allclose(np.abs(omega_c), fig_medium.omega_c_mag)
    np.testing.assert_allclose(np.angle(omega_c), fig_medium.phi_c, atol=1e-14)


def test_source_terms(medium):
    params = medium
    params_states = np.zeros((3, 5, 5), dtype=complex)
    params_states[:, 2, 3] = 1e-6
    d_e, d_b, d_c = source_terms(params_states, params)
    half = params.k0 / 2 * params.response_scale
    np.testing.assert_allclose(d_e, half * 1j * 1e-6)
    np.testing.assert_allclose(d_b, half * params.sign * params.alpha_fs * 1e-6)
    assert not d_c.any()

    params_states[:, 2, 1] = 2e-6
    _, _, d_c = source_terms(params_states, params, control_source=True)
    np.testing.assert_allclose(d_c, params.k0 / 2 * 3 * params.density * params.gamma32 * 2e-6j)


def test_sources_preserve_circular_polarization(medium, rng):
    states = rng.normal(size=(4, 5, 5)) + 1j * rng.normal(size=(4, 5, 5))
    d_e, d_b, _ = source_terms(states, medium)
    residual = d_b / medium.alpha_fs + medium.sign * 1j * d_e
    assert np.max(np.abs(residual)) < 1e-12 * np.max(np.abs(d_e))


def test_empty_medium_leaves_pulse_unchanged(small_pulse, fig_medium):
    vacuum = replace(fig_medium, density=0.0)
    result = _solver(vacuum, 1e-4, 1e-5).run(small_pulse)
    assert result.steps == 10
    assert result.final.z == 1e-4
    np.testing.assert_array_equal(result.final.omega_e, small_pulse.omega_e)
    np.testing.assert_array_equal(result.final.omega_b, small_pulse.omega_b)


def test_zero_depth(small_pulse, fig_medium):
    result = _solver(fig_medium, 0.0, 1e-5).run(small_pulse)
    assert result.steps == 0
    assert len(result.snapshots) == 1 and len(result.metrics) == 1
    np.testing.assert_array_equal(result.final.omega_e, small_pulse.omega_e)


def test_matches_spectral_propagation(small_pulse, fig_medium):
    ng, _ = group_index(fig_medium, medium_dark_state(fig_medium))
    depth = 5 / ng
    result = _solver(fig_medium, depth, depth / 10, snapshots=(depth / 2,)).run(small_pulse)
    expected = propagate_analytic(small_pulse, fig_medium, None, depth, mode="full")

    peak = np.max(np.abs(expected.omega_e))
    window = np.abs(expected.omega_e) >= peak / 2
    error = np.abs(result.final.omega_e - expected.omega_e)[window]
    assert np.max(error) < 0.02 * peak

    assert [s.z for s in result.snapshots] == pytest.approx([0.0, depth / 2, depth])
    delay = result.metrics[-1]["centroid"] - result.metrics[0]["centroid"]
    assert delay == pytest.approx(5.0, rel=0.05)


def test_run_keeps_polarization_and_physical_states(small_pulse, fig_medium):
    ng, _ = group_index(fig_medium, medium_dark_state(fig_medium))
    result = _solver(fig_medium, 2 / ng, 0.5 / ng).run(small_pulse)
    assert result.final.chirality_residual(fig_medium.sign, fig_medium.alpha_fs) < 1e-9
    assert result.drift.within(1e-10, 1e-8)
    assert len(result.metrics) == result.steps + 1 == 5


def test_oversized_step_is_rejected(small_pulse, fig_medium):
    solver = _solver(fig_medium, 1.0, 1.0)
    with pytest.raises(PropagationError, match="step too large") as err:
        solver.field_step(solver.prepare(small_pulse), 1.0)
    assert err.value.z == 0.0


def test_non_finite_envelope_is_reported(small_pulse, fig_medium):
    solver = _solver(fig_medium, 1e-5, 1e-6)
    grid = solver.prepare(small_pulse)
    states = solver.atomic_states(grid)
    states[300] = np.nan
    with pytest.raises(PropagationError, match="non-finite") as err:
        solver.field_step(grid, 1e-6, states)
    assert err.value.tau_index is not None
    assert err.value.z == pytest.approx(1e-6)


def test_error_message_names_the_location():
    err = PropagationError("boom", 1.5e-4, 17)
    assert "z=1.500000e-04" in str(err) and "tau index 17" in str(err)
    assert math.isclose(err.z, 1.5e-4)


def _fig_pulse(params, n_tau, d_tau):
    tau = d_tau * np.arange(n_tau)
    omega_e, omega_b = gaussian_pulse(tau, 200.0, 50.0, 1e-9, params.sign, params.alpha_fs)
    return EnvelopeGrid(tau, omega_e, omega_b)


def test_refining_both_grids_barely_moves_the_metrics(fig_medium):
    ng, _ = group_index(fig_medium, medium_dark_state(fig_medium))
    depth = 25 / ng
    coarse = _solver(fig_medium, depth, depth / 100).run(_fig_pulse(fig_medium, 1024, 0.8))
    fine = _solver(fig_medium, depth, depth / 200).run(_fig_pulse(fig_medium, 2048, 0.4))
    assert (coarse.steps, fine.steps) == (100, 200)

    a, b = coarse.metrics[-1], fine.metrics[-1]
    delay_a = a["centroid"] - coarse.metrics[0]["centroid"]
    delay_b = b["centroid"] - fine.metrics[0]["centroid"]
    assert abs(a["peak"] / b["peak"] - 1) < 0.005
    assert abs(a["energy"] / b["energy"] - 1) < 0.005
    assert abs(delay_a / delay_b - 1) < 0.005
    assert abs(a["phase"] - b["phase"]) < 0.005 * abs(b["phase"])


def test_field_step_is_second_order_in_dz(small_pulse, fig_medium):
    ng, _ = group_index(fig_medium, medium_dark_state(fig_medium))
    depth = 2 / ng

    def final(steps):
        return _solver(fig_medium, depth, depth / steps).run(small_pulse).final.omega_e

    reference = final(64)
    coarse = np.max(np.abs(final(4) - reference))
    fine = np.max(np.abs(final(8) - reference))
    assert coarse > 0
    assert 3.0 < coarse / fine < 5.0
