"""Tests for medium parameters, normalization and the dark state."""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from config import (
    DEFAULT_MEDIUM,
    MediumParams,
    ParameterError,
    dark_state,
    number_density,
    validate,
)


def test_defaults_are_normalized():
    params = validate(DEFAULT_MEDIUM)
    assert params is DEFAULT_MEDIUM
    assert params.gamma_total == pytest.approx(1.0, abs=1e-12)
    assert params.density == 0.01
    assert params.lambda0 == 795e-9


def test_rescales_rates_to_unit_total():
    raw = MediumParams(gamma31=2.0, gamma32=2.0, gamma34=2.0, gamma_dec=3.0, omega_c_mag=12.0)
    params = validate(raw)
    assert params.gamma_total == pytest.approx(1.0)
    assert params.gamma_dec == pytest.approx(0.5)
    assert params.omega_c_mag == pytest.approx(2.0)
    assert params.density == raw.density


@pytest.mark.parametrize(
    ("changes", "field"),
    [
        ({"gamma34": -0.1}, "gamma34"),
        ({"lambda0": 0.0}, "lambda0"),
        ({"polarization": "up"}, "polarization"),
        ({"density": -1.0}, "density"),
        ({"gamma_dec": float("nan")}, "gamma_dec"),
    ],
)
def test_rejects_invalid_fields(changes, field):
    with pytest.raises(ParameterError) as err:
        validate(replace(DEFAULT_MEDIUM, **changes))
    assert err.value.field == field
    assert field in str(err.value)


def test_negative_phases_are_allowed():
    params = validate(replace(DEFAULT_MEDIUM, phi1=-1.0, phi2=-2.0, phi_c=-3.0))
    assert params.phi0 == pytest.approx(-2.0 + 1.0 - 3.0)


def test_number_density():
    n = number_density(0.01, 795e-9)
    assert n * 1e-6 == pytest.approx(7.9e11, rel=0.02)
    assert number_density(0.0, 1e-6) == 0.0
    assert number_density(1.0, 1e-6) == pytest.approx(4 * math.pi**2 / 1e-18)
    assert number_density(0.02, 795e-9) == pytest.approx(2 * n)
    assert number_density(0.01, 2 * 795e-9) == pytest.approx(n / 8)
    with pytest.raises(ParameterError):
        number_density(0.01, 0.0)


def test_dark_state_equal_fields():
    dark = dark_state(0.01, 0.01)
    assert (dark.rho11, dark.rho44) == pytest.approx((0.5, 0.5))
    assert dark.rho41 == pytest.approx(-0.5)


def test_dark_state_limits_and_ratios():
    dark = dark_state(0.0, 0.3)
    assert (dark.rho11, dark.rho44, dark.rho41) == (1.0, 0.0, 0.0)

    dark = dark_state(1.0, 2.0)
    assert dark.rho11 == pytest.approx(0.8)
    assert dark.rho44 == pytest.approx(0.2)
    assert dark.rho41 == pytest.approx(-0.4)

    with pytest.raises(ParameterError):
        dark_state(0.0, 0.0)


def test_dark_state_is_pure_and_phase_covariant(rng):
    for _ in range(20):
        o1 = complex(*rng.normal(size=2))
        o2 = complex(*rng.normal(size=2))
        dark = dark_state(o1, o2)
        assert dark.rho11 + dark.rho44 == pytest.approx(1.0, abs=1e-15)
        assert abs(dark.rho41) ** 2 == pytest.approx(dark.rho11 * dark.rho44, rel=1e-12)
        turn = np.exp(1j * rng.uniform(-np.pi, np.pi))
        rotated = dark_state(o1 * turn, o2 * turn)
        assert rotated.rho44 == pytest.approx(dark.rho44, rel=1e-12)
        assert rotated.rho41 == pytest.approx(dark.rho41, rel=1e-12)


def test_density_matrix_is_a_unit_trace_projector():
    rho = dark_state(0.01, 0.02).density_matrix()
    assert np.trace(rho).real == pytest.approx(1.0)
    np.testing.assert_allclose(rho, rho.conj().T)
    np.testing.assert_allclose(rho @ rho, rho, atol=1e-15)


def test_derived_units(medium):
    assert medium.omega0 == pytest.approx(6.285e7, rel=1e-3)
    assert medium.k0 == medium.omega0
    assert medium.response_scale == pytest.approx(0.01)
    assert medium.sign == 1
    assert replace(medium, polarization="right").sign == -1
    assert medium.phi0 == pytest.approx(math.pi / 2)
    assert medium.control_field(0.0) == pytest.approx(2.0)
