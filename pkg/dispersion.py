"""Chiral refractive index, SVEA eigenvalue and Fourier-space propagation.

Sign convention: s = +1 for left circular polarization (upper signs), -1 for
right. Envelopes are expanded as sum_dp F(dp) exp(-i dp tau); a spectral
component picks up exp(i k0 eta z) over a depth z. In the retarded frame the
vacuum term dp/omega0 of eta is absorbed, so only the medium part is applied.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from config import POLARIZATIONS, SPEED_OF_LIGHT, DarkState, MediumParams, ParameterError, medium_dark_state
from envelope import EnvelopeGrid
from linear_response import ResponseCoefficients, SingularResponseError, response_coefficients
from types_ import AnalyticMode, Polarization

VACUUM_TOL = 1e-9            # |Omega_B/alpha + s i Omega_E| / max|Omega_E|

BETA_COLUMNS = ["phi0", "Re_beta", "Im_beta"]
INDEX_COLUMNS = ["dp", "Re_n", "Im_n", "Re_eta", "Im_eta"]


class PhaseRelationError(ValueError):
    """Input envelopes are not a circularly polarized vacuum eigenvector."""


def handedness(pol: Polarization) -> int:
    if pol not in POLARIZATIONS:
        raise ParameterError("polarization", f"expected one of {', '.join(POLARIZATIONS)}, got {pol!r}")
    return 1 if pol == "left" else -1


def medium_eta(resp: ResponseCoefficients, pol: Polarization, linearized: bool = False):
    """Medium part of the eigenvalue, eta - dp/omega0.

    The linearized form keeps only first-order terms in the coefficients,
    which makes 1 + medium_eta identical to n_linear.
    """
    s = handedness(pol)
    chirality = -s * 0.5j * (resp.xi_eh - resp.xi_he)
    if linearized:
        return (resp.chi_e + resp.chi_h) / 2 + chirality
    mu = resp.mu
    if np.any(mu == 0):
        raise SingularResponseError("mu = 1 + chiH vanishes")
    return (resp.chi_e * mu + resp.chi_h - resp.xi_eh * resp.xi_he) / (2 * mu) + chirality / mu


def eta(resp: ResponseCoefficients, dp, pol: Polarization, omega0: float, linearized: bool = False):
    """SVEA eigenvalue eta(dp) including the vacuum dispersion dp/omega0."""
    return np.asarray(dp) / omega0 + medium_eta(resp, pol, linearized)


def n_exact(resp: ResponseCoefficients, pol: Polarization):
    """Chiral index with the principal square-root branch (Re >= 0)."""
    s = handedness(pol)
    root = np.sqrt(resp.epsilon * resp.mu - (resp.xi_eh + resp.xi_he) ** 2 / 4 + 0j)
    return root - s * 0.5j * (resp.xi_eh - resp.xi_he)


def n_linear(resp: ResponseCoefficients, pol: Polarization):
    s = handedness(pol)
    return 1 + (resp.chi_e + resp.chi_h) / 2 - s * 0.5j * (resp.xi_eh - resp.xi_he)


def group_index(params: MediumParams, dark: DarkState) -> tuple[float, float]:
    """(ng, vg) with vg in m/s; the carrier frequency stands in for omega."""
    if params.omega_c_mag == 0:
        raise ParameterError("omega_c_mag", "group index needs a non-zero control field")
    ng = params.response_scale * params.omega0 * dark.rho44 / params.omega_c_mag**2
    return ng, SPEED_OF_LIGHT / (1 + ng)


def beta(params: MediumParams, dark: DarkState, phi0: float | None = None,
         pol: Polarization | None = None) -> complex:
    """Medium eigenvalue at resonance: Re winds the envelope phase, -Im is gain.

    gamma21 is neglected. The coherence rho41 enters as -|rho41|; its phase is
    part of phi0.
    """
    if phi0 is None:
        phi0 = params.phi0
    s = handedness(pol or params.polarization)
    omega_c = params.omega_c_mag
    if omega_c == 0:
        return 0j
    loop = complex(math.cos(phi0), math.sin(phi0))
    ratio = omega_c**2 / (2 * params.gamma_dec + 8 * params.gamma_dec**2 + omega_c**2)
    bracket = loop - ratio * loop.conjugate()
    return s * 1j * params.alpha_fs * params.response_scale * (-abs(dark.rho41)) / (2 * omega_c) * bracket


@dataclass(frozen=True)
class Spectrum:
    """Fourier amplitudes of both probe components on the FFT-conjugate dp grid."""

    dp: np.ndarray
    e0: np.ndarray
    b0: np.ndarray
    k0: float
    omega0: float


def _check_power_of_two(n: int) -> None:
    if n < 2 or n & (n - 1):
        raise ValueError(f"spectral grid length must be a power of two, got {n}")


def detuning_grid(n: int, d_tau: float) -> np.ndarray:
    """dp for each FFT bin under the exp(-i dp tau) convention."""
    return -2 * np.pi * np.fft.fftfreq(n, d_tau)


def to_spectrum(grid: EnvelopeGrid, params: MediumParams) -> Spectrum:
    _check_power_of_two(grid.n)
    return Spectrum(
        dp=detuning_grid(grid.n, grid.d_tau),
        e0=np.fft.fft(grid.omega_e),
        b0=np.fft.fft(grid.omega_b),
        k0=params.k0,
        omega0=params.omega0,
    )


def from_spectrum(spectrum: Spectrum, grid: EnvelopeGrid, z: float) -> EnvelopeGrid:
    """Back to the tau grid of the reference grid, at depth z."""
    return grid.evolve(np.fft.ifft(spectrum.e0), np.fft.ifft(spectrum.b0), z)


def check_vacuum_relation(grid: EnvelopeGrid, params: MediumParams) -> None:
    """Raise PhaseRelationError unless Omega_B = -s i alpha Omega_E pointwise."""
    scale = float(np.max(np.abs(grid.omega_e)))
    if params.alpha_fs == 0:
        residual = float(np.max(np.abs(grid.omega_b)))
    else:
        residual = float(np.max(np.abs(grid.omega_b / params.alpha_fs + params.sign * 1j * grid.omega_e)))
    if residual > VACUUM_TOL * scale:
        raise PhaseRelationError(
            f"input is not a {params.polarization}-circular eigenvector "
            f"(residual {residual:.3e}, peak {scale:.3e})"
        )


def transfer_exponent(params: MediumParams, dp: np.ndarray, phi0: float,
                      mode: AnalyticMode = "full") -> np.ndarray:
    """Medium part of eta on a dp grid; frozen mode expands it to first order about resonance."""
    dark = medium_dark_state(params)
    if mode == "frozen":
        ng, _ = group_index(params, dark)
        return ng * dp / params.omega0 + beta(params, dark, phi0)
    if mode != "full":
        raise ValueError(f"unknown propagation mode {mode!r}")
    resp = response_coefficients(params, dark, dp, phi0)
    return np.broadcast_to(medium_eta(resp, params.polarization), dp.shape)


def propagate_analytic(grid: EnvelopeGrid, params: MediumParams, phi0: float | None, z: float,
                       mode: AnalyticMode = "full") -> EnvelopeGrid:
    """Propagate a vacuum eigenvector to depth z in the retarded frame.

    Raises:
        PhaseRelationError: if the input is not circularly polarized with the
            medium's handedness.
    """
    if phi0 is None:
        phi0 = params.phi0
    check_vacuum_relation(grid, params)
    spectrum = to_spectrum(grid, params)
    if z == 0:
        return grid.evolve(grid.omega_e.copy(), grid.omega_b.copy(), grid.z)
    factor = np.exp(1j * spectrum.k0 * transfer_exponent(params, spectrum.dp, phi0, mode) * z)
    out = Spectrum(spectrum.dp, spectrum.e0 * factor, spectrum.b0 * factor, spectrum.k0, spectrum.omega0)
    return from_spectrum(out, grid, grid.z + z)


@dataclass(frozen=True)
class DispersionResult:
    """Propagation constants of one handedness at the detunings dp."""

    dp: float | np.ndarray
    eta: complex | np.ndarray
    n_exact: complex | np.ndarray
    n_linear: complex | np.ndarray
    ng: float
    vg: float
    beta: complex


def dispersion_result(params: MediumParams, dp, phi0: float | None = None) -> DispersionResult:
    if phi0 is None:
        phi0 = params.phi0
    dark = medium_dark_state(params)
    resp = response_coefficients(params, dark, dp, phi0)
    pol = params.polarization
    ng, vg = group_index(params, dark)
    return DispersionResult(
        dp=resp.dp,
        eta=eta(resp, resp.dp, pol, params.omega0),
        n_exact=n_exact(resp, pol),
        n_linear=n_linear(resp, pol),
        ng=ng,
        vg=vg,
        beta=beta(params, dark, phi0),
    )


def sweep_beta(params: MediumParams, phi0_values) -> pd.DataFrame:
    dark = medium_dark_state(params)
    values = np.array([beta(params, dark, float(p)) for p in phi0_values], dtype=complex)
    return pd.DataFrame(
        {"phi0": np.asarray(phi0_values, dtype=float), "Re_beta": values.real, "Im_beta": values.imag},
        columns=BETA_COLUMNS,
    )


def sweep_index(params: MediumParams, dp_values, phi0: float | None = None) -> pd.DataFrame:
    dp_values = np.asarray(dp_values, dtype=float)
    result = dispersion_result(params, dp_values, phi0)
    n = np.broadcast_to(result.n_exact, dp_values.shape)
    e = np.broadcast_to(result.eta, dp_values.shape)
    return pd.DataFrame(
        {"dp": dp_values, "Re_n": n.real, "Im_n": n.imag, "Re_eta": e.real, "Im_eta": e.imag},
        columns=INDEX_COLUMNS,
    )
