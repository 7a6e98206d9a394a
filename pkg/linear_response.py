"""Linear response of the dark-state medium to a weak chiral probe.

Two independent routes to the same four coefficients:
  - response_coefficients: closed forms in the complex rates Gamma_jk;
  - steady_state_oracle: first-order steady state of the full equation of
    motion, solved numerically on the probe-coupled coherence sector.

The reduced polarization and magnetization are
    P = 3 L gamma34 rho34 = chiE OmegaE + xiEH OmegaB / alpha
    M = 3 L gamma34 alpha rho21 = xiHE OmegaE + chiH OmegaB / alpha
so that OmegaB / alpha plays the role of the H field in Rabi units.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from bloch import Fields, bloch_rhs, hamiltonian, liouvillian
from config import DarkState, MediumParams, medium_dark_state

ORACLE_PROBE = 1e-6        # default |OmegaE| = |OmegaB| for the oracle, units of gamma
CONDITION_LIMIT = 1e8      # largest accepted condition number of the probe configuration
NONLINEAR_LIMIT = 1e-3     # quadratic residual / first-order drive that triggers a warning

# rho21, rho24, rho31, rho34 as indices into row-major vec(rho).
SECTOR = (1 * 5 + 0, 1 * 5 + 3, 2 * 5 + 0, 2 * 5 + 3)
_R21, _R24, _R31, _R34 = range(4)

RESPONSE_COLUMNS = [
    "dp", "phi0",
    "Re_chiE", "Im_chiE", "Re_chiH", "Im_chiH",
    "Re_xiEH", "Im_xiEH", "Re_xiHE", "Im_xiHE",
]


class SingularResponseError(ArithmeticError):
    """A response denominator or linear system is singular."""


class NonlinearProbeWarning(UserWarning):
    """The oracle probe is strong enough to leave the linear regime."""


@dataclass(frozen=True)
class DecoherenceSet:
    """Complex rates Gamma_jk (decay plus detuning) of the probe coherences."""

    gamma34: complex | np.ndarray
    gamma21: complex | np.ndarray
    gamma24: complex | np.ndarray
    gamma31: complex | np.ndarray


@dataclass(frozen=True)
class ResponseCoefficients:
    """chiE, chiH, xiEH, xiHE at detuning dp and closed-loop phase phi0.

    Fields hold scalars or arrays shaped like dp.
    """

    chi_e: complex | np.ndarray
    chi_h: complex | np.ndarray
    xi_eh: complex | np.ndarray
    xi_he: complex | np.ndarray
    dp: float | np.ndarray
    phi0: float

    @property
    def epsilon(self) -> complex | np.ndarray:
        return 1 + self.chi_e

    @property
    def mu(self) -> complex | np.ndarray:
        return 1 + self.chi_h

    def as_matrix(self) -> np.ndarray:
        """[[chiE, xiEH], [xiHE, chiH]] for scalar coefficients."""
        return np.array([[self.chi_e, self.xi_eh], [self.xi_he, self.chi_h]], dtype=complex)


def decoherence_rates(params: MediumParams, dark: DarkState, dp) -> DecoherenceSet:
    dp = np.asarray(dp, dtype=float)
    half = params.gamma_total / 2
    lfc_shift = dark.rho44 * params.density * params.gamma34 / 2 if params.lfc_enabled else 0.0
    return DecoherenceSet(
        gamma34=half + params.gamma_dec - 1j * (dp + lfc_shift),
        gamma21=params.gamma21 / 2 + params.gamma_dec - 1j * dp,
        gamma24=params.gamma21 / 2 - 1j * dp + 0j,
        gamma31=half + 2 * params.gamma_dec - 1j * dp,
    )


def response_coefficients(params: MediumParams, dark: DarkState, dp,
                          phi0: float | None = None) -> ResponseCoefficients:
    """Closed-form response coefficients; dp may be a scalar or an array.

    With local-field corrections on, Gamma34 carries the Lorenz-Lorentz shift,
    xiHE picks up (1 + chiE/3) and chiH a phase-free xiEH correction.

    Raises:
        SingularResponseError: if a denominator vanishes.
    """
    if phi0 is None:
        phi0 = params.phi0
    rates = decoherence_rates(params, dark, dp)
    scale = params.response_scale
    alpha = params.alpha_fs
    omega_c = params.omega_c_mag
    rho41 = abs(dark.rho41)
    lfc = 1.0 if params.lfc_enabled else 0.0

    den_e = rates.gamma34 * rates.gamma24 + omega_c**2 / 4
    den_m = rates.gamma21 * rates.gamma31 + omega_c**2 / 4
    if np.any(den_e == 0) or np.any(den_m == 0):
        raise SingularResponseError(f"response denominator vanishes at dp={dp!r}")

    loop = complex(math.cos(phi0), math.sin(phi0))
    cross = rho41 * omega_c / 4

    chi_e = scale * dark.rho44 * 0.5j * rates.gamma24 / den_e
    xi_eh = scale * alpha * cross * loop / den_e
    xi_he = scale * alpha * cross * (1 + lfc * chi_e / 3) * loop.conjugate() / den_m
    chi_h = scale * (
        alpha**2 * dark.rho11 * 0.5j * rates.gamma31
        - lfc * alpha * xi_eh * cross * loop.conjugate() / 3
    ) / den_m

    return ResponseCoefficients(
        chi_e=_unwrap_scalar(chi_e),
        chi_h=_unwrap_scalar(chi_h),
        xi_eh=_unwrap_scalar(xi_eh),
        xi_he=_unwrap_scalar(xi_he),
        dp=_unwrap_scalar(np.asarray(dp, dtype=float)),
        phi0=float(phi0),
    )


def _unwrap_scalar(value):
    value = np.asarray(value)
    return value.item() if value.ndim == 0 else value


def _sector_system(params: MediumParams, dp: float, phi0: float | None):
    """Probe-free sector matrix, unit-probe sources and the dark state."""
    fields = Fields.from_params(params, phi0)
    rho0 = medium_dark_state(params).density_matrix()
    index = np.array(SECTOR)
    matrix = liouvillian(fields, dp, params)[np.ix_(index, index)]
    base = bloch_rhs(rho0, fields, dp, params).ravel()
    source_e = (bloch_rhs(rho0, fields.with_probe(omega_e=1), dp, params).ravel() - base)[index]
    source_b = (bloch_rhs(rho0, fields.with_probe(omega_b=1), dp, params).ravel() - base)[index]
    if params.lfc_enabled:
        local = params.density * params.gamma34
        matrix = matrix.copy()
        # the atom is driven by OmegaE + L gamma34 rho34 and OmegaB + alpha^2 L gamma34 rho21
        matrix[:, _R34] += local * source_e
        matrix[:, _R21] += params.alpha_fs**2 * local * source_b
    return matrix, source_e, source_b, rho0


def _solve(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        solution = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularResponseError(f"steady-state system is singular: {exc}") from exc
    if not np.all(np.isfinite(solution)):
        raise SingularResponseError("steady-state system produced non-finite coherences")
    return solution


def induced_response(params: MediumParams, dp: float, phi0: float | None,
                     omega_e: complex, omega_b: complex) -> tuple[complex, complex]:
    """Reduced (P, M) driven by the probe (omega_e, omega_b) at first order."""
    matrix, source_e, source_b, _ = _sector_system(params, dp, phi0)
    u = _solve(matrix, -(omega_e * source_e + omega_b * source_b))
    scale = params.response_scale
    return complex(scale * u[_R34]), complex(scale * params.alpha_fs * u[_R21])


def steady_state_oracle(params: MediumParams, dp: float, phi0: float | None = None,
                        probe: tuple[complex, complex] = (ORACLE_PROBE, ORACLE_PROBE)
                        ) -> ResponseCoefficients:
    """Response coefficients from the linearized steady state of the full dynamics.

    The two columns of the 2x2 constitutive relation come from separate
    OmegaE-only and OmegaB-only drives. Because the sector solve is exactly
    linear, the result does not depend on the probe amplitude; the probe is
    only used to estimate the neglected second-order residual.

    Raises:
        SingularResponseError: singular sector system or degenerate probe.
    Warns:
        NonlinearProbeWarning: if the probe would perturb the dark state.
    """
    if phi0 is None:
        phi0 = params.phi0
    alpha = params.alpha_fs
    p_e, p_b = complex(probe[0]), complex(probe[1])
    drive = np.array([abs(p_e), abs(p_b) / alpha if alpha else 0.0])
    if drive.min() == 0 or drive.max() / drive.min() > CONDITION_LIMIT:
        raise SingularResponseError(
            f"probe configuration {probe!r} cannot separate electric and magnetic response"
        )

    matrix, source_e, source_b, rho0 = _sector_system(params, dp, phi0)
    u = _solve(matrix, -np.column_stack([p_e * source_e, p_b * source_b]))

    scale = params.response_scale
    y = np.array([[scale * u[_R34, 0], scale * u[_R34, 1]],
                  [scale * alpha * u[_R21, 0], scale * alpha * u[_R21, 1]]])
    coeff = y / np.array([p_e, p_b / alpha])

    _check_linearity(u.sum(axis=1), rho0, p_e, p_b)

    return ResponseCoefficients(
        chi_e=complex(coeff[0, 0]),
        chi_h=complex(coeff[1, 1]),
        xi_eh=complex(coeff[0, 1]),
        xi_he=complex(coeff[1, 0]),
        dp=float(dp),
        phi0=float(phi0),
    )


def _check_linearity(u: np.ndarray, rho0: np.ndarray, p_e: complex, p_b: complex) -> None:
    delta = np.zeros((5, 5), dtype=complex)
    delta.flat[list(SECTOR)] = u
    delta = delta + delta.conj().T
    h_probe = hamiltonian(Fields(omega_e=p_e, omega_b=p_b), 0.0)
    first = np.linalg.norm(h_probe @ rho0 - rho0 @ h_probe)
    if first == 0:
        return
    ratio = np.linalg.norm(h_probe @ delta - delta @ h_probe) / first
    if ratio > NONLINEAR_LIMIT:
        warnings.warn(
            f"probe ({p_e:.3g}, {p_b:.3g}) leaves the linear regime: residual ratio {ratio:.2e}",
            NonlinearProbeWarning,
            stacklevel=3,
        )


def sweep_response(params: MediumParams, dp_values, phi0_values) -> pd.DataFrame:
    """Closed-form coefficients over the dp x phi0 grid, one row per point."""
    dark = medium_dark_state(params)
    dp_values = np.asarray(dp_values, dtype=float)
    frames = []
    for phi0 in phi0_values:
        resp = response_coefficients(params, dark, dp_values, float(phi0))
        row = {"dp": dp_values, "phi0": np.full(dp_values.shape, float(phi0))}
        for name, value in (("chiE", resp.chi_e), ("chiH", resp.chi_h),
                            ("xiEH", resp.xi_eh), ("xiHE", resp.xi_he)):
            value = np.broadcast_to(value, dp_values.shape)
            row[f"Re_{name}"] = value.real
            row[f"Im_{name}"] = value.imag
        frames.append(pd.DataFrame(row, columns=RESPONSE_COLUMNS))
    if not frames:
        return pd.DataFrame(columns=RESPONSE_COLUMNS)
    return pd.concat(frames, ignore_index=True)
