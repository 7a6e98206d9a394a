"""Five-level atom: interaction Hamiltonian, dissipator and equation of motion.

Basis |1>..|5> maps to indices 0..4. Rabi frequencies are in units of
gamma_total and time in 1/gamma_total (hbar = 1).

The dissipator has two parts:
  - spontaneous decay |3> -> |1>,|2>,|4> (gamma3i), |2> -> |1> (gamma21) and
    |5> -> |1>,|4> (gamma5i), in Lindblad form;
  - collisional decoherence as a fixed rate per coherence (rho12, rho34,
    rho23 at gamma_dec, rho13 at 2 gamma_dec). The ground coherences rho14
    and rho24 and everything involving |5> are left alone, which keeps the
    dark state stationary.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numba
import numpy as np
from numba import jit, prange

from config import MediumParams

N_LEVELS = 5

# (from, to) index pairs of the decay channels, in the order of decay_channels().
DECAY_PAIRS = ((2, 0), (2, 1), (2, 3), (1, 0), (4, 0), (4, 3))

# Coherence (j, k) -> multiple of gamma_dec.
DEPHASING_WEIGHTS = {(0, 1): 1.0, (2, 3): 1.0, (1, 2): 1.0, (0, 2): 2.0}


@dataclass(frozen=True)
class Fields:
    """Rabi frequencies seen by one atom at one instant."""

    omega_e: complex = 0j
    omega_b: complex = 0j
    omega_c: complex = 0j
    omega1: complex = 0j
    omega2: complex = 0j

    @classmethod
    def from_params(cls, params: MediumParams, phi0: float | None = None,
                    omega_e: complex = 0j, omega_b: complex = 0j) -> Fields:
        return cls(
            omega_e=complex(omega_e),
            omega_b=complex(omega_b),
            omega_c=params.control_field(phi0),
            omega1=params.omega1,
            omega2=params.omega2,
        )

    def with_probe(self, omega_e: complex = 0j, omega_b: complex = 0j) -> Fields:
        return replace(self, omega_e=complex(omega_e), omega_b=complex(omega_b))


def decay_channels(params: MediumParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Source index, target index and rate of every spontaneous decay channel."""
    rates = (params.gamma31, params.gamma32, params.gamma34,
             params.gamma21, params.gamma51, params.gamma54)
    src = np.array([p[0] for p in DECAY_PAIRS], dtype=np.int64)
    dst = np.array([p[1] for p in DECAY_PAIRS], dtype=np.int64)
    return src, dst, np.array(rates, dtype=np.float64)


def dephasing_matrix(gamma_dec: float) -> np.ndarray:
    """Symmetric rate matrix G; the decoherence term is -G * rho elementwise."""
    g = np.zeros((N_LEVELS, N_LEVELS))
    for (j, k), weight in DEPHASING_WEIGHTS.items():
        g[j, k] = g[k, j] = weight * gamma_dec
    return g


@jit(nopython=True, cache=True)
def _hamiltonian(omega_e, omega_b, omega_c, omega1, omega2, dp):
    h = np.zeros((5, 5), dtype=np.complex128)
    h[1, 1] = -dp
    h[2, 2] = -dp
    h[1, 0] = -0.5 * omega_b
    h[2, 3] = -0.5 * omega_e
    h[2, 1] = -0.5 * omega_c
    h[4, 0] = -0.5 * omega1
    h[4, 3] = -0.5 * omega2
    h[0, 1] = h[1, 0].conjugate()
    h[3, 2] = h[2, 3].conjugate()
    h[1, 2] = h[2, 1].conjugate()
    h[0, 4] = h[4, 0].conjugate()
    h[3, 4] = h[4, 3].conjugate()
    return h


@jit(nopython=True, cache=True)
def _rhs(rho, h, src, dst, rate, dephasing):
    n = rho.shape[0]
    out = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            acc = 0j
            for k in range(n):
                acc += h[i, k] * rho[k, j] - rho[i, k] * h[k, j]
            out[i, j] = -1j * acc - dephasing[i, j] * rho[i, j]
    for c in range(src.shape[0]):
        s = src[c]
        g = rate[c]
        out[dst[c], dst[c]] += g * rho[s, s]
        for k in range(n):
            out[s, k] -= 0.5 * g * rho[s, k]
            out[k, s] -= 0.5 * g * rho[k, s]
    return out


@jit(nopython=True, cache=True)
def _derivative(rho, omega_e, omega_b, omega_c, omega1, omega2, dp,
                lfc_e, lfc_b, src, dst, rate, dephasing):
    # Local fields: the atom sees the probe plus the Lorenz-Lorentz term of its own coherence.
    h = _hamiltonian(omega_e + lfc_e * rho[2, 3], omega_b + lfc_b * rho[1, 0],
                     omega_c, omega1, omega2, dp)
    return _rhs(rho, h, src, dst, rate, dephasing)


@jit(nopython=True, cache=True)
def _sweep(rho0, omega_e, omega_b, omega_c, mid_e, mid_b, mid_c, omega1, omega2, dp, dtau,
           lfc_e, lfc_b, src, dst, rate, dephasing):
    n = omega_e.shape[0]
    states = np.empty((n, 5, 5), dtype=np.complex128)
    rho = rho0.copy()
    states[0, :, :] = rho
    for k in range(n - 1):
        k1 = _derivative(rho, omega_e[k], omega_b[k], omega_c[k], omega1, omega2, dp,
                         lfc_e, lfc_b, src, dst, rate, dephasing)
        k2 = _derivative(rho + 0.5 * dtau * k1, mid_e[k], mid_b[k], mid_c[k], omega1, omega2, dp,
                         lfc_e, lfc_b, src, dst, rate, dephasing)
        k3 = _derivative(rho + 0.5 * dtau * k2, mid_e[k], mid_b[k], mid_c[k], omega1, omega2, dp,
                         lfc_e, lfc_b, src, dst, rate, dephasing)
        k4 = _derivative(rho + dtau * k3, omega_e[k + 1], omega_b[k + 1], omega_c[k + 1],
                         omega1, omega2, dp, lfc_e, lfc_b, src, dst, rate, dephasing)
        rho = rho + (dtau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1, :, :] = rho
    return states


@jit(nopython=True, cache=True, parallel=True)
def _drift(states):
    n = states.shape[0]
    trace = np.empty(n)
    herm = np.empty(n)
    for t in prange(n):
        acc = 0j
        worst = 0.0
        for i in range(5):
            acc += states[t, i, i]
            for j in range(5):
                d = abs(states[t, i, j] - states[t, j, i].conjugate())
                if d > worst:
                    worst = d
        trace[t] = abs(acc - 1.0)
        herm[t] = worst
    return trace, herm


def hamiltonian(fields: Fields, dp: float) -> np.ndarray:
    """H_I for probe detuning dp; both probe transitions carry -dp on |2>, |3>."""
    return _hamiltonian(complex(fields.omega_e), complex(fields.omega_b), complex(fields.omega_c),
                        complex(fields.omega1), complex(fields.omega2), float(dp))


def bloch_rhs(rho: np.ndarray, fields: Fields, dp: float, params: MediumParams) -> np.ndarray:
    """d rho / d tau = -i[H_I, rho] + D(rho)."""
    src, dst, rate = decay_channels(params)
    return _rhs(np.ascontiguousarray(rho, dtype=np.complex128), hamiltonian(fields, dp),
                src, dst, rate, dephasing_matrix(params.gamma_dec))


def liouvillian(fields: Fields, dp: float, params: MediumParams) -> np.ndarray:
    """25x25 superoperator acting on row-major vec(rho)."""
    size = N_LEVELS * N_LEVELS
    lv = np.empty((size, size), dtype=complex)
    basis = np.zeros(size, dtype=complex)
    for n in range(size):
        basis[:] = 0
        basis[n] = 1
        lv[:, n] = bloch_rhs(basis.reshape(N_LEVELS, N_LEVELS), fields, dp, params).ravel()
    return lv


def midpoints(values: np.ndarray) -> np.ndarray:
    """Cubic (4-point) estimate of values halfway between grid samples."""
    padded = np.concatenate([values[:1], values, values[-1:], values[-1:]])
    return (-padded[:-3] + 9 * padded[1:-2] + 9 * padded[2:-1] - padded[3:]) / 16


def sweep_states(rho0: np.ndarray, params: MediumParams, d_tau: float,
                 omega_e: np.ndarray, omega_b: np.ndarray, omega_c: np.ndarray, *,
                 mid_c: np.ndarray | None = None, dp: float = 0.0) -> np.ndarray:
    """Integrate the atoms along a tau grid with classical RK4, one step per sample.

    Probe fields at half steps are interpolated; the control field at half
    steps can be supplied exactly (mid_c) when it comes from a schedule.

    Returns:
        states of shape (len(omega_e), 5, 5).
    """
    omega_e = np.ascontiguousarray(omega_e, dtype=np.complex128)
    omega_b = np.ascontiguousarray(omega_b, dtype=np.complex128)
    omega_c = np.ascontiguousarray(omega_c, dtype=np.complex128)
    if mid_c is None:
        mid_c = midpoints(omega_c)
    src, dst, rate = decay_channels(params)
    lfc_e = lfc_b = 0.0
    if params.lfc_enabled:
        lfc_e = params.density * params.gamma34
        lfc_b = params.alpha_fs**2 * lfc_e
    return _sweep(
        np.ascontiguousarray(rho0, dtype=np.complex128),
        omega_e, omega_b, omega_c,
        midpoints(omega_e), midpoints(omega_b), np.ascontiguousarray(mid_c, dtype=np.complex128),
        complex(params.omega1), complex(params.omega2), float(dp), float(d_tau),
        float(lfc_e), float(lfc_b), src, dst, rate, dephasing_matrix(params.gamma_dec),
    )


@dataclass(frozen=True)
class DriftReport:
    """Worst deviation of a batch of density matrices from a physical state."""

    trace: float
    hermiticity: float
    min_eigenvalue: float
    worst_index: int

    def within(self, drift_tol: float, positivity_tol: float) -> bool:
        return (self.trace <= drift_tol and self.hermiticity <= drift_tol
                and self.min_eigenvalue >= -positivity_tol)


def drift_report(states: np.ndarray) -> DriftReport:
    """Trace, Hermiticity and positivity drift over a stack of 5x5 states."""
    states = np.ascontiguousarray(states, dtype=np.complex128)
    trace, herm = _drift(states)
    eig = np.linalg.eigvalsh(states).min(axis=-1)
    badness = np.maximum(np.maximum(trace, herm), -eig)
    worst = int(np.argmax(badness))
    return DriftReport(
        trace=float(trace.max()),
        hermiticity=float(herm.max()),
        min_eigenvalue=float(eig.min()),
        worst_index=worst,
    )


def configure_threads() -> int:
    """Apply CHIRALPROP_THREADS to numba's pool; returns the thread count in use."""
    requested = os.environ.get("CHIRALPROP_THREADS")
    if requested:
        try:
            count = max(1, min(int(requested), numba.config.NUMBA_NUM_THREADS))
        except ValueError:
            print(f"⚠️  ignoring CHIRALPROP_THREADS={requested!r}")
        else:
            numba.set_num_threads(count)
    return numba.get_num_threads()
