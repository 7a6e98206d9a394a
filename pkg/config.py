"""Medium parameters, unit conventions and the zeroth-order dark state.

Internal units: rates and Rabi frequencies in gamma_total (the total decay
rate of |3>), time in 1/gamma_total, lengths in c/gamma_total.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np
from scipy import constants

from types_ import Polarization

VERSION = "1.0.0"

# === Physical constants ====================================================
SPEED_OF_LIGHT = constants.c          # m/s
FINE_STRUCTURE = constants.alpha      # m/d in units of c

# === Medium defaults (single source of truth) ==============================
# Rates are in units of gamma_total unless marked otherwise.
GAMMA_BRANCH = 1.0 / 3.0              # gamma31 = gamma32 = gamma34
GAMMA21 = 1e-3                        # magnetic transition linewidth
GAMMA_DEC = 0.5                       # collisional decoherence
GAMMA5 = 0.5                          # decay of |5> into |1> and into |4>
GAMMA_TOTAL_SI = 2 * math.pi * 6e6    # rad/s, sets the time unit
LAMBDA0 = 795e-9                      # m
DENSITY = 0.01                        # L = N lambda^3 / 4 pi^2
OMEGA_GROUND = 0.01                   # |Omega1| = |Omega2|
OMEGA_CONTROL = 2.0                   # |OmegaC|

NORMALIZATION_TOL = 1e-12             # |gamma_total - 1| accepted as already normalized

POLARIZATIONS: tuple[str, ...] = ("left", "right")

# Fields that scale with the unit of rate when normalizing.
_RATE_FIELDS = (
    "gamma31", "gamma32", "gamma34", "gamma21", "gamma_dec", "gamma51", "gamma54",
    "omega1_mag", "omega2_mag", "omega_c_mag",
)


class ParameterError(ValueError):
    """A medium parameter failed validation."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class MediumParams:
    """Atomic and control-field constants of the chiral medium."""

    gamma31: float = GAMMA_BRANCH
    gamma32: float = GAMMA_BRANCH
    gamma34: float = GAMMA_BRANCH
    gamma21: float = GAMMA21
    gamma_dec: float = GAMMA_DEC
    gamma51: float = GAMMA5
    gamma54: float = GAMMA5
    gamma_total_si: float = GAMMA_TOTAL_SI
    lambda0: float = LAMBDA0
    density: float = DENSITY
    alpha_fs: float = FINE_STRUCTURE
    omega1_mag: float = OMEGA_GROUND
    omega2_mag: float = OMEGA_GROUND
    omega_c_mag: float = OMEGA_CONTROL
    phi1: float = 0.0
    phi2: float = 0.0
    phi_c: float = math.pi / 2
    polarization: Polarization = "left"
    lfc_enabled: bool = False

    @property
    def gamma_total(self) -> float:
        return self.gamma31 + self.gamma32 + self.gamma34

    @property
    def sign(self) -> int:
        """+1 for left circular (upper sign), -1 for right."""
        return 1 if self.polarization == "left" else -1

    @property
    def omega1(self) -> complex:
        return self.omega1_mag * complex(math.cos(self.phi1), math.sin(self.phi1))

    @property
    def omega2(self) -> complex:
        return self.omega2_mag * complex(math.cos(self.phi2), math.sin(self.phi2))

    @property
    def omega_c(self) -> complex:
        return self.omega_c_mag * complex(math.cos(self.phi_c), math.sin(self.phi_c))

    @property
    def phi0(self) -> float:
        """Closed-loop phase phi2 - phi1 + phiC."""
        return self.phi2 - self.phi1 + self.phi_c

    @property
    def carrier_frequency(self) -> float:
        """omega0 in rad/s."""
        return 2 * math.pi * SPEED_OF_LIGHT / self.lambda0

    @property
    def omega0(self) -> float:
        """Carrier frequency in units of gamma_total."""
        return self.carrier_frequency / self.gamma_total_si

    @property
    def k0(self) -> float:
        """Carrier wave number in units of gamma_total / c (numerically equal to omega0)."""
        return self.omega0

    @property
    def length_unit(self) -> float:
        """c / gamma_total in metres."""
        return SPEED_OF_LIGHT / self.gamma_total_si

    @property
    def response_scale(self) -> float:
        """3 L gamma34, the prefactor shared by all four response coefficients."""
        return 3 * self.density * self.gamma34

    def control_field(self, phi0: float | None = None) -> complex:
        """OmegaC with its phase chosen so the closed-loop phase equals phi0."""
        if phi0 is None:
            return self.omega_c
        phase = phi0 - self.phi2 + self.phi1
        return self.omega_c_mag * complex(math.cos(phase), math.sin(phase))


DEFAULT_MEDIUM = MediumParams()


def validate(params: MediumParams) -> MediumParams:
    """Check signs and tags, then rescale rates so gamma_total = 1.

    Raises:
        ParameterError: naming the offending field.
    """
    for f in fields(params):
        value = getattr(params, f.name)
        if f.name in ("polarization", "lfc_enabled"):
            continue
        if not math.isfinite(value):
            raise ParameterError(f.name, f"must be finite, got {value!r}")
        if value < 0 and f.name not in ("phi1", "phi2", "phi_c"):
            raise ParameterError(f.name, f"must be >= 0, got {value!r}")

    if params.lambda0 <= 0:
        raise ParameterError("lambda0", "wavelength must be > 0")
    if params.gamma_total_si <= 0:
        raise ParameterError("gamma_total_si", "absolute decay scale must be > 0")
    if params.polarization not in POLARIZATIONS:
        raise ParameterError(
            "polarization", f"expected one of {', '.join(POLARIZATIONS)}, got {params.polarization!r}"
        )

    total = params.gamma_total
    if total <= 0:
        raise ParameterError("gamma34", "gamma31 + gamma32 + gamma34 must be > 0")
    if abs(total - 1.0) <= NORMALIZATION_TOL:
        return params
    return replace(params, **{name: getattr(params, name) / total for name in _RATE_FIELDS})


def number_density(density: float, lambda0: float) -> float:
    """Atoms per m^3 for the scaled density L = N lambda^3 / 4 pi^2."""
    if lambda0 <= 0:
        raise ParameterError("lambda0", "wavelength must be > 0")
    if density < 0:
        raise ParameterError("density", "L must be >= 0")
    return 4 * math.pi**2 * density / lambda0**3


@dataclass(frozen=True)
class DarkState:
    """Zeroth-order populations of |1>, |4> and their coherence rho41."""

    rho11: float
    rho44: float
    rho41: complex

    def density_matrix(self) -> np.ndarray:
        rho = np.zeros((5, 5), dtype=complex)
        rho[0, 0] = self.rho11
        rho[3, 3] = self.rho44
        rho[3, 0] = self.rho41
        rho[0, 3] = self.rho41.conjugate()
        return rho


def dark_state(omega1: complex, omega2: complex) -> DarkState:
    """Stationary superposition of |1> and |4> decoupled from Omega1, Omega2."""
    total = abs(omega1) ** 2 + abs(omega2) ** 2
    if total == 0:
        raise ParameterError("omega1_mag", "Omega1 and Omega2 cannot both vanish")
    rho44 = abs(omega1) ** 2 / total
    return DarkState(
        rho11=1.0 - rho44,
        rho44=rho44,
        rho41=complex(-omega1 * omega2.conjugate() / total),
    )


def medium_dark_state(params: MediumParams) -> DarkState:
    return dark_state(params.omega1, params.omega2)
