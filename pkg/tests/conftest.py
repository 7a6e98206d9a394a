"""Shared pytest fixtures."""
from __future__ import annotations

import math
import sys
from dataclasses import replace
from pathlib import Path

# Make the project root importable so tests can `from bloch import ...`.
ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))


import numpy as np  # noqa: E402
import pytest  # noqa: E402

from config import DEFAULT_MEDIUM, MediumParams, validate  # noqa: E402
from envelope import EnvelopeGrid, gaussian_pulse  # noqa: E402


@pytest.fixture
def medium() -> MediumParams:
    """Default medium (gamma21 > 0, loop phase pi/2, left circular)."""
    return validate(DEFAULT_MEDIUM)


@pytest.fixture
def fig_medium() -> MediumParams:
    """Parameters of the figure runs: gamma21 = 0, everything else default."""
    return validate(replace(DEFAULT_MEDIUM, gamma21=0.0, phi_c=math.pi / 2))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def small_pulse(fig_medium) -> EnvelopeGrid:
    """Narrow Gaussian on a short power-of-two grid: sigma = 10, 512 x 0.25."""
    tau = 0.25 * np.arange(512)
    omega_e, omega_b = gaussian_pulse(tau, 50.0, 10.0, 1e-9, fig_medium.sign, fig_medium.alpha_fs)
    return EnvelopeGrid(tau, omega_e, omega_b)


@pytest.fixture
def wide_pulse(fig_medium) -> EnvelopeGrid:
    """Figure-size Gaussian: sigma = 50 on 2048 x 0.4."""
    tau = 0.4 * np.arange(2048)
    omega_e, omega_b = gaussian_pulse(tau, 200.0, 50.0, 1e-9, fig_medium.sign, fig_medium.alpha_fs)
    return EnvelopeGrid(tau, omega_e, omega_b)
