"""Probe envelopes on the retarded-time grid, phase schedules and pulse metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from types_ import PulseMetrics

SPACING_RTOL = 1e-9          # relative tolerance on a uniform tau grid
PHASE_FLOOR = 1e-3           # |Omega| / peak below which the phase is not tracked
DEFAULT_RAMP = 5.0           # 1/gamma


@dataclass(eq=False)
class EnvelopeGrid:
    """Omega_E, Omega_B and Omega_C sampled on tau = t - z/c at depth z."""

    tau: np.ndarray
    omega_e: np.ndarray
    omega_b: np.ndarray
    omega_c: np.ndarray | None = None
    z: float = 0.0

    def __post_init__(self) -> None:
        self.tau = np.asarray(self.tau, dtype=float)
        self.omega_e = np.asarray(self.omega_e, dtype=complex)
        self.omega_b = np.asarray(self.omega_b, dtype=complex)
        if self.omega_c is None:
            self.omega_c = np.zeros_like(self.omega_e)
        self.omega_c = np.asarray(self.omega_c, dtype=complex)

        n = self.tau.shape[0]
        if self.tau.ndim != 1 or n < 2:
            raise ValueError("tau grid needs at least two samples")
        for name in ("omega_e", "omega_b", "omega_c"):
            if getattr(self, name).shape != self.tau.shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, tau has {self.tau.shape}")
        steps = np.diff(self.tau)
        if steps[0] <= 0 or not np.allclose(steps, steps[0], rtol=SPACING_RTOL, atol=0):
            raise ValueError("tau grid must be uniform and increasing")

    @property
    def n(self) -> int:
        return int(self.tau.shape[0])

    @property
    def d_tau(self) -> float:
        return float(self.tau[1] - self.tau[0])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.omega_e)) and np.all(np.isfinite(self.omega_b))
                    and np.all(np.isfinite(self.omega_c)))

    def copy(self) -> EnvelopeGrid:
        return EnvelopeGrid(self.tau.copy(), self.omega_e.copy(), self.omega_b.copy(),
                            self.omega_c.copy(), self.z)

    def evolve(self, omega_e: np.ndarray, omega_b: np.ndarray, z: float,
               omega_c: np.ndarray | None = None) -> EnvelopeGrid:
        """Same tau grid with new envelopes at depth z."""
        return EnvelopeGrid(self.tau, omega_e, omega_b,
                            self.omega_c if omega_c is None else omega_c, z)

    def chirality_residual(self, sign: int, alpha: float) -> float:
        """max |Omega_B + sign i alpha Omega_E| relative to alpha max |Omega_E|."""
        scale = alpha * float(np.max(np.abs(self.omega_e)))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(self.omega_b + sign * 1j * alpha * self.omega_e)) / scale)


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


@dataclass(frozen=True)
class PhaseSchedule:
    """Closed-loop phase Phi0(t) as ordered (start, value) segments.

    The first segment holds for all earlier times; each later one switches in
    with a smoothstep of length ramp starting at its start time.
    """

    segments: tuple[tuple[float, float], ...]
    ramp: float = DEFAULT_RAMP

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("phase schedule needs at least one segment")
        if not math.isfinite(self.ramp) or self.ramp < 0:
            raise ValueError(f"ramp must be >= 0, got {self.ramp!r}")
        object.__setattr__(self, "segments", tuple((float(s), float(v)) for s, v in self.segments))
        previous = None
        for start, value in self.segments:
            if not -math.pi < value <= math.pi:
                raise ValueError(f"phi0 = {value!r} outside (-pi, pi]")
            if previous is not None and (start <= previous or start - previous < self.ramp):
                raise ValueError(
                    f"segment at t={start!r} starts before the previous switch at t={previous!r} has ramped"
                )
            previous = start

    @classmethod
    def constant(cls, phi0: float) -> PhaseSchedule:
        return cls(segments=((0.0, float(phi0)),))

    @property
    def is_constant(self) -> bool:
        return all(v == self.segments[0][1] for _, v in self.segments)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        value = np.full(t.shape, self.segments[0][1])
        for (_, before), (start, after) in zip(self.segments, self.segments[1:]):
            if self.ramp == 0:
                step = (t >= start).astype(float)
            else:
                step = _smoothstep((t - start) / self.ramp)
            value = value + (after - before) * step
        return value.item() if value.ndim == 0 else value


@dataclass
class Snapshot:
    """Envelope grid captured at depth z with its metrics."""

    z: float
    grid: EnvelopeGrid
    metrics: PulseMetrics = field(init=False)

    def __post_init__(self) -> None:
        self.grid = self.grid.copy()
        self.metrics = pulse_metrics(self.grid)


def gaussian_pulse(tau: np.ndarray, tau0: float, sigma: float, amplitude: float,
                   sign: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Omega_E = A exp(-(tau - tau0)^2 / 2 sigma^2) and the matching vacuum Omega_B."""
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma!r}")
    omega_e = amplitude * np.exp(-((np.asarray(tau) - tau0) ** 2) / (2 * sigma**2)) + 0j
    omega_b = -sign * 1j * alpha * omega_e
    return omega_e, omega_b


def _phase_at(tau: np.ndarray, values: np.ndarray, where: float) -> float:
    magnitude = np.abs(values)
    peak_index = int(np.argmax(magnitude))
    keep = magnitude >= PHASE_FLOOR * magnitude[peak_index]
    lo = peak_index
    while lo > 0 and keep[lo - 1]:
        lo -= 1
    hi = peak_index
    while hi < len(values) - 1 and keep[hi + 1]:
        hi += 1
    angle = np.angle(values[lo:hi + 1])
    if hi == lo:
        return float(angle[0])
    unwrapped = np.unwrap(angle)
    unwrapped += angle[peak_index - lo] - unwrapped[peak_index - lo]
    return float(np.interp(where, tau[lo:hi + 1], unwrapped))


def pulse_metrics(grid: EnvelopeGrid) -> PulseMetrics:
    """Peak |Omega_E|, intensity centroid, phase at the centroid and energy.

    Raises:
        ValueError: for an all-zero envelope.
    """
    intensity = np.abs(grid.omega_e) ** 2
    total = float(intensity.sum())
    if total == 0:
        raise ValueError("pulse metrics of an all-zero envelope are undefined")
    centroid = float(np.dot(grid.tau, intensity) / total)
    return PulseMetrics(
        z=float(grid.z),
        peak=float(np.sqrt(intensity.max())),
        centroid=centroid,
        phase=_phase_at(grid.tau, grid.omega_e, centroid),
        energy=total * grid.d_tau,
    )
