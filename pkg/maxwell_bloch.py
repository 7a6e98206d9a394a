"""Maxwell-Bloch co-propagation of the electric and magnetic probe components.

Each z-step integrates the atoms along the whole tau grid (RK4 in tau) with
the current local fields, converts the coherences rho34 and rho21 into field
sources and advances the envelopes with the explicit midpoint rule in z.

Field equations in the retarded frame, with K = 3 L gamma34:
    dOmegaE/dz = (k0/2) K (i rho34 - s alpha rho21)
    dOmegaB/dz = (k0/2) K (i alpha^2 rho21 + s alpha rho34)
Both conserve Omega_B/alpha + s i Omega_E, so a circular input stays circular.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from bloch import DriftReport, drift_report, sweep_states
from config import MediumParams, medium_dark_state
from envelope import EnvelopeGrid, PhaseSchedule, Snapshot, pulse_metrics
from types_ import PulseMetrics

DRIFT_TOL = 1e-10            # trace and Hermiticity drift of rho
POSITIVITY_TOL = 1e-8        # most negative eigenvalue accepted
CFL_LIMIT = 0.1              # dz * max|dOmegaE/dz| / max|OmegaE|
PROGRESS_STEPS = 10


class PropagationError(RuntimeError):
    """Numerical failure during the z-march."""

    def __init__(self, message: str, z: float, tau_index: int | None = None):
        where = f"z={z:.6e}" + ("" if tau_index is None else f", tau index {tau_index}")
        super().__init__(f"{message} ({where})")
        self.z = z
        self.tau_index = tau_index


@dataclass(frozen=True)
class SolverSettings:
    """Step size, depth and tolerances of one Maxwell-Bloch run."""

    dz: float
    depth: float
    snapshots: tuple[float, ...] = ()
    control_source: bool = False
    drift_tol: float = DRIFT_TOL
    positivity_tol: float = POSITIVITY_TOL
    cfl_limit: float = CFL_LIMIT
    progress: bool = False

    def __post_init__(self) -> None:
        if not self.dz > 0:
            raise ValueError(f"dz must be > 0, got {self.dz!r}")
        if not self.depth >= 0:
            raise ValueError(f"depth must be >= 0, got {self.depth!r}")
        for z in self.snapshots:
            if not 0 <= z <= self.depth:
                raise ValueError(f"snapshot depth {z!r} outside [0, {self.depth!r}]")

    @property
    def steps(self) -> int:
        if self.depth == 0:
            return 0
        return max(1, math.ceil(self.depth / self.dz - 1e-9))


@dataclass
class RunResult:
    snapshots: list[Snapshot]
    metrics: list[PulseMetrics]
    final: EnvelopeGrid
    drift: DriftReport
    steps: int
    dz: float = field(default=0.0)


def source_terms(states: np.ndarray, params: MediumParams,
                 control_source: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """dOmega/dz for the three propagating fields from per-tau density matrices."""
    rho34 = states[:, 2, 3]
    rho21 = states[:, 1, 0]
    half_k = params.k0 / 2
    scale = params.response_scale
    alpha = params.alpha_fs
    s = params.sign
    d_e = half_k * scale * (1j * rho34 - s * alpha * rho21)
    d_b = half_k * scale * (1j * alpha**2 * rho21 + s * alpha * rho34)
    if control_source:
        d_c = half_k * 3 * params.density * params.gamma32 * 1j * states[:, 2, 1]
    else:
        d_c = np.zeros_like(d_e)
    return d_e, d_b, d_c


class MaxwellBlochSolver:
    """Marches a probe envelope through the medium under a phase schedule."""

    def __init__(self, params: MediumParams, schedule: PhaseSchedule, settings: SolverSettings):
        self.params = params
        self.schedule = schedule
        self.settings = settings
        self._rho0 = medium_dark_state(params).density_matrix()
        self._worst: DriftReport | None = None

    def control_field(self, tau: np.ndarray, z: float) -> np.ndarray:
        """Omega_C(z, tau) carrying the closed-loop phase scheduled at lab time tau + z."""
        phase = self.schedule(np.asarray(tau) + z) - self.params.phi2 + self.params.phi1
        return self.params.omega_c_mag * np.exp(1j * np.asarray(phase))

    def prepare(self, grid: EnvelopeGrid) -> EnvelopeGrid:
        """Input grid with the scheduled control field filled in."""
        return grid.evolve(grid.omega_e, grid.omega_b, grid.z, self.control_field(grid.tau, grid.z))

    def atomic_states(self, grid: EnvelopeGrid) -> np.ndarray:
        """Density matrix at every tau for the fields of this grid."""
        mid_c = None
        if not self.settings.control_source:
            mid_c = self.control_field(grid.tau + grid.d_tau / 2, grid.z)
        return sweep_states(self._rho0, self.params, grid.d_tau,
                            grid.omega_e, grid.omega_b, grid.omega_c, mid_c=mid_c)

    def _check_states(self, states: np.ndarray, z: float) -> None:
        report = drift_report(states)
        if self._worst is None:
            self._worst = report
        else:
            self._worst = DriftReport(
                trace=max(report.trace, self._worst.trace),
                hermiticity=max(report.hermiticity, self._worst.hermiticity),
                min_eigenvalue=min(report.min_eigenvalue, self._worst.min_eigenvalue),
                worst_index=report.worst_index
                if report.min_eigenvalue < self._worst.min_eigenvalue else self._worst.worst_index,
            )
        if not report.within(self.settings.drift_tol, self.settings.positivity_tol):
            raise PropagationError(
                f"density matrix left the physical set: trace drift {report.trace:.2e}, "
                f"hermiticity drift {report.hermiticity:.2e}, min eigenvalue {report.min_eigenvalue:.2e}",
                z, report.worst_index,
            )

    def _shifted(self, grid: EnvelopeGrid, sources, dz: float) -> EnvelopeGrid:
        d_e, d_b, d_c = sources
        z = grid.z + dz
        if self.settings.control_source:
            omega_c = grid.omega_c + dz * d_c
        else:
            omega_c = self.control_field(grid.tau, z)
        return grid.evolve(grid.omega_e + dz * d_e, grid.omega_b + dz * d_b, z, omega_c)

    def field_step(self, grid: EnvelopeGrid, dz: float, states: np.ndarray | None = None) -> EnvelopeGrid:
        """Advance the envelopes by dz with the explicit midpoint rule.

        Raises:
            PropagationError: on non-finite envelopes, a too large step or an
                unphysical atomic state.
        """
        if states is None:
            states = self.atomic_states(grid)
            self._check_states(states, grid.z)
        sources = source_terms(states, self.params, self.settings.control_source)

        peak = float(np.max(np.abs(grid.omega_e)))
        if peak > 0:
            ratio = dz * float(np.max(np.abs(sources[0]))) / peak
            if ratio >= self.settings.cfl_limit:
                raise PropagationError(
                    f"step too large: dz * max|source| / max|OmegaE| = {ratio:.3f} >= {self.settings.cfl_limit}",
                    grid.z,
                )

        half = self._shifted(grid, sources, dz / 2)
        mid_sources = source_terms(self.atomic_states(half), self.params, self.settings.control_source)
        stepped = self._shifted(grid, mid_sources, dz)

        bad = ~(np.isfinite(stepped.omega_e) & np.isfinite(stepped.omega_b) & np.isfinite(stepped.omega_c))
        if np.any(bad):
            raise PropagationError("non-finite envelope", stepped.z, int(np.argmax(bad)))
        return stepped

    def run(self, grid: EnvelopeGrid) -> RunResult:
        """March from the input grid to settings.depth, capturing snapshots."""
        settings = self.settings
        grid = self.prepare(grid)
        steps = settings.steps
        dz = settings.depth / steps if steps else 0.0
        wanted = {0, steps} | {round(z / dz) if dz else 0 for z in settings.snapshots}

        self._worst = None
        snapshots = [Snapshot(grid.z, grid)] if 0 in wanted else []
        metrics = [pulse_metrics(grid)]
        report_every = max(1, steps // PROGRESS_STEPS)

        for step in range(1, steps + 1):
            grid = self.field_step(grid, dz)
            if step == steps:
                # the last step lands exactly on the requested depth
                grid = grid.evolve(grid.omega_e, grid.omega_b, settings.depth, grid.omega_c)
            metrics.append(pulse_metrics(grid))
            if step in wanted:
                snapshots.append(Snapshot(grid.z, grid))
            if settings.progress and step % report_every == 0:
                print(f"   🌊 z = {grid.z:.4e} ({100 * step // steps}%)  peak {metrics[-1]['peak']:.4e}")

        self._check_states(self.atomic_states(grid), grid.z)
        return RunResult(
            snapshots=snapshots,
            metrics=metrics,
            final=grid,
            drift=self._worst,
            steps=steps,
            dz=dz,
        )
