"""Runs one scenario: dispatches on mode, writes CSVs, a manifest and console tables."""
from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.integrate import cumulative_trapezoid
from tabulate import tabulate

from config import VERSION, medium_dark_state
from dispersion import beta, detuning_grid, group_index, propagate_analytic, sweep_beta, sweep_index
from envelope import EnvelopeGrid, Snapshot, gaussian_pulse
from linear_response import sweep_response
from maxwell_bloch import MaxwellBlochSolver, RunResult, SolverSettings
from scenario import ScenarioConfig, config_dict
from types_ import Manifest, OutputRecord

UTC = timezone.utc  # datetime.UTC alias is 3.11+

FLOAT_FORMAT = "%.8e"        # 9 significant digits
SNAPSHOT_COLUMNS = [
    "tau", "Re_OmegaE", "Im_OmegaE", "abs_OmegaE", "phase_OmegaE", "Re_OmegaB", "Im_OmegaB",
]
METRIC_COLUMNS = ["z", "peak", "centroid", "phase", "energy"]
REFERENCE_COLUMNS = ["ref_delay", "ref_phase", "ref_log_gain"]
TABLE_ROWS = 10


def write_diagnostics(out_dir: str | Path, error: Exception, cfg: ScenarioConfig | None = None) -> Path:
    """Plain-text failure report left next to any partial output."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "diagnostics.txt"
    lines = [f"error: {type(error).__name__}", f"message: {error}"]
    for attr in ("z", "tau_index", "path", "line"):
        if getattr(error, attr, None) is not None:
            lines.append(f"{attr}: {getattr(error, attr)}")
    if cfg is not None:
        lines.append(f"mode: {cfg.mode}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"📝 Wrote diagnostics to {path}")
    return path


class ScenarioRunner:
    """Executes a parsed scenario and records every file it writes."""

    def __init__(self, cfg: ScenarioConfig, out_dir: str | Path | None = None, seed: int | None = None):
        self.cfg = cfg
        self.out_dir = Path(out_dir or cfg.output.dir)
        self.seed = seed
        self.files: list[OutputRecord] = []

    # === Output ============================================================

    def save_csv(self, df: pd.DataFrame, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8")
        self.files.append(OutputRecord(path=name, rows=len(df), bytes=path.stat().st_size))
        print(f"💾 Saved {len(df)} records to {path}")
        return path

    def write_manifest(self) -> Path:
        manifest = Manifest(
            version=VERSION,
            mode=self.cfg.mode,
            created=datetime.now(UTC).isoformat(timespec="seconds"),
            seed=self.seed,
            config=config_dict(self.cfg),
            files=self.files,
        )
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        print(f"📝 Wrote manifest with {len(self.files)} files to {path}")
        return path

    @staticmethod
    def display(df: pd.DataFrame, title: str, rows: int = TABLE_ROWS) -> None:
        print(f"\n{'=' * 60}")
        print(f"📊 {title}")
        print(f"{'=' * 60}")
        if len(df) > rows:
            step = max(1, len(df) // rows)
            df = pd.concat([df.iloc[::step], df.iloc[[-1]]]).drop_duplicates()
        print(tabulate(df, headers="keys", tablefmt="pretty", showindex=False, floatfmt=".4e"))

    # === Modes =============================================================

    def run(self) -> list[OutputRecord]:
        cfg = self.cfg
        print("=" * 60)
        print(f"🚀 {cfg.mode.upper()} ({cfg.medium.polarization} circular, L = {cfg.medium.density})")
        print("=" * 60)
        if cfg.mode == "response-sweep":
            self.run_response()
        elif cfg.mode == "beta-sweep":
            self.run_beta()
        else:
            self.run_propagate()
        self.write_manifest()
        print("✅ Done")
        return self.files

    def run_response(self) -> None:
        cfg = self.cfg
        dp = cfg.sweep.dp_grid()
        response = sweep_response(cfg.medium, dp, cfg.sweep.phi0_grid())
        self.save_csv(response, "response.csv")
        index = sweep_index(cfg.medium, dp)
        self.save_csv(index, "index.csv")
        self.display(response[["dp", "phi0", "Re_chiE", "Im_chiE", "Re_xiEH", "Im_xiEH"]],
                     "Response coefficients")

    def run_beta(self) -> None:
        cfg = self.cfg
        table = sweep_beta(cfg.medium, cfg.sweep.phi0_grid())
        self.save_csv(table, "beta.csv")
        self.display(table, "beta against closed-loop phase")

    def input_grid(self) -> EnvelopeGrid:
        cfg = self.cfg
        tau = cfg.grid.tau
        omega_e, omega_b = gaussian_pulse(tau, cfg.pulse.tau0, cfg.pulse.sigma, cfg.pulse.amplitude,
                                          cfg.medium.sign, cfg.medium.alpha_fs)
        return EnvelopeGrid(tau, omega_e, omega_b)

    def run_propagate(self) -> RunResult:
        cfg = self.cfg
        medium = cfg.medium
        schedule = cfg.phase_schedule
        dark = medium_dark_state(medium)
        ng, vg = group_index(medium, dark) if medium.omega_c_mag > 0 else (0.0, None)
        print(f"   ng = {ng:.4e}, vg = {vg if vg is None else f'{vg:.4e} m/s'}, "
              f"beta(phi0 = {medium.phi0:.4f}) = {beta(medium, dark):.4e}")
        print(f"   depth = {cfg.grid.depth:.4e} c/gamma "
              f"({cfg.grid.depth * medium.length_unit:.4e} m), dz = {cfg.grid.dz:.4e}")

        settings = SolverSettings(
            dz=cfg.grid.dz,
            depth=cfg.grid.depth,
            snapshots=cfg.grid.snapshots,
            control_source=cfg.grid.control_source,
            positivity_tol=cfg.grid.positivity_tol,
            progress=True,
        )
        source = self.input_grid()
        result = MaxwellBlochSolver(medium, schedule, settings).run(source)

        metrics = self.metrics_frame(result, ng)
        self.save_csv(metrics, "metrics.csv")
        for i, snap in enumerate(result.snapshots):
            self.save_csv(self.snapshot_frame(snap, source, ng), f"snapshot_{i:03d}_z{snap.z:.4e}.csv")

        final = result.final
        print(f"\n   chirality residual {final.chirality_residual(medium.sign, medium.alpha_fs):.2e}, "
              f"trace drift {result.drift.trace:.2e}, min eigenvalue {result.drift.min_eigenvalue:.2e}")
        self.display(metrics, "Pulse metrics along z")
        return result

    def reference_curves(self, z: np.ndarray, centroid0: float, ng: float) -> pd.DataFrame:
        """Analytic delay, accumulated phase and log-gain along the predicted pulse centre."""
        medium = self.cfg.medium
        dark = medium_dark_state(medium)
        schedule = self.cfg.phase_schedule
        phi0 = np.atleast_1d(schedule(centroid0 + (ng + 1) * z))
        rate = medium.k0 * np.array([beta(medium, dark, float(p)) for p in phi0])
        return pd.DataFrame({
            "ref_delay": ng * z,
            "ref_phase": cumulative_trapezoid(rate.real, z, initial=0.0),
            "ref_log_gain": cumulative_trapezoid(-rate.imag, z, initial=0.0),
        }, columns=REFERENCE_COLUMNS)

    def metrics_frame(self, result: RunResult, ng: float) -> pd.DataFrame:
        df = pd.DataFrame(result.metrics, columns=METRIC_COLUMNS)
        df["phase"] = np.unwrap(df["phase"].to_numpy())
        refs = self.reference_curves(df["z"].to_numpy(), float(df["centroid"].iloc[0]), ng)
        return pd.concat([df, refs], axis=1)

    def snapshot_frame(self, snap: Snapshot, source: EnvelopeGrid, ng: float) -> pd.DataFrame:
        """Envelope columns plus the spectral (full) and frozen-coefficient overlays."""
        grid = snap.grid
        df = pd.DataFrame({
            "tau": grid.tau,
            "Re_OmegaE": grid.omega_e.real,
            "Im_OmegaE": grid.omega_e.imag,
            "abs_OmegaE": np.abs(grid.omega_e),
            "phase_OmegaE": np.angle(grid.omega_e),
            "Re_OmegaB": grid.omega_b.real,
            "Im_OmegaB": grid.omega_b.imag,
        }, columns=SNAPSHOT_COLUMNS)
        medium = self.cfg.medium
        schedule = self.cfg.phase_schedule
        if schedule.is_constant:
            full = propagate_analytic(source, medium, schedule.segments[0][1], snap.z, mode="full")
            df["Re_OmegaE_full"] = full.omega_e.real
            df["Im_OmegaE_full"] = full.omega_e.imag
        frozen = self.frozen_reference(source, snap.z, ng)
        df["Re_OmegaE_frozen"] = frozen.real
        df["Im_OmegaE_frozen"] = frozen.imag
        return df

    def frozen_reference(self, source: EnvelopeGrid, z: float, ng: float) -> np.ndarray:
        """Input delayed by ng z with the beta phase and gain accumulated under the schedule."""
        refs = self.reference_curves(np.linspace(0.0, z, 65), self.cfg.pulse.tau0, ng)
        exponent = refs["ref_phase"].iloc[-1] - 1j * refs["ref_log_gain"].iloc[-1]
        dp = detuning_grid(source.n, source.d_tau)
        delayed = np.fft.ifft(np.fft.fft(source.omega_e) * np.exp(1j * ng * dp * z))
        return delayed * np.exp(1j * exponent)
