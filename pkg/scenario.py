"""Scenario documents: YAML schema, validation and round-trip serialization.

Schema (every block optional unless the mode needs it):

    mode: propagate | response-sweep | beta-sweep
    medium:   MediumParams field names (rates in gamma, lambda0 in m, density = L)
    pulse:    {sigma, amplitude, tau0}
    schedule: {ramp, segments: [{start, phi0}, ...]}
    grid:     {n_tau, d_tau, tau_start, dz, depth, snapshots, control_source, positivity_tol}
    sweep:    {dp_min, dp_max, dp_points, phi0_values, phi0_points}
    output:   {dir}
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from config import MediumParams, ParameterError, medium_dark_state, validate
from dispersion import beta, group_index
from envelope import PhaseSchedule
from maxwell_bloch import POSITIVITY_TOL
from types_ import Mode

MODES: tuple[str, ...] = ("response-sweep", "beta-sweep", "propagate")
REQUIRED_BLOCKS: dict[str, tuple[str, ...]] = {
    "response-sweep": ("sweep",),
    "beta-sweep": (),
    "propagate": ("pulse", "grid"),
}
STEP_PHASE = 0.05            # rad of envelope phase per default z-step


class ConfigError(ValueError):
    """Invalid scenario document; path is the dotted key, line is 1-based."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        location = ""
        if path:
            location += f"{path}: "
        if line is not None:
            location = f"line {line}: " + location
        super().__init__(location + message)
        self.path = path
        self.line = line


@dataclass(frozen=True)
class PulseConfig:
    sigma: float = 50.0
    amplitude: float = 1e-9
    tau0: float = 200.0


@dataclass(frozen=True)
class GridConfig:
    n_tau: int = 2048
    d_tau: float = 0.4
    tau_start: float = 0.0
    dz: float | None = None
    depth: float = 0.0
    snapshots: tuple[float, ...] = ()
    control_source: bool = False
    positivity_tol: float = POSITIVITY_TOL

    @property
    def tau(self) -> np.ndarray:
        return self.tau_start + self.d_tau * np.arange(self.n_tau)


@dataclass(frozen=True)
class SweepConfig:
    dp_min: float = -5.0
    dp_max: float = 5.0
    dp_points: int = 201
    phi0_values: tuple[float, ...] | None = None
    phi0_points: int = 361

    def dp_grid(self) -> np.ndarray:
        return np.linspace(self.dp_min, self.dp_max, self.dp_points)

    def phi0_grid(self) -> np.ndarray:
        if self.phi0_values is not None:
            return np.asarray(self.phi0_values, dtype=float)
        return np.linspace(-math.pi, math.pi, self.phi0_points)


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "output"


@dataclass(frozen=True)
class ScenarioConfig:
    mode: Mode
    medium: MediumParams = field(default_factory=MediumParams)
    pulse: PulseConfig = field(default_factory=PulseConfig)
    schedule: PhaseSchedule | None = None
    grid: GridConfig = field(default_factory=GridConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def phase_schedule(self) -> PhaseSchedule:
        return self.schedule or PhaseSchedule.constant(self.medium.phi0)


# === Line lookup ===========================================================

def _line_index(text: str) -> dict[str, int]:
    """Dotted key path -> 1-based line of its value."""
    index: dict[str, int] = {}
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return index

    def walk(node, prefix: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                path = f"{prefix}.{key.value}" if prefix else str(key.value)
                index[path] = key.start_mark.line + 1
                walk(value, path)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                path = f"{prefix}[{i}]"
                index[path] = item.start_mark.line + 1
                walk(item, path)

    if root is not None:
        walk(root, "")
    return index


class _Reader:
    """Typed access to a parsed document that reports errors with path and line."""

    def __init__(self, lines: dict[str, int]):
        self.lines = lines

    def error(self, message: str, path: str) -> ConfigError:
        line = self.lines.get(path)
        if line is None and "." in path:
            line = self.lines.get(path.rsplit(".", 1)[0])
        return ConfigError(message, path, line)

    def block(self, doc: dict, name: str, allowed) -> dict:
        value = doc.get(name) or {}
        if not isinstance(value, dict):
            raise self.error("expected a mapping", name)
        for key in value:
            if key not in allowed:
                raise self.error(f"unknown key (allowed: {', '.join(sorted(allowed))})", f"{name}.{key}")
        return value

    def number(self, value: Any, path: str) -> float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.error(f"expected a number, got {value!r}", path)
        if not math.isfinite(value):
            raise self.error(f"expected a finite number, got {value!r}", path)
        return float(value)

    def integer(self, value: Any, path: str) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(f"expected an integer, got {value!r}", path)
        return value

    def flag(self, value: Any, path: str) -> bool:
        if not isinstance(value, bool):
            raise self.error(f"expected true or false, got {value!r}", path)
        return value

    def numbers(self, value: Any, path: str) -> tuple[float, ...]:
        if not isinstance(value, list):
            raise self.error("expected a list of numbers", path)
        return tuple(self.number(v, f"{path}[{i}]") for i, v in enumerate(value))


# === Blocks ================================================================

def _medium(reader: _Reader, doc: dict) -> MediumParams:
    names = {f.name for f in fields(MediumParams)}
    raw = reader.block(doc, "medium", names)
    values: dict[str, Any] = {}
    for key, value in raw.items():
        path = f"medium.{key}"
        if key == "polarization":
            values[key] = value
        elif key == "lfc_enabled":
            values[key] = reader.flag(value, path)
        else:
            values[key] = reader.number(value, path)
    try:
        return validate(MediumParams(**values))
    except ParameterError as exc:
        raise reader.error(str(exc).split(": ", 1)[-1], f"medium.{exc.field}") from exc


def _pulse(reader: _Reader, doc: dict) -> PulseConfig:
    raw = reader.block(doc, "pulse", {f.name for f in fields(PulseConfig)})
    values = {k: reader.number(v, f"pulse.{k}") for k, v in raw.items()}
    cfg = PulseConfig(**values)
    if cfg.sigma <= 0:
        raise reader.error("sigma must be > 0", "pulse.sigma")
    if cfg.amplitude <= 0:
        raise reader.error("amplitude must be > 0", "pulse.amplitude")
    return cfg


def _schedule(reader: _Reader, doc: dict) -> PhaseSchedule | None:
    if doc.get("schedule") is None:
        return None
    raw = reader.block(doc, "schedule", {"ramp", "segments"})
    ramp = reader.number(raw.get("ramp", 5.0), "schedule.ramp")
    segments = raw.get("segments")
    if not isinstance(segments, list) or not segments:
        raise reader.error("expected a non-empty list of {start, phi0}", "schedule.segments")
    pairs = []
    for i, item in enumerate(segments):
        path = f"schedule.segments[{i}]"
        if not isinstance(item, dict) or set(item) != {"start", "phi0"}:
            raise reader.error("each segment needs exactly the keys start and phi0", path)
        pairs.append((reader.number(item["start"], f"{path}.start"),
                      reader.number(item["phi0"], f"{path}.phi0")))
    try:
        return PhaseSchedule(segments=tuple(pairs), ramp=ramp)
    except ValueError as exc:
        raise reader.error(str(exc), "schedule.segments") from exc


def _grid(reader: _Reader, doc: dict) -> GridConfig:
    raw = reader.block(doc, "grid", {f.name for f in fields(GridConfig)})
    values: dict[str, Any] = {}
    for key, value in raw.items():
        path = f"grid.{key}"
        if key == "n_tau":
            values[key] = reader.integer(value, path)
        elif key == "snapshots":
            values[key] = reader.numbers(value, path)
        elif key == "control_source":
            values[key] = reader.flag(value, path)
        elif key == "dz" and value is None:
            values[key] = None
        else:
            values[key] = reader.number(value, path)
    cfg = GridConfig(**values)
    if cfg.n_tau < 2 or cfg.n_tau & (cfg.n_tau - 1):
        raise reader.error(f"n_tau must be a power of two, got {cfg.n_tau}", "grid.n_tau")
    if cfg.d_tau <= 0:
        raise reader.error("d_tau must be > 0", "grid.d_tau")
    if cfg.depth < 0:
        raise reader.error("depth must be >= 0", "grid.depth")
    if cfg.dz is not None and cfg.dz <= 0:
        raise reader.error("dz must be > 0", "grid.dz")
    if cfg.positivity_tol < 0:
        raise reader.error("positivity_tol must be >= 0", "grid.positivity_tol")
    for i, z in enumerate(cfg.snapshots):
        if not 0 <= z <= cfg.depth:
            raise reader.error(f"snapshot depth {z!r} outside [0, depth]", f"grid.snapshots[{i}]")
    return cfg


def _sweep(reader: _Reader, doc: dict) -> SweepConfig:
    raw = reader.block(doc, "sweep", {f.name for f in fields(SweepConfig)})
    values: dict[str, Any] = {}
    for key, value in raw.items():
        path = f"sweep.{key}"
        if key in ("dp_points", "phi0_points"):
            values[key] = reader.integer(value, path)
        elif key == "phi0_values":
            values[key] = reader.numbers(value, path)
        else:
            values[key] = reader.number(value, path)
    cfg = SweepConfig(**values)
    if cfg.dp_points < 1:
        raise reader.error("dp_points must be >= 1", "sweep.dp_points")
    if cfg.phi0_points < 1:
        raise reader.error("phi0_points must be >= 1", "sweep.phi0_points")
    if cfg.dp_max < cfg.dp_min:
        raise reader.error("dp_max must be >= dp_min", "sweep.dp_max")
    return cfg


def _output(reader: _Reader, doc: dict) -> OutputConfig:
    raw = reader.block(doc, "output", {"dir"})
    if "dir" in raw and not isinstance(raw["dir"], str):
        raise reader.error("expected a path string", "output.dir")
    return OutputConfig(**raw)


def default_dz(medium: MediumParams, pulse: PulseConfig, depth: float) -> float:
    """z-step keeping the per-step envelope phase below STEP_PHASE.

    Both the phase winding k0 |beta| and the delay ng across the pulse width
    contribute.
    """
    dark = medium_dark_state(medium)
    rate = medium.k0 * abs(beta(medium, dark))
    if medium.omega_c_mag > 0:
        rate = max(rate, group_index(medium, dark)[0] / pulse.sigma)
    if rate == 0:
        return depth if depth > 0 else 1.0
    dz = STEP_PHASE / rate
    return min(dz, depth) if depth > 0 else dz


# === Public API ============================================================

def parse_config(text: str, default_mode: Mode | None = None) -> ScenarioConfig:
    """Validate a scenario document and apply defaults.

    Raises:
        ConfigError: syntax error (with line), unknown key or invalid value
            (with dotted path).
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', None) or exc}", line=line) from exc

    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("top level must be a mapping")
    reader = _Reader(_line_index(text))

    allowed = {f.name for f in fields(ScenarioConfig)}
    for key in doc:
        if key not in allowed:
            raise reader.error(f"unknown key (allowed: {', '.join(sorted(allowed))})", str(key))

    mode = doc.get("mode", default_mode)
    if mode is None:
        raise ConfigError("missing required keys: mode (" + " | ".join(MODES) + ")", "mode")
    if mode not in MODES:
        raise reader.error(f"unknown mode {mode!r}, expected one of {', '.join(MODES)}", "mode")
    if default_mode is not None and mode != default_mode:
        raise reader.error(f"document mode {mode!r} does not match the requested {default_mode!r}", "mode")
    missing = [b for b in REQUIRED_BLOCKS[mode] if doc.get(b) is None]
    if missing:
        raise ConfigError(f"mode {mode!r} needs the blocks: {', '.join(missing)}", missing[0])

    medium = _medium(reader, doc)
    pulse = _pulse(reader, doc)
    grid = _grid(reader, doc)
    if mode == "propagate" and grid.dz is None:
        grid = replace(grid, dz=default_dz(medium, pulse, grid.depth))

    return ScenarioConfig(
        mode=mode,
        medium=medium,
        pulse=pulse,
        schedule=_schedule(reader, doc),
        grid=grid,
        sweep=_sweep(reader, doc),
        output=_output(reader, doc),
    )


def load_config(path: str | Path, default_mode: Mode | None = None) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_config(text, default_mode)


def config_dict(cfg: ScenarioConfig) -> dict:
    """Plain-data view of a resolved config (manifest and serialization)."""
    doc: dict[str, Any] = {
        "mode": cfg.mode,
        "medium": asdict(cfg.medium),
        "pulse": asdict(cfg.pulse),
        "grid": {**asdict(cfg.grid), "snapshots": list(cfg.grid.snapshots)},
        "sweep": {**asdict(cfg.sweep),
                  "phi0_values": None if cfg.sweep.phi0_values is None else list(cfg.sweep.phi0_values)},
        "output": asdict(cfg.output),
    }
    if cfg.schedule is not None:
        doc["schedule"] = {
            "ramp": cfg.schedule.ramp,
            "segments": [{"start": s, "phi0": v} for s, v in cfg.schedule.segments],
        }
    if doc["sweep"]["phi0_values"] is None:
        del doc["sweep"]["phi0_values"]
    return doc


def serialize_config(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(config_dict(cfg), sort_keys=False)
