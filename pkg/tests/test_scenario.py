"""Tests for scenario parsing, validation and serialization."""
from __future__ import annotations

import math
from pathlib import Path

import pytest

from config import medium_dark_state
from dispersion import group_index
from scenario import (
    MODES,
    ConfigError,
    default_dz,
    load_config,
    parse_config,
    serialize_config,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def test_fig2_scenario():
    cfg = load_config(SCENARIOS / "fig2.yaml")
    assert cfg.mode == "propagate"
    assert cfg.medium.gamma21 == 0.0
    assert cfg.medium.phi0 == pytest.approx(math.pi / 2)
    assert cfg.grid.n_tau == 2048 and cfg.grid.d_tau == 0.4
    assert cfg.grid.dz == 1.591e-07
    assert len(cfg.grid.snapshots) == 5
    assert cfg.grid.tau[-1] == pytest.approx(0.4 * 2047)
    assert cfg.schedule is None and cfg.phase_schedule.is_constant
    assert cfg.output.dir == "output/fig2"


def test_fig3_schedule():
    cfg = load_config(SCENARIOS / "fig3.yaml", "propagate")
    assert not cfg.phase_schedule.is_constant
    assert [s for s, _ in cfg.schedule.segments] == [0.0, 400.0, 800.0]
    assert cfg.phase_schedule(600.0) == 0.0


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.yaml")), ids=lambda p: p.name)
def test_shipped_scenarios_load(path):
    cfg = load_config(path)
    assert cfg.mode in MODES


def test_sweep_defaults():
    cfg = parse_config("mode: beta-sweep\n")
    assert len(cfg.sweep.phi0_grid()) == 361
    assert cfg.sweep.phi0_grid()[0] == pytest.approx(-math.pi)
    assert cfg.sweep.dp_grid()[100] == pytest.approx(0.0)

    cfg = load_config(SCENARIOS / "response.yaml")
    assert list(cfg.sweep.phi0_grid()) == pytest.approx([0.0, math.pi / 2])


def test_empty_document_needs_a_mode():
    with pytest.raises(ConfigError, match="missing required keys: mode"):
        parse_config("")
    assert parse_config("", "beta-sweep").mode == "beta-sweep"


def test_invalid_polarization_reports_path_and_line():
    text = "mode: beta-sweep\nmedium:\n  gamma21: 0.0\n  polarization: up\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.path == "medium.polarization"
    assert err.value.line == 4
    assert str(err.value).startswith("line 4: medium.polarization")


@pytest.mark.parametrize(
    ("text", "path"),
    [
        ("mode: beta-sweep\nmedium:\n  colour: red\n", "medium.colour"),
        ("mode: beta-sweep\nextra: 1\n", "extra"),
        ("mode: propagate\npulse: {}\ngrid:\n  n_tau: 1000\n", "grid.n_tau"),
        ("mode: propagate\npulse: {sigma: -1.0}\ngrid: {}\n", "pulse.sigma"),
        ("mode: propagate\npulse: {amplitude: 0.0}\ngrid: {}\n", "pulse.amplitude"),
        ("mode: beta-sweep\nmedium:\n  density: fast\n", "medium.density"),
        ("mode: beta-sweep\ngrid:\n  depth: 1.0\n  snapshots: [2.0]\n", "grid.snapshots[0]"),
        ("mode: response-sweep\nsweep:\n  dp_min: 1.0\n  dp_max: -1.0\n", "sweep.dp_max"),
        ("mode: sideways\n", "mode"),
    ],
)
def test_rejects_invalid_documents(text, path):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.path == path


def test_unknown_key_line_number():
    with pytest.raises(ConfigError) as err:
        parse_config("mode: beta-sweep\nmedium:\n  gamma21: 0.0\n  colour: red\n")
    assert err.value.line == 4


def test_syntax_error_carries_line():
    with pytest.raises(ConfigError, match="YAML syntax error") as err:
        parse_config("mode: propagate\n\tgrid: 1\n")
    assert err.value.line == 2


def test_schedule_errors():
    text = ("mode: beta-sweep\nschedule:\n  segments:\n    - {start: 0.0, phi0: 0.0}\n"
            "    - {start: 2.0, phi0: 1.0}\n")
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.path == "schedule.segments"
    with pytest.raises(ConfigError):
        parse_config("mode: beta-sweep\nschedule:\n  segments:\n    - {start: 0.0}\n")


def test_mode_must_match_the_verb():
    with pytest.raises(ConfigError, match="does not match") as err:
        parse_config("mode: beta-sweep\n", "propagate")
    assert err.value.line == 1


def test_propagate_needs_pulse_and_grid():
    with pytest.raises(ConfigError, match="grid") as err:
        parse_config("mode: propagate\npulse: {sigma: 10.0}\n")
    assert err.value.path == "grid"


def test_default_step(fig_medium):
    cfg = parse_config("mode: propagate\npulse: {sigma: 50.0}\ngrid: {depth: 0.01}\n"
                       "medium: {gamma21: 0.0}\n")
    ng, _ = group_index(fig_medium, medium_dark_state(fig_medium))
    assert cfg.grid.dz == pytest.approx(0.05 * 50.0 / ng, rel=1e-9)
    # never longer than the run itself
    assert default_dz(cfg.medium, cfg.pulse, 1e-6) == 1e-6


def test_serialization_round_trip():
    for name in ("fig2.yaml", "fig3.yaml", "response.yaml"):
        cfg = load_config(SCENARIOS / name)
        assert parse_config(serialize_config(cfg)) == cfg


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.yaml")


def test_default_grid_spans_the_pulse():
    cfg = parse_config("mode: propagate\npulse: {}\ngrid: {}\n")
    assert (cfg.grid.n_tau, cfg.grid.d_tau) == (2048, 0.4)
    assert cfg.grid.n_tau * cfg.grid.d_tau >= 16 * cfg.pulse.sigma
