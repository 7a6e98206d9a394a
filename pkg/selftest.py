"""Acceptance suites: closed forms against the oracle, dispersion identities, figure runs.

    python main.py selftest            # everything, including the Maxwell-Bloch figure runs
    python main.py selftest --quick    # analytic and oracle suites only
"""
from __future__ import annotations

import math
import time
import warnings
from collections.abc import Callable
from dataclasses import replace
from pathlib import Path

import numpy as np

from config import DEFAULT_MEDIUM, MediumParams, medium_dark_state, validate
from dispersion import beta, eta, group_index, medium_eta, n_exact, n_linear, propagate_analytic, sweep_beta
from envelope import EnvelopeGrid, PhaseSchedule, gaussian_pulse
from linear_response import NonlinearProbeWarning, ResponseCoefficients, response_coefficients, steady_state_oracle
from maxwell_bloch import MaxwellBlochSolver, RunResult, SolverSettings
from runner import ScenarioRunner
from scenario import ScenarioConfig, load_config

SCENARIOS = Path(__file__).parent / "scenarios"

ORACLE_DRAWS = 100
QUICK_ORACLE_DRAWS = 20
ORACLE_DETUNINGS = 5
ORACLE_RTOL = 1e-8

Result = tuple[bool, str]


def random_medium(rng: np.random.Generator, lfc: bool = False) -> MediumParams:
    """A validated medium away from singular corners (gamma21 > 0, |OmegaC| > 0)."""
    return validate(MediumParams(
        gamma21=rng.uniform(1e-4, 1e-2),
        gamma_dec=rng.uniform(0.0, 1.0),
        density=rng.uniform(1e-3, 5e-2),
        omega1_mag=rng.uniform(5e-3, 5e-2),
        omega2_mag=rng.uniform(5e-3, 5e-2),
        omega_c_mag=rng.uniform(0.5, 3.0),
        phi1=rng.uniform(-math.pi, math.pi),
        phi2=rng.uniform(-math.pi, math.pi),
        phi_c=rng.uniform(-math.pi, math.pi),
        polarization="left" if rng.random() < 0.5 else "right",
        lfc_enabled=lfc,
    ))


def relative_error(a: ResponseCoefficients, b: ResponseCoefficients) -> float:
    worst = 0.0
    for name in ("chi_e", "chi_h", "xi_eh", "xi_he"):
        x, y = getattr(a, name), getattr(b, name)
        worst = max(worst, abs(x - y) / abs(y))
    return worst


# === Analytic suites =======================================================

def check_oracle(rng: np.random.Generator, draws: int) -> Result:
    worst = 0.0
    for _ in range(draws):
        params = random_medium(rng)
        dark = medium_dark_state(params)
        for dp in rng.uniform(-3.0, 3.0, ORACLE_DETUNINGS):
            closed = response_coefficients(params, dark, float(dp))
            oracle = steady_state_oracle(params, float(dp))
            worst = max(worst, relative_error(oracle, closed))
    return worst < ORACLE_RTOL, f"{draws}x{ORACLE_DETUNINGS} draws, max relative error {worst:.2e}"


def check_index_orders(rng: np.random.Generator) -> Result:
    base = ResponseCoefficients(chi_e=1.0 + 0.3j, chi_h=0.3 - 0.1j, xi_eh=0.5 + 0.2j,
                                xi_he=-0.4 + 0.1j, dp=0.0, phi0=0.0)
    scales = np.logspace(-4, -2, 9)
    errors = []
    exact_gap = 0.0
    for m in scales:
        resp = ResponseCoefficients(base.chi_e * m, base.chi_h * m, base.xi_eh * m, base.xi_he * m, 0.0, 0.0)
        errors.append(abs(n_exact(resp, "left") - n_linear(resp, "left")))
        lin = 1 + eta(resp, 0.0, "left", 1.0, linearized=True)
        exact_gap = max(exact_gap, abs(lin - n_linear(resp, "left")))
    slope = float(np.polyfit(np.log(scales), np.log(errors), 1)[0])
    ok = 1.9 <= slope <= 2.1 and exact_gap <= 1e-12
    return ok, f"log-log slope {slope:.3f}, linearized eta vs n_linear gap {exact_gap:.1e}"


def check_chi_h_phase() -> Result:
    params = validate(DEFAULT_MEDIUM)
    dark = medium_dark_state(params)
    values = [response_coefficients(params, dark, 0.3, p).chi_h for p in np.linspace(-math.pi, math.pi, 32)]
    spread = max(abs(v - values[0]) for v in values) / abs(values[0])
    return spread < 1e-12, f"relative spread {spread:.1e}"


def check_group_slope() -> Result:
    params = validate(replace(DEFAULT_MEDIUM, gamma21=0.0))
    dark = medium_dark_state(params)
    h = 1e-4
    slope = (response_coefficients(params, dark, h).chi_e.real
             - response_coefficients(params, dark, -h).chi_e.real) / (2 * h)
    ng, _ = group_index(params, dark)
    err = abs(params.omega0 / 2 * slope - ng) / ng
    return err < 1e-3, f"ng = {ng:.5e}, finite-difference relative error {err:.1e}"


def check_beta_curve() -> Result:
    params = validate(replace(DEFAULT_MEDIUM, gamma21=0.0))
    phi0 = np.linspace(-math.pi, math.pi, 361)
    table = sweep_beta(params, phi0)
    step = phi0[1] - phi0[0]
    re, im = table["Re_beta"].to_numpy(), table["Im_beta"].to_numpy()
    scale = np.abs(re + 1j * im).max()

    def crossings(values):
        near = np.abs(values) <= 1e-10 * scale
        sign_change = np.nonzero(np.diff(np.sign(values)) != 0)[0]
        return np.union1d(phi0[near], phi0[sign_change])

    ok = all(np.any(np.abs(crossings(re) - x) <= step) for x in (-math.pi, 0.0, math.pi))
    ok &= all(np.any(np.abs(crossings(im) - x) <= step) for x in (-math.pi / 2, math.pi / 2))
    dark = medium_dark_state(params)
    at_half = beta(params, dark, math.pi / 2)
    at_zero = beta(params, dark, 0.0)
    ok &= at_half.real > 0 and abs(at_half.imag) <= 1e-10 * abs(at_half)
    ok &= at_zero.imag < 0 and abs(at_zero.real) <= 1e-10 * abs(at_zero)
    return bool(ok), f"beta(pi/2) = {at_half:.4e}, beta(0) = {at_zero:.4e}"


def check_symmetries(rng: np.random.Generator) -> Result:
    worst_flip = 0.0
    worst_inversion = 0.0
    for _ in range(10):
        params = random_medium(rng)
        dark = medium_dark_state(params)
        resp = response_coefficients(params, dark, float(rng.uniform(-2, 2)))
        flipped = replace(resp, xi_eh=-resp.xi_eh, xi_he=-resp.xi_he)
        worst_flip = max(worst_flip, abs(medium_eta(resp, "left") - medium_eta(flipped, "right")),
                         abs(n_exact(resp, "left") - n_exact(flipped, "right")))

        inverted = replace(params, phi1=params.phi1 + math.pi, phi2=params.phi2 + math.pi,
                           phi_c=params.phi_c + math.pi)
        a = steady_state_oracle(params, 0.5)
        b = steady_state_oracle(inverted, 0.5)
        worst_inversion = max(worst_inversion,
                              abs(a.xi_eh + b.xi_eh) / abs(a.xi_eh), abs(a.xi_he + b.xi_he) / abs(a.xi_he),
                              abs(a.chi_e - b.chi_e) / abs(a.chi_e))
    ok = worst_flip == 0.0 and worst_inversion < 1e-8
    return ok, f"handedness flip gap {worst_flip:.1e}, inversion error {worst_inversion:.1e}"


def check_vacuum_run() -> Result:
    params = validate(replace(DEFAULT_MEDIUM, density=0.0))
    tau = 0.25 * np.arange(256)
    omega_e, omega_b = gaussian_pulse(tau, 32.0, 5.0, 1e-9, params.sign, params.alpha_fs)
    source = EnvelopeGrid(tau, omega_e, omega_b)
    solver = MaxwellBlochSolver(params, PhaseSchedule.constant(params.phi0), SolverSettings(dz=1e-3, depth=5e-3))
    result = solver.run(source)
    same = np.array_equal(result.final.omega_e, omega_e) and np.array_equal(result.final.omega_b, omega_b)
    return same, f"{result.steps} steps, output {'identical' if same else 'changed'}"


# === Figure runs ===========================================================

def _run(cfg: ScenarioConfig) -> tuple[EnvelopeGrid, RunResult]:
    settings = SolverSettings(dz=cfg.grid.dz, depth=cfg.grid.depth,
                              positivity_tol=cfg.grid.positivity_tol, progress=True)
    source = ScenarioRunner(cfg).input_grid()
    return source, MaxwellBlochSolver(cfg.medium, cfg.phase_schedule, settings).run(source)


def _columns(result: RunResult) -> dict[str, np.ndarray]:
    return {
        "z": np.array([m["z"] for m in result.metrics]),
        "peak": np.array([m["peak"] for m in result.metrics]),
        "centroid": np.array([m["centroid"] for m in result.metrics]),
        "phase": np.unwrap([m["phase"] for m in result.metrics]),
    }


def _fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Slope and R^2 of a straight-line fit."""
    slope, offset = np.polyfit(x, y, 1)
    residual = y - (slope * x + offset)
    spread = np.sum((y - y.mean()) ** 2)
    return float(slope), float(1 - residual @ residual / spread) if spread else 1.0


def check_fig2(cfg: ScenarioConfig | None = None) -> Result:
    cfg = cfg or load_config(SCENARIOS / "fig2.yaml")
    medium = cfg.medium
    dark = medium_dark_state(medium)
    ng, _ = group_index(medium, dark)
    b = beta(medium, dark)
    source, result = _run(cfg)
    m = _columns(result)

    delay = m["centroid"][-1] - m["centroid"][0]
    delay_err = abs(delay - ng * m["z"][-1]) / (ng * m["z"][-1])
    peak_dev = float(np.max(np.abs(m["peak"] / m["peak"][0] - 1)))
    slope, r2 = _fit(m["z"], m["phase"])
    slope_err = abs(slope - b.real * medium.k0) / (b.real * medium.k0)
    chirality = result.final.chirality_residual(medium.sign, medium.alpha_fs)

    analytic = propagate_analytic(source, medium, medium.phi0, result.final.z)
    magnitude = np.abs(analytic.omega_e)
    fwhm = magnitude >= magnitude.max() / 2
    deviation = float(np.max(np.abs(result.final.omega_e - analytic.omega_e)[fwhm]) / magnitude.max())

    ok = (delay_err < 0.05 and peak_dev < 0.02 and slope_err < 0.05 and r2 > 0.999
          and abs(b.imag) <= 1e-10 * abs(b) and chirality < 1e-3 and deviation < 0.02)
    return ok, (f"delay error {delay_err:.2%}, peak deviation {peak_dev:.2%}, phase slope error "
                f"{slope_err:.2%} (R^2 {r2:.5f}), chirality {chirality:.1e}, vs spectral {deviation:.2%}")


def check_fig3() -> Result:
    cfg = load_config(SCENARIOS / "fig3.yaml")
    medium = cfg.medium
    dark = medium_dark_state(medium)
    _, result = _run(cfg)
    m = _columns(result)
    delay = m["centroid"] - m["centroid"][0]

    first = (delay >= 25) & (delay <= 100)
    window = (delay >= 300) & (delay <= 500)
    if first.sum() < 3 or window.sum() < 3:
        return False, "pulse did not reach the measurement windows"
    phase_first, _ = _fit(m["z"][first], m["phase"][first])
    phase_window, _ = _fit(m["z"][window], m["phase"][window])
    gain_first, _ = _fit(m["z"][first], np.log(m["peak"][first]))
    gain_window, _ = _fit(m["z"][window], np.log(m["peak"][window]))

    expected = -beta(medium, dark, 0.0).imag * medium.k0
    plateau = abs(phase_window) / abs(phase_first)
    gain_err = abs(gain_window - gain_first - expected) / expected
    re_zero = abs(beta(medium, dark, 0.0).real)
    ok = plateau < 0.1 and gain_err < 0.1 and re_zero <= 1e-10 * abs(beta(medium, dark, 0.0))
    return ok, f"plateau slope ratio {plateau:.3f}, gain rate error {gain_err:.2%}"


# === Driver ================================================================

def suites(quick: bool, rng: np.random.Generator) -> list[tuple[str, Callable[[], Result]]]:
    listed: list[tuple[str, Callable[[], Result]]] = [
        ("oracle equivalence", lambda: check_oracle(rng, QUICK_ORACLE_DRAWS if quick else ORACLE_DRAWS)),
        ("eta / n_linear / n_exact consistency", lambda: check_index_orders(rng)),
        ("chiH phase independence", check_chi_h_phase),
        ("group index cross-check", check_group_slope),
        ("beta against closed-loop phase", check_beta_curve),
        ("handedness and inversion symmetry", lambda: check_symmetries(rng)),
        ("vacuum propagation", check_vacuum_run),
    ]
    if not quick:
        listed += [("steady phase winding run", check_fig2), ("phase switching run", check_fig3)]
    return listed


def run_selftest(quick: bool = False, seed: int | None = None) -> int:
    """Run every suite; 0 when all pass, 3 otherwise."""
    rng = np.random.default_rng(seed)
    print("=" * 60)
    print(f"🧪 SELFTEST{' (quick)' if quick else ''}")
    print("=" * 60)
    failures = []
    for name, suite in suites(quick, rng):
        start = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", NonlinearProbeWarning)
                ok, detail = suite()
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        print(f"{'✅' if ok else '❌'} {name}: {detail} [{elapsed:.1f}s]")
        if not ok:
            failures.append(name)
    if failures:
        print(f"\n❌ {len(failures)} suite(s) failed: {', '.join(failures)}")
        return 3
    print("\n✅ All suites passed")
    return 0
