#!/usr/bin/env python3
"""
chiralprop - weak-probe pulse propagation through a chiral atomic medium

Usage:
    python main.py response --config scenarios/response.yaml   # chiE, chiH, xiEH, xiHE over dp x phi0
    python main.py beta --config scenarios/fig4.yaml           # beta against the closed-loop phase
    python main.py propagate --config scenarios/fig2.yaml      # Maxwell-Bloch run with analytic overlays
    python main.py selftest --quick                            # oracle and dispersion suites

Set CHIRALPROP_THREADS to cap the number of worker threads.
"""
from __future__ import annotations

import argparse
import sys

from bloch import configure_threads
from config import ParameterError
from linear_response import SingularResponseError
from maxwell_bloch import PropagationError
from runner import ScenarioRunner, write_diagnostics
from scenario import ConfigError, load_config
from selftest import run_selftest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

VERB_MODES = {
    "response": "response-sweep",
    "beta": "beta-sweep",
    "propagate": "propagate",
}


def parse_seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiralprop",
        description="Pulse propagation in chiral media: response, beta sweeps and Maxwell-Bloch runs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  chiralprop response --config scenarios/response.yaml
  chiralprop beta --config scenarios/fig4.yaml --out-dir output/fig4
  chiralprop propagate --config scenarios/fig2.yaml
  chiralprop propagate --config scenarios/fig3.yaml --out-dir output/fig3
  chiralprop selftest --quick --seed 7

Exit codes:
  0 success, 2 configuration error, 3 numerical failure
        """,
    )
    subparsers = parser.add_subparsers(dest="command", help="Commands")

    for verb, help_text in (
        ("response", "Sweep the response coefficients over detuning and phase"),
        ("beta", "Sweep beta over the closed-loop phase"),
        ("propagate", "Run the Maxwell-Bloch propagation"),
    ):
        sub = subparsers.add_parser(verb, help=help_text)
        sub.add_argument("-c", "--config", required=True, help="Scenario YAML document")
        sub.add_argument("-o", "--out-dir", default=None, help="Output directory (default: output.dir)")
        sub.add_argument("--seed", type=parse_seed, default=None, help="Recorded in the manifest")

    selftest_parser = subparsers.add_parser("selftest", help="Run the acceptance suites")
    selftest_parser.add_argument("--quick", action="store_true",
                                 help="Skip the figure-scale Maxwell-Bloch runs")
    selftest_parser.add_argument("--seed", type=parse_seed, default=None,
                                 help="Seed for the random parameter draws")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return EXIT_OK

    threads = configure_threads()
    if args.command == "selftest":
        print(f"🧵 {threads} thread(s)")
        return run_selftest(quick=args.quick, seed=args.seed)

    try:
        cfg = load_config(args.config, VERB_MODES[args.command])
    except (ConfigError, ParameterError) as exc:
        print(f"❌ {args.config}: {exc}")
        return EXIT_CONFIG

    runner = ScenarioRunner(cfg, out_dir=args.out_dir, seed=args.seed)
    try:
        runner.run()
    except ParameterError as exc:
        print(f"❌ {exc}")
        return EXIT_CONFIG
    except (SingularResponseError, PropagationError) as exc:
        print(f"❌ {exc}")
        write_diagnostics(runner.out_dir, exc, cfg)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
