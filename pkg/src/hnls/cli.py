"""Command-line runner: ``hnls <experiment> [--config FILE] [--out DIR] ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from hnls.harness import io
from hnls.harness.config import SCENARIOS, ConfigError, ExperimentConfig
from hnls.harness.experiments import EXPERIMENTS
from hnls.integrator import BlowUpError

EXIT_CODES = {"pass": 0, "fail": 1, "inconclusive": 3}


def _thetas(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad theta list {text!r}") from exc
    if not values or any(not 0 <= v <= 1 for v in values):
        raise argparse.ArgumentTypeError(f"thetas must be a nonempty list in [0, 1], got {text!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hnls", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON experiment config")
        p.add_argument("--scenario", choices=SCENARIOS,
                       help="scenario defaults to start from when no config is given")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--theta", type=_thetas, help="comma-separated thetas in [0, 1]")
        p.add_argument("--seed", type=int)
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="format of the diagnostics file")
        p.add_argument("--frames", action="store_true", help="also write frames.bin")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def load_config(args) -> ExperimentConfig:
    if args.config is not None:
        config = ExperimentConfig.load(args.config)
        if args.scenario and args.scenario != config.scenario:
            raise ConfigError(f"--scenario {args.scenario} conflicts with config scenario {config.scenario}")
    else:
        config = ExperimentConfig.for_scenario(args.scenario or "mkdv_soliton")
    overrides = {}
    if args.theta is not None:
        overrides["thetas"] = args.theta
    if args.seed is not None:
        overrides["seed"] = args.seed
    return replace(config, **overrides) if overrides else config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args)
    except (ConfigError, OSError) as exc:
        parser.error(str(exc))
    try:
        report = EXPERIMENTS[args.command](config)
    except BlowUpError as exc:
        print(f"error: {exc} (last good time {exc.last_time:g})", file=sys.stderr)
        return 2
    out = args.out
    io.write_json(dict(config=config.to_dict(), **report.to_dict()), out / "report.json")
    records = report.diagnostics()
    if records:
        io.write_diagnostics(records, out / f"diagnostics.{args.format}", args.format)
    if args.frames and report.runs:
        io.write_frames(report.runs[0], out / "frames.bin")
    n_fail = len(report.failures())
    print(f"{report.experiment}: {report.status} ({len(report.checks)} checks, {n_fail} gated failures) -> {out}")
    return EXIT_CODES[report.status]


if __name__ == "__main__":
    sys.exit(main())
