"""Command line front end: load a scenario, sweep one axis, write CSV."""

import argparse
import json
import sys
from dataclasses import replace

from .harness import AXES, BASELINES, config_from_dict, emit_csv, sweep


def _parse_values(axis, text):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty --values list")
    try:
        if axis == "pmax":
            return [float(p) for p in parts]
        return [int(p) for p in parts]
    except ValueError:
        kind = "numbers" if axis == "pmax" else "integers"
        raise ValueError(
            f"--values for axis {axis} must be comma-separated {kind}, "
            f"got {text!r}"
        ) from None


def build_parser():
    parser = argparse.ArgumentParser(
        prog="irsjam",
        description=(
            "Secrecy-rate experiments with transmit jamming and a "
            "reflecting surface"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one sweep and write a CSV")
    run.add_argument("--config", required=True, help="JSON scenario file")
    run.add_argument(
        "--axis", required=True, choices=AXES,
        help="swept quantity: transmit power, eavesdroppers, or elements",
    )
    run.add_argument(
        "--values", required=True,
        help="comma-separated axis values (dBm for pmax, counts otherwise)",
    )
    run.add_argument("--trials", required=True, type=int,
                     help="channel realizations per sweep point")
    run.add_argument("--out", required=True, help="output CSV path")
    run.add_argument("--setup", choices=("a", "b"),
                     help="override the eavesdropper geometry tag")
    run.add_argument(
        "--baseline", action="append", choices=BASELINES,
        help="baseline to run (repeatable; default: all four)",
    )
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument(
        "--paper-scale", action="store_true",
        help="20 surface elements and 5 eavesdroppers",
    )
    run.add_argument("--verbose", action="store_true",
                     help="per-trial progress on stderr")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            data = json.load(fh)
        config = config_from_dict(data)
        if args.setup:
            config = replace(config, setup=args.setup)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.paper_scale:
            config = replace(config, n_elements=20, n_eves=5)
        values = _parse_values(args.axis, args.values)
        progress = None
        if args.verbose:
            def progress(axis, value, baseline, trial, record):
                state = record.failed or f"rate {record.secrecy:.4f}"
                print(
                    f"{axis}={value} {baseline} trial {trial}: {state}",
                    file=sys.stderr,
                )
        cells = sweep(
            config, args.axis, values, args.trials,
            baselines=args.baseline, progress=progress,
        )
        emit_csv(cells, args.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
