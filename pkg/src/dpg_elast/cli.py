"""Command line driver for convergence studies.

Usage: dpg-elast run --config FILE [overrides]

The config file is plain text with one key=value pair per line; blank
lines and lines starting with '#' are ignored.  Recognized keys mirror the
study configuration: benchmark, method, mode, p, delta_p, steps, lambda,
mu, marking_fraction, out.
"""
from __future__ import annotations

import argparse
import sys

from .study import StudyConfig, run_convergence_study

_KEYS = {
    "benchmark": str,
    "method": int,
    "mode": str,
    "p": int,
    "delta_p": int,
    "steps": int,
    "lambda": float,
    "mu": float,
    "marking_fraction": float,
    "out": str,
}
# config-file key -> StudyConfig attribute
_ATTR = {"lambda": "lam"}


def parse_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in _KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _KEYS[key](val)
            except ValueError as err:
                raise ValueError(f"{path}:{lineno}: bad value for {key}: {val!r}") from err
    return values


def build_config(args) -> StudyConfig:
    values = parse_config_file(args.config) if args.config else {}
    overrides = {
        "method": args.method,
        "benchmark": args.benchmark,
        "steps": args.steps,
        "p": args.p,
        "delta_p": args.delta_p,
        "lambda": getattr(args, "lam"),
        "mu": args.mu,
        "out": args.out,
    }
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    config = StudyConfig()
    for key, val in values.items():
        setattr(config, _ATTR.get(key, key), val)
    config.validate()
    return config


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="dpg-elast")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a convergence study")
    run.add_argument("--config", help="key=value config file")
    run.add_argument("--method", type=int, choices=(1, 2))
    run.add_argument("--benchmark", choices=("smooth", "lshape"))
    run.add_argument("--steps", type=int)
    run.add_argument("--p", type=int)
    run.add_argument("--delta-p", type=int, dest="delta_p")
    run.add_argument("--lambda", type=float, dest="lam")
    run.add_argument("--mu", type=float)
    run.add_argument("--out", help="output CSV path")

    args = parser.parse_args(argv)
    try:
        config = build_config(args)
    except (OSError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 3
    try:
        rows = run_convergence_study(config)
    except RuntimeError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 2
    last = rows[-1]
    print(f"completed {len(rows)} steps: N={last.n_dofs} "
          f"rel_error={last.rel_combined:.6e} eta={last.eta:.6e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
