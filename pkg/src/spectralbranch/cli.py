"""Command line entry point.

    spectralbranch --config run.cfg [--out DIR] [--verbose]

Reads one config file, runs the command it names, writes a CSV and a
report sidecar into the output directory.  Exit codes: 0 on success,
2 on configuration or expression errors, 3 on numerical failures.
"""
from __future__ import annotations

import argparse
import sys

from .config import parse_config
from .errors import ConfigError, ExpressionError
from .runner import run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectralbranch",
        description="track eigenvalue branches of Hermitian operator families",
    )
    parser.add_argument("--config", required=True, help="path to a run config file")
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument("--verbose", action="store_true", help="echo the report to stdout")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        config = parse_config(text)
    except (ConfigError, ExpressionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return run(config, out_dir=args.out, verbose=args.verbose)


if __name__ == "__main__":
    sys.exit(main())
