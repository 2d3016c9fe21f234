"""Command-line entry point: ``gskgl <subcommand> [--config FILE] [--set section.key=value]``.

Exit codes: 0 success, 2 configuration error, 3 numerical abort,
4 a validation check failed.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .errors import BlowUpError, ConfigError, GSKError, RetryExhaustedError, ValidationFailure
from .experiments.config import load_config
from .experiments.runners import RUNNERS

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4

# commands whose failed checks turn into exit code 4
VALIDATING = {"validate-residual-scaling", "validate-error-scaling", "amplitude-saturation"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gskgl",
        description="Turing instability and Ginzburg-Landau validation for the Gray-Scott-Klausmeier model.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="TOML configuration file")
    common.add_argument(
        "-s", "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override one configuration entry (repeatable)",
    )
    common.add_argument("-o", "--output", help="CSV destination (default: run.output, '-' is stdout)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_config(args.config, args.set)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.perf_counter()
    try:
        report = RUNNERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationFailure as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (BlowUpError, RetryExhaustedError, GSKError, ArithmeticError) as exc:
        print(f"numerical abort: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    wall = time.perf_counter() - t0
    text = report.to_csv(cfg.sha256, wall)
    dest = args.output or cfg["run"]["output"]
    if dest == "-":
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
            return EXIT_OK
    else:
        with open(dest, "w", newline="") as fh:
            fh.write(text)
    print(report.summary(), file=sys.stderr)
    if args.command in VALIDATING and not report.passed:
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
