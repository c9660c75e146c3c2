"""Command-line entry point: validate | ground-state | evolve | verify | scan."""
from __future__ import annotations

import argparse
import logging
import sys

from . import harness

COMMANDS = {
    "validate": lambda cfg, out: harness.cmd_validate(cfg),
    "ground-state": harness.cmd_ground_state,
    "evolve": harness.cmd_evolve,
    "verify": harness.cmd_verify,
    "scan": harness.cmd_scan,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(harness.EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="choquard", description=__doc__)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--out", default="run", help="output directory (default: ./run)")
    ap.add_argument("--grid-M", type=int, dest="grid_M", help="override grid.M")
    ap.add_argument("--dt", type=float, help="override evolve.dt")
    ap.add_argument("--T", type=float, dest="T", help="override evolve.T")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {"grid.M": args.grid_M, "evolve.dt": args.dt, "evolve.T": args.T}
    try:
        cfg = harness.load_config(args.config, overrides)
    except (harness.ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return harness.EXIT_USAGE
    try:
        return COMMANDS[args.command](cfg, args.out)
    except harness.DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return harness.EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
