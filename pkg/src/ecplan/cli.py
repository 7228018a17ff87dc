"""Command line entry point: ``ecplan {allocate,dispatch,size,report,check}``.

Exit status is 0 on success, 1 when inputs or a produced key fail
validation, and 2 when the compliance check finds a violation.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from ecplan import pipeline
from ecplan.config import ScenarioConfig

EXIT_OK, EXIT_INVALID, EXIT_NONCOMPLIANT = 0, 1, 2

log = logging.getLogger("ecplan")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecplan", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=["allocate", "dispatch", "size", "report", "check"])
    parser.add_argument("--config", required=True, type=Path, help="scenario YAML file")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--format", choices=["csv", "json"], default="csv",
                        help="format of tabular outputs")
    parser.add_argument("--workers", type=int, default=None,
                        help="parallel sizing workers (overrides sizing.workers)")
    return parser


def run_command(command: str, config: Path, out: Path, fmt: str = "csv", workers=None) -> int:
    try:
        cfg = ScenarioConfig.load(config)
        if command == "allocate":
            issues = pipeline.run_allocate(cfg, out, fmt)
            if issues:
                print("repartition key is infeasible:", file=sys.stderr)
                for line in issues:
                    print(f"  {line}", file=sys.stderr)
                return EXIT_INVALID
        elif command == "dispatch":
            pipeline.run_dispatch(cfg, out, fmt)
        elif command == "size":
            pipeline.run_size(cfg, out, fmt, workers)
        elif command == "report":
            pipeline.run_report(cfg, out, fmt)
        elif command == "check":
            verdict = pipeline.run_check(cfg, out)
            if not verdict.passed:
                for f in verdict.findings:
                    print(f"{f.severity}: {f.rule}: {f.message}", file=sys.stderr)
                return EXIT_NONCOMPLIANT
        else:
            raise ValueError(f"unknown command {command!r}")
    except (ValueError, KeyError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        for line in getattr(exc, "details", []):
            print(f"  {line}", file=sys.stderr)
        return EXIT_INVALID
    log.info("%s finished, outputs in %s", command, out)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("EC_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return run_command(args.command, args.config, args.out, args.format, args.workers)


if __name__ == "__main__":
    sys.exit(main())
