"""Command-line entry point: run the tasks declared in a config file.

Exit codes: 0 when every task passes, 1 when any task fails or errors,
2 when the configuration itself cannot be read, parsed, or validated.
"""

import argparse
import dataclasses
import sys

from .config import parse_config
from .errors import ParseError, ValidationError
from .report import emit_report
from .runner import run


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toruslift",
        description="Run brane/theta verification tasks from a config file.",
    )
    parser.add_argument("--config", required=True, metavar="PATH",
                        help="job configuration file")
    parser.add_argument("--tol", type=float, default=None,
                        help="override the truncation tolerance")
    parser.add_argument("--max-radius", type=int, default=None,
                        help="override the lattice summation radius cap")
    parser.add_argument("--precision", choices=("double", "dd"), default=None,
                        help="override the working precision")
    parser.add_argument("--out", metavar="PATH", default=None,
                        help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("lines", "summary"),
                        default="lines", help="report format")
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as handle:
            config = parse_config(handle.read())
        overrides = {}
        if args.tol is not None:
            if args.tol <= 0:
                raise ValidationError("tol must be positive")
            overrides["tol"] = args.tol
        if args.max_radius is not None:
            if args.max_radius < 1:
                raise ValidationError("max_radius must be at least 1")
            overrides["max_radius"] = args.max_radius
        if args.precision is not None:
            overrides["precision"] = args.precision
        if overrides:
            numeric = dataclasses.replace(config.numeric, **overrides)
            config = dataclasses.replace(config, numeric=numeric)
    except (OSError, ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    records = run(config)
    text = emit_report(records, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r.status == "pass" for r in records) else 1


if __name__ == "__main__":
    sys.exit(main())
