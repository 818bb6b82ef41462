#!/usr/bin/env python3
"""Print the 1D certification-threshold table G(n) with its companion columns.

Example:
    python3 scripts/run_thresholds.py --start 4 --stop 12
    python3 scripts/run_thresholds.py --start 4 --stop 200 --format csv -o thresholds.csv
"""

import argparse
import sys

from ffgap.cli import main as cli_main


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--start", type=int, default=4, help="first chain size n")
    parser.add_argument("--stop", type=int, default=12, help="last chain size n (inclusive)")
    parser.add_argument(
        "--mode",
        choices=("exact", "asymptotic"),
        default="exact",
        help="coefficient parameter: per-n optimum or the sqrt(6) asymptote",
    )
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output format"
    )
    parser.add_argument("-o", "--output", default=None, help="write to file instead of stdout")
    args = parser.parse_args(argv)

    forwarded = ["--no-timestamp"]
    if args.output:
        forwarded += ["--output", args.output]
    forwarded += [
        "thresholds",
        "--n",
        f"{args.start}..{args.stop}",
        "--mode",
        args.mode,
        "--format",
        args.format,
    ]
    return cli_main(forwarded)


if __name__ == "__main__":
    sys.exit(main())
