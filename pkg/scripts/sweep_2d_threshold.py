#!/usr/bin/env python3
"""Sweep the 2D certification threshold and report its n^(3/2) scaling.

Prints one row per window size n (powers of two): the threshold G_2d(n)
from both algebraic evaluation routes, their relative difference, the scaled
value G_2d(n) * n^(3/2), and its increment over the previous row.  The scaled
column increases monotonically with shrinking increments, pinning down the
constant in the Theta(n^(-3/2)) decay.

Example:
    python3 scripts/sweep_2d_threshold.py --max-exponent 12
"""

import argparse
import sys

from ffgap import threshold_2d


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--max-exponent",
        type=int,
        default=8,
        help="sweep n = 4, 8, ..., 2^max_exponent",
    )
    args = parser.parse_args(argv)
    if args.max_exponent < 2:
        parser.error("need --max-exponent >= 2")

    header = f"{'n':>6}  {'G_2d':>14}  {'routes_rel':>10}  {'scaled':>10}  {'step':>8}"
    print(header)
    print("-" * len(header))
    previous = None
    scaled = None
    for k in range(2, args.max_exponent + 1):
        n = 2**k
        direct, telescoped = threshold_2d(n, with_routes=True)
        rel = abs(direct - telescoped) / direct
        scaled = direct * n**1.5
        step = "" if previous is None else f"{scaled - previous:8.4f}"
        print(f"{n:>6}  {direct:>14.10f}  {rel:>10.2e}  {scaled:>10.4f}  {step:>8}")
        previous = scaled
    print(f"\nscaled threshold at n = 2^{args.max_exponent}: {scaled:.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
