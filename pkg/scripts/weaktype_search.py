#!/usr/bin/env python3
"""Empirical lower-bound search for the weak-type (1,1) constant.

Runs all three candidate families against the classic kernel and prints the
best ratio of each next to the Davis constant, which the best constant is
conjectured to equal.  The searches only ever certify lower bounds.
"""

import argparse
import sys

from dhtlab.kernels import KERNELS
from dhtlab.weaktype import davis_constant, search_weak_constant


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kernel", default="H")
    ap.add_argument("--budget", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--window", type=int, default=16384)
    args = ap.parse_args(argv)

    kern = KERNELS[args.kernel]
    d = davis_constant()
    print(f"davis constant: {d:.12f}")
    for family in ("random_signs", "greedy_atoms", "discretized_bumps"):
        best = search_weak_constant(kern, family, args.budget,
                                    seed=args.seed, window=args.window)
        print(f"{family:18s} best ratio {best.ratio:.10f}  "
              f"(= {best.ratio / d:.4f} x davis)  via {best.sequence_id}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
