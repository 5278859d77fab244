#!/usr/bin/env python3
"""Patch-matching timing benchmark.

Times global exemplar matching against windowed block matching across
image sizes and channel counts and prints a CSV (one row per
configuration) including the local/global time ratio.
"""

import argparse

from glr import bench_matching


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="128")
    ap.add_argument("--channels", default="1,3,6")
    ap.add_argument("--modes", default="gm,bm-uniform")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="write CSV here instead of stdout")
    args = ap.parse_args()

    csv_text = bench_matching([int(s) for s in args.sizes.split(",")],
                              [int(c) for c in args.channels.split(",")],
                              args.modes.split(","),
                              repeats=args.repeats, seed=args.seed)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
    else:
        print(csv_text, end="")


if __name__ == "__main__":
    main()
