"""Goodput ratio against d/k across several k, for plotting on a log d/k axis.

    python3 scripts/dk_sweep.py --k 2,4,6,12 --dk 1,2,4,8,16 --out dk.csv
"""

import argparse
import csv
import math

from bdgsim.metrics import write_sweep_csv
from bdgsim.sweep import SweepConfig, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", default="2,4,6,12")
    ap.add_argument("--dk", default="1,2,4,8,16")
    ap.add_argument("--policies", default="greedy,greedy-slack,opportunistic")
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--frames", type=int, default=3600)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="dk_sweep.csv")
    args = ap.parse_args()

    cfg = SweepConfig(
        policies=tuple(args.policies.split(",")),
        k=tuple(int(x) for x in args.k.split(",")),
        dk=tuple(int(x) for x in args.dk.split(",")),
        reps=args.reps,
        seed=args.seed,
        frames_per_stream=args.frames,
        workers=args.workers,
    )
    rows, errors = run_sweep(cfg)
    write_sweep_csv(rows, args.out)
    for err in errors:
        print("failed:", err)

    # companion file with log2(d/k) for the plot axis
    summary = args.out.rsplit(".", 1)[0] + "_log.csv"
    with open(summary, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["policy", "k", "d", "log2_dk", "ratio"])
        for r in rows:
            w.writerow([r["policy"], r["k"], r["d"], f"{math.log2(r['d'] / r['k']):.3f}", f"{r['ratio']:.6f}"])
    print(f"wrote {args.out} and {summary}: {len(rows)} rows")


if __name__ == "__main__":
    main()
