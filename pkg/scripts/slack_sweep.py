"""Goodput ratio of the online policies as d grows, k fixed (one CSV row per policy per cell).

    python3 scripts/slack_sweep.py --out slack.csv --frames 3600
"""

import argparse
import logging

from bdgsim.metrics import write_sweep_csv
from bdgsim.sweep import SweepConfig, run_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=6)
    ap.add_argument("--dk", default="1,2,4,8,16", help="d as multiples of k")
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--frames", type=int, default=3600, help="frames per stream")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="slack_sweep.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO)

    cfg = SweepConfig(
        k=(args.k,),
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

    by = {}
    for r in rows:
        by.setdefault((r["policy"], r["d"]), []).append(r["ratio"])
    print(f"{'policy':<15}" + "".join(f"{'d=' + str(d):>9}" for d in sorted({d for _, d in by})))
    for policy in cfg.policies:
        cells = [sum(v) / len(v) for (p, _), v in sorted(by.items(), key=lambda kv: kv[0][1]) if p == policy]
        print(f"{policy:<15}" + "".join(f"{c:9.4f}" for c in cells))


if __name__ == "__main__":
    main()
