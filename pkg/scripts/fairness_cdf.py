"""Per-stream completion fractions under one policy for several jitter bounds.

Writes one CDF CSV per jitter value and prints how many streams end up
all-or-nothing (fraction <= 0.05 or >= 0.95).

    python3 scripts/fairness_cdf.py --k 6 --d 6 --jitter 0,1,2,5
"""

import argparse

from bdgsim.engine import run
from bdgsim.metrics import bimodal_share, completion_cdf, compute_report, write_cdf_csv
from bdgsim.offline import benchmark_offline
from bdgsim.sweep import cell_seed
from bdgsim.traffic import VideoScenario, gen_video


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=6)
    ap.add_argument("--d", type=int, default=6)
    ap.add_argument("--jitter", default="0,1,2,5")
    ap.add_argument("--policy", default="greedy-slack")
    ap.add_argument("--streams", type=int, default=50)
    ap.add_argument("--frames", type=int, default=3600)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--prefix", default="cdf_jitter")
    args = ap.parse_args()

    for jitter in (int(x) for x in args.jitter.split(",")):
        seed = cell_seed(args.seed, args.k, args.d, jitter, 0)
        seq = gen_video(VideoScenario(args.k, args.d, args.streams, args.frames, None, jitter, seed))
        report = compute_report(run(seq, args.policy, seed), benchmark_offline(seq))
        path = f"{args.prefix}{jitter}.csv"
        write_cdf_csv(report, path)
        fr = completion_cdf(report)
        print(
            f"jitter={jitter}: ratio={report.goodput_ratio:.4f} "
            f"bimodal={bimodal_share(fr):.3f} none={sum(x <= 0.05 for x in fr)} all={sum(x >= 0.95 for x in fr)} -> {path}"
        )


if __name__ == "__main__":
    main()
