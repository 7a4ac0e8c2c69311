"""Adversarial staged inputs: witness goodput against an online policy as b grows.

    python3 scripts/lower_bound.py --b 4,8,16,32 --policy greedy
"""

import argparse

from bdgsim.core import FrameStatus
from bdgsim.engine import replay, run
from bdgsim.offline import benchmark_offline
from bdgsim.traffic import AdversarySpec, gen_lower_bound, gen_token_bucket_lower_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--b", default="4,8,16")
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--scale", type=int, default=100, help="n is about scale * b")
    ap.add_argument("--policy", default="greedy")
    ap.add_argument("--token-bucket", action="store_true")
    args = ap.parse_args()

    print(f"{'b':>4} {'n':>6} {'witness':>8} {'bench':>7} {'online':>7} {'ratio':>8} {'bound':>8}")
    for b in (int(x) for x in args.b.split(",")):
        n = args.scale * b - args.d
        if args.token_bucket:
            inst = gen_token_bucket_lower_bound(AdversarySpec(b, args.d, args.k, n, "token_bucket"), args.policy)
        else:
            inst = gen_lower_bound(AdversarySpec(b, args.d, args.k, n), args.policy)
        statuses = replay(inst.sequence, inst.adversary_schedule)
        witness = sum(1 for s in statuses.values() if s is FrameStatus.SUCCESSFUL)
        online = run(inst.sequence, args.policy).goodput
        bench = benchmark_offline(inst.sequence).goodput
        # online ceiling for the burst-bounded staging with k = 2
        bound = f"{args.d + (n + args.d) / b:8.1f}" if not args.token_bucket and args.k == 2 else f"{'-':>8}"
        ratio = witness / online if online else float("inf")
        print(f"{b:>4} {n:>6} {witness:>8} {bench:>7} {online:>7} {ratio:>8.2f} {bound}")


if __name__ == "__main__":
    main()
