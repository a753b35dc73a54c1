#!/usr/bin/env python3
"""One-time standalone-training oracle for the toy supernet ranking check.

Trains the shared supernet, trains every architecture of the 3x3 toy space
from scratch, and reports the Spearman correlation of the two accuracy lists.
"""
import argparse
import time

from pathnas.experiments import ranking_correlation
from pathnas.searchspace import format_arch
from pathnas.supernet import make_toy_task


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", default="0", help="comma-separated task/supernet seeds")
    ap.add_argument("--supernet-steps", type=int, default=300)
    ap.add_argument("--standalone-steps", type=int, default=900)
    ap.add_argument("--standalone-seeds", type=int, default=3)
    ap.add_argument("--verbose", action="store_true", help="print per-architecture accuracies")
    args = ap.parse_args()

    for seed in (int(s) for s in args.seeds.split(",")):
        start = time.perf_counter()
        rho, shared, standalone, archs = ranking_correlation(
            task=make_toy_task(seed=seed), supernet_steps=args.supernet_steps,
            standalone_steps=args.standalone_steps, standalone_seeds=args.standalone_seeds,
            seed=seed)
        if args.verbose:
            for a, s, t in zip(archs, shared, standalone):
                print(f"  {format_arch(a)}  shared={s:.4f}  standalone={t:.4f}")
        print(f"seed={seed} spearman={rho:.4f} seconds={time.perf_counter() - start:.1f}")


if __name__ == "__main__":
    main()
