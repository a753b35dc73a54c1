#!/usr/bin/env python3
"""How often does path-priority recover the exhaustive optimum of a separable landscape?

Sweeps the number of cycles T and models per cycle E on the 5-layer x 3-choice
space and prints one CSV row per setting.
"""
import argparse
import time

from pathnas.experiments import greedy_recovery
from pathnas.search import SearchBudget
from pathnas.searchspace import uniform_space


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--layers", type=int, default=5)
    ap.add_argument("--choices", type=int, default=3)
    ap.add_argument("--budgets", default="5x12,10x12,20x12,40x12,80x12,5x24,5x48",
                    help="comma-separated TxE pairs")
    args = ap.parse_args()

    space = uniform_space(args.layers, args.choices)
    print("T,E,evaluations,hits,seeds,seconds")
    for item in args.budgets.split(","):
        T, E = (int(v) for v in item.split("x"))
        start = time.perf_counter()
        hits = sum(greedy_recovery(range(args.seeds), space, SearchBudget(T, E)))
        budget = SearchBudget.rounded(space, T, E)
        print(f"{budget.T},{budget.E},{budget.total},{hits},{args.seeds},"
              f"{time.perf_counter() - start:.2f}")


if __name__ == "__main__":
    main()
