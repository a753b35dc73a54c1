#!/usr/bin/env python3
"""Budget versus quality: path-priority (60), random (300) and EA (1000) on
interacting landscapes, over the full-size space and the small 5x3 space."""
import argparse

import numpy as np

from pathnas.experiments import budget_quality
from pathnas.search import EAConfig
from pathnas.searchspace import paper_space, uniform_space


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--interactions", type=int, default=10)
    ap.add_argument("--scale", type=float, default=0.3)
    ap.add_argument("--no-ea", action="store_true", help="skip the EA baseline")
    args = ap.parse_args()

    ea = None if args.no_ea else EAConfig()
    print("space,method,budget,mean_best,std_best,wins_vs_random")
    for name, space in (("full", paper_space()), ("5x3", uniform_space(5, 3))):
        res = budget_quality(range(args.seeds), space, interaction_count=args.interactions,
                             interaction_scale=args.scale, ea=ea)
        rnd = np.array(res["random"])
        budgets = {"path-priority": 60, "random": 300, "ea": 1000}
        for method, fits in res.items():
            fits = np.array(fits)
            wins = int(np.sum(fits > rnd))
            print(f"{name},{method},{budgets[method]},{fits.mean():.4f},{fits.std():.4f},{wins}")


if __name__ == "__main__":
    main()
