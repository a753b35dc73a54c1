"""Seed sweeps behind the acceptance suite and the scripts/ runners."""
from __future__ import annotations

import numpy as np
from scipy.stats import spearmanr

from pathnas import supernet as sn
from pathnas.oracle import brute_force_optimum, make_landscape
from pathnas.search import EAConfig, SearchBudget, ea_search, path_priority_search, random_search
from pathnas.searchspace import SearchSpace, enumerate_all, paper_space, uniform_space


def greedy_recovery(seeds=range(100), space: SearchSpace | None = None,
                    budget: SearchBudget = SearchBudget(5, 12)) -> list[bool]:
    """Does path-priority return the exhaustive optimum of each separable landscape?"""
    space = space or uniform_space(5, 3)
    budget = SearchBudget.rounded(space, budget.T, budget.E)
    hits = []
    for s in seeds:
        land = make_landscape(space, "separable", s)
        opt, _ = brute_force_optimum(land)
        hits.append(path_priority_search(space, land, budget, seed=s).best == opt)
    return hits


def budget_quality(seeds=range(50), space: SearchSpace | None = None, *,
                   interaction_count: int = 10, interaction_scale: float = 0.3,
                   budget: SearchBudget = SearchBudget(5, 12), random_n: int = 300,
                   ea: EAConfig | None = None) -> dict[str, list[float]]:
    """Best fitness per seed for each method on interacting, noise-free landscapes.

    ``ea=None`` skips the EA baseline.
    """
    space = space or paper_space()
    out: dict[str, list[float]] = {"path-priority": [], "random": []}
    if ea is not None:
        out["ea"] = []
    for s in seeds:
        land = make_landscape(space, "interacting", s, interaction_count=interaction_count,
                              interaction_scale=interaction_scale)
        out["path-priority"].append(path_priority_search(space, land, budget, seed=s).best_fitness)
        out["random"].append(random_search(space, land, random_n, seed=s).best_fitness)
        if ea is not None:
            out["ea"].append(ea_search(space, land, ea, seed=s).best_fitness)
    return out


def ranking_correlation(
    space: SearchSpace | None = None,
    task: sn.ToyTask | None = None,
    hyper: sn.Hyper = sn.Hyper(),
    supernet_steps: int = 300,
    standalone_steps: int = 900,
    standalone_seeds: int = 3,
    seed: int = 0,
    batch_size: int = 32,
):
    """Spearman rho between shared-weight and standalone accuracy over every architecture.

    Returns ``(rho, shared, standalone, archs)``. Standalone accuracy is the
    mean over ``standalone_seeds`` independent initializations.
    """
    space = space or sn.toy_space()
    task = task or sn.make_toy_task()
    state = sn.SupernetState(space, task.input_dim, task.num_classes, hyper, seed)
    sn.train(state, task, supernet_steps, batch_size)
    archs = list(enumerate_all(space))
    shared = [sn.estimate_fitness(state, a, task.x_val, task.y_val) for a in archs]
    standalone = []
    for a in archs:
        accs = [
            sn.estimate_fitness(sn.train_standalone(a, space, task, standalone_steps, hyper,
                                                    batch_size, seed=k), a, task.x_val, task.y_val)
            for k in range(standalone_seeds)
        ]
        standalone.append(float(np.mean(accs)))
    rho = float(spearmanr(shared, standalone)[0])
    return rho, shared, standalone, archs
