"""Fair one-shot architecture search with path-level greedy scoring."""

from pathnas.searchspace import (
    LayerGroup,
    SearchSpace,
    enumerate_all,
    layer_info,
    paper_space,
    space_size,
    uniform_space,
    validate,
)
from pathnas.sampler import PermutationScheduler
from pathnas.oracle import FitnessLandscape, brute_force_optimum, fitness, make_landscape
from pathnas.search import (
    EAConfig,
    Leaderboard,
    SearchBudget,
    ea_search,
    path_priority_search,
    random_search,
    run_cycle,
    score_cycle,
    select_best,
)

__version__ = "0.1.0"

__all__ = [
    "EAConfig",
    "FitnessLandscape",
    "LayerGroup",
    "Leaderboard",
    "PermutationScheduler",
    "SearchBudget",
    "SearchSpace",
    "brute_force_optimum",
    "ea_search",
    "enumerate_all",
    "fitness",
    "layer_info",
    "make_landscape",
    "paper_space",
    "path_priority_search",
    "random_search",
    "run_cycle",
    "score_cycle",
    "select_best",
    "space_size",
    "uniform_space",
    "validate",
]
