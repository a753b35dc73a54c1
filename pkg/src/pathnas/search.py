"""Path-level greedy search plus evolutionary and random baselines.

Path-priority search rates choice paths rather than whole models. Each cycle
draws ``E`` models with the fair scheduler, ranks them by fitness and awards
``K - rank`` to every path in each model. After ``T`` cycles the per-layer
argmax of the accumulated scores is the answer.

All evaluators are plain callables ``arch -> float`` (higher is better).
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from pathnas.rng import generator
from pathnas.sampler import PermutationScheduler, fairness_window
from pathnas.searchspace import Architecture, SearchSpace

log = logging.getLogger(__name__)

Evaluator = Callable[[Sequence[int]], float]


class EvaluationError(RuntimeError):
    """An evaluator raised; ``architecture`` is the model that failed."""

    def __init__(self, architecture, cause):
        super().__init__(f"evaluation failed for architecture {architecture}: {cause}")
        self.architecture = tuple(architecture)


class EvalRecord(NamedTuple):
    method: str
    cycle: int  # cycle for path-priority, generation for EA, 0 for random
    draw: int
    architecture: Architecture
    fitness: float


@dataclass(frozen=True)
class SearchBudget:
    T: int = 5
    E: int = 12

    @property
    def total(self) -> int:
        return self.T * self.E

    def check(self, space: SearchSpace) -> None:
        window = fairness_window(space)
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if self.E < 1 or self.E % window:
            raise ValueError(f"E={self.E} must be a positive multiple of {window}")

    @classmethod
    def rounded(cls, space: SearchSpace, T: int, E: int) -> "SearchBudget":
        """Budget with ``E`` rounded up to the next multiple of the fairness window."""
        w = fairness_window(space)
        return cls(T, w * math.ceil(E / w))


@dataclass(frozen=True)
class EAConfig:
    population_size: int = 50
    generations: int = 20
    crossover_prob: float = 0.5
    mutation_prob: float = 0.1
    elite_count: int = 5
    tournament_size: int = 2

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.generations < 1:
            raise ValueError("generations must be at least 1")
        for name in ("crossover_prob", "mutation_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0 <= self.elite_count <= self.population_size:
            raise ValueError("elite_count must lie in [0, population_size]")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be at least 1")

    @property
    def total(self) -> int:
        return self.population_size * self.generations


class Leaderboard:
    """Accumulated integer scores and occurrence counts per (layer, choice)."""

    def __init__(self, choice_counts: Sequence[int]):
        self.scores = [np.zeros(p, dtype=np.int64) for p in choice_counts]
        self.occurrences = [np.zeros(p, dtype=np.int64) for p in choice_counts]
        self.cycles = 0

    @classmethod
    def for_space(cls, space: SearchSpace) -> "Leaderboard":
        return cls(space.choice_counts)

    def copy(self) -> "Leaderboard":
        new = Leaderboard([len(s) for s in self.scores])
        new.scores = [s.copy() for s in self.scores]
        new.occurrences = [o.copy() for o in self.occurrences]
        new.cycles = self.cycles
        return new

    def tied_layers(self) -> list[int]:
        """Layers whose top score is shared by more than one choice."""
        return [l for l, s in enumerate(self.scores) if np.count_nonzero(s == s.max()) > 1]

    def to_dict(self) -> dict:
        return {
            "cycles": self.cycles,
            "scores": [s.tolist() for s in self.scores],
            "occurrences": [o.tolist() for o in self.occurrences],
        }

    def dump(self) -> str:
        """One line per layer: ``layer: score/occurrences ...``."""
        lines = []
        for l, (s, o) in enumerate(zip(self.scores, self.occurrences)):
            cells = " ".join(f"{a}/{b}" for a, b in zip(s.tolist(), o.tolist()))
            lines.append(f"{l}: {cells}")
        return "\n".join(lines) + "\n"


@dataclass
class SearchResult:
    method: str
    best: Architecture
    best_fitness: float
    log: list[EvalRecord] = field(default_factory=list)
    leaderboard: Leaderboard | None = None

    @property
    def evaluations(self) -> int:
        return len(self.log)


def _evaluate_all(evaluator: Evaluator, archs: Sequence[Architecture], parallelism: int = 1) -> list[float]:
    def one(arch):
        try:
            return float(evaluator(arch))
        except Exception as exc:  # re-raised with the model attached
            raise EvaluationError(arch, exc) from exc

    if parallelism <= 1:
        return [one(a) for a in archs]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, archs))


def competition_ranks(fitnesses: Sequence[float]) -> list[int]:
    """Rank 1 = best; tied values share the better rank (1, 2, 2, 4 style)."""
    f = np.asarray(fitnesses, dtype=np.float64)
    return [1 + int(np.count_nonzero(f > v)) for v in f]


def run_cycle(sampler: PermutationScheduler, evaluator: Evaluator, E: int,
              parallelism: int = 1) -> list[tuple[Architecture, float]]:
    window = fairness_window(sampler.space)
    if E < 1 or E % window:
        raise ValueError(f"E={E} must be a positive multiple of {window}")
    archs = sampler.draw(E)
    return list(zip(archs, _evaluate_all(evaluator, archs, parallelism)))


def score_cycle(results: Sequence[tuple[Architecture, float]], leaderboard: Leaderboard,
                K: int | None = None) -> Leaderboard:
    """Return a new leaderboard with this cycle's ``K - rank`` awards added.

    ``K`` defaults to the number of models in the cycle, so the worst model
    earns nothing and every award is non-negative.
    """
    K = len(results) if K is None else K
    ranks = competition_ranks([f for _, f in results])
    new = leaderboard.copy()
    for (arch, _), rank in zip(results, ranks):
        for l, c in enumerate(arch):
            new.scores[l][c] += K - rank
            new.occurrences[l][c] += 1
    new.cycles += 1
    return new


def select_best(leaderboard: Leaderboard) -> Architecture:
    """Per-layer argmax of the scores; ties go to the lowest choice index."""
    if leaderboard.cycles == 0:
        raise ValueError("leaderboard is empty")
    ties = leaderboard.tied_layers()
    if ties:
        log.info("score ties broken towards the lowest choice in layers %s", ties)
    return tuple(int(np.argmax(s)) for s in leaderboard.scores)


def path_priority_search(
    space: SearchSpace,
    evaluator: Evaluator,
    budget: SearchBudget = SearchBudget(),
    seed: int = 0,
    *,
    K: int | None = None,
    reseed_per_cycle: bool = False,
    parallelism: int = 1,
) -> SearchResult:
    budget.check(space)
    board = Leaderboard.for_space(space)
    sampler = PermutationScheduler(space, seed)
    records = []
    for cycle in range(budget.T):
        if reseed_per_cycle:
            sampler = PermutationScheduler(space, int(generator(seed, "reseed", cycle).integers(2**63)))
        results = run_cycle(sampler, evaluator, budget.E, parallelism)
        records += [EvalRecord("path-priority", cycle, j, a, f) for j, (a, f) in enumerate(results)]
        board = score_cycle(results, board, K)
    best = select_best(board)
    return SearchResult("path-priority", best, float(evaluator(best)), records, board)


def random_search(space: SearchSpace, evaluator: Evaluator, n: int = 300, seed: int = 0,
                  parallelism: int = 1) -> SearchResult:
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = generator(seed, "random-search")
    counts = np.asarray(space.choice_counts)
    archs = [tuple(int(c) for c in rng.integers(counts)) for _ in range(n)]
    fits = _evaluate_all(evaluator, archs, parallelism)
    i = int(np.argmax(fits))
    records = [EvalRecord("random", 0, j, a, f) for j, (a, f) in enumerate(zip(archs, fits))]
    return SearchResult("random", archs[i], fits[i], records)


def ea_search(space: SearchSpace, evaluator: Evaluator, config: EAConfig = EAConfig(),
              seed: int = 0, parallelism: int = 1) -> SearchResult:
    """Generational EA with elitism, tournament selection, uniform crossover and mutation.

    Every generation evaluates its whole population (elites included), so the
    budget is exactly ``population_size * generations``.
    """
    rng = generator(seed, "ea")
    counts = space.choice_counts
    pop = [tuple(int(c) for c in rng.integers(counts)) for _ in range(config.population_size)]
    records: list[EvalRecord] = []
    best, best_fit = None, -math.inf
    for gen in range(config.generations):
        fits = _evaluate_all(evaluator, pop, parallelism)
        records += [EvalRecord("ea", gen, j, a, f) for j, (a, f) in enumerate(zip(pop, fits))]
        for a, f in zip(pop, fits):
            if f > best_fit:
                best, best_fit = a, f
        if gen == config.generations - 1:
            break
        # stable sort: equal fitness keeps draw order
        order = sorted(range(len(pop)), key=lambda j: -fits[j])
        nxt = [pop[j] for j in order[:config.elite_count]]
        while len(nxt) < config.population_size:
            a = _tournament(rng, pop, fits, config.tournament_size)
            if rng.random() < config.crossover_prob:
                b = _tournament(rng, pop, fits, config.tournament_size)
                mask = rng.random(len(a)) < 0.5
                child = [x if m else y for x, y, m in zip(a, b, mask)]
            else:
                child = list(a)
            for l, p in enumerate(counts):
                if p > 1 and rng.random() < config.mutation_prob:
                    # uniform over the other p - 1 choices
                    child[l] = (child[l] + 1 + int(rng.integers(p - 1))) % p
            nxt.append(tuple(child))
        pop = nxt
    return SearchResult("ea", best, best_fit, records)


def _tournament(rng, pop, fits, size):
    picks = rng.integers(len(pop), size=size)
    return pop[max(picks, key=lambda j: (fits[j], -j))]
