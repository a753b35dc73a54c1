"""Uniform sampling of choice paths without replacement.

Each layer owns a deck holding a shuffled permutation of its choices. A draw
takes the front card of every deck; an empty deck is reshuffled first. Decks
refill independently, so layers with different choice counts stay fair on
their own schedules.
"""
from __future__ import annotations

import math

import numpy as np

from pathnas.rng import generator
from pathnas.searchspace import Architecture, SearchSpace


def fairness_window(space: SearchSpace) -> int:
    """Smallest draw count after which every layer has emptied its deck."""
    return math.lcm(*space.choice_counts)


class PermutationScheduler:
    """Draws architectures so every path in a layer is used equally often.

    The permutation for refill ``k`` of layer ``l`` comes from its own
    counter-keyed stream ``(seed, "deck", l, k)``, which makes the scheduler
    state small (decks plus refill counters) and trivially serializable.
    """

    def __init__(self, space: SearchSpace, seed: int = 0):
        self.space = space
        self.seed = seed
        self.decks: list[list[int]] = [[] for _ in range(space.total_layers)]
        self.refills = [0] * space.total_layers
        self.draw_count = 0
        self._counts = [np.zeros(p, dtype=np.int64) for p in space.choice_counts]

    def _refill(self, layer: int) -> None:
        p = self.space.choice_counts[layer]
        rng = generator(self.seed, "deck", layer, self.refills[layer])
        self.decks[layer] = [int(c) for c in rng.permutation(p)]
        self.refills[layer] += 1

    def __iter__(self):
        return self

    def __next__(self) -> Architecture:
        arch = []
        for layer, deck in enumerate(self.decks):
            if not deck:
                self._refill(layer)
                deck = self.decks[layer]
            choice = deck.pop(0)
            self._counts[layer][choice] += 1
            arch.append(choice)
        self.draw_count += 1
        return tuple(arch)

    def draw(self, n: int) -> list[Architecture]:
        return [next(self) for _ in range(n)]

    def fairness_report(self) -> list[list[int]]:
        """Activation count of every (layer, choice), layer-major."""
        return [c.tolist() for c in self._counts]

    def state_dict(self) -> dict:
        return {
            "seed": self.seed,
            "decks": [list(d) for d in self.decks],
            "refills": list(self.refills),
            "draw_count": self.draw_count,
            "counts": self.fairness_report(),
        }

    @classmethod
    def from_state(cls, space: SearchSpace, state: dict) -> "PermutationScheduler":
        sched = cls(space, state["seed"])
        if len(state["decks"]) != space.total_layers:
            raise ValueError("scheduler state does not match the search space")
        sched.decks = [list(map(int, d)) for d in state["decks"]]
        sched.refills = list(map(int, state["refills"]))
        sched.draw_count = int(state["draw_count"])
        sched._counts = [np.asarray(c, dtype=np.int64) for c in state["counts"]]
        return sched
