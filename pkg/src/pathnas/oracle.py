"""Synthetic fitness landscapes with exact brute-force optima.

A landscape scores an architecture as the sum of per-path utilities, plus
pairwise interaction terms whose endpoints are both selected, plus a noise
term that is a fixed hash of ``(seed, architecture)``. Evaluating the same
architecture twice always returns the same float.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Mapping, Sequence

from pathnas.rng import generator
from pathnas.searchspace import (
    DEFAULT_ENUMERATION_CAP,
    Architecture,
    SearchSpace,
    enumerate_all,
    validate,
)

LANDSCAPE_FORMAT = "pathnas-landscape/1"
KINDS = ("separable", "interacting", "noisy")

PathKey = tuple[int, int]
PairKey = tuple[PathKey, PathKey]

_STD_NORMAL = NormalDist()


@dataclass(frozen=True)
class FitnessLandscape:
    """Per-path utilities, sparse pairwise terms and hashed noise; ``seed`` keys the noise."""

    space: SearchSpace
    unary: tuple[tuple[float, ...], ...]
    pairwise: Mapping[PairKey, float] = field(default_factory=dict)
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        counts = self.space.choice_counts
        unary = tuple(tuple(float(v) for v in row) for row in self.unary)
        if len(unary) != len(counts) or any(len(r) != p for r, p in zip(unary, counts)):
            raise ValueError("unary table does not match the space shape")
        object.__setattr__(self, "unary", unary)
        pairwise = {}
        for key, w in sorted(self.pairwise.items()):
            (la, ca), (lb, cb) = key
            if not (0 <= la < lb < len(counts)):
                raise ValueError(f"pairwise key {key} needs 0 <= layer_a < layer_b < total_layers")
            if not (0 <= ca < counts[la] and 0 <= cb < counts[lb]):
                raise ValueError(f"pairwise key {key} references an invalid choice")
            pairwise[((int(la), int(ca)), (int(lb), int(cb)))] = float(w)
        object.__setattr__(self, "pairwise", pairwise)
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    def __call__(self, arch: Sequence[int]) -> float:
        return fitness(self, arch)


def hashed_noise(seed: int, arch: Sequence[int]) -> float:
    """Standard-normal deviate keyed on ``(seed, arch)``; no global state."""
    msg = f"{int(seed)}|{','.join(str(int(c)) for c in arch)}".encode()
    word = int.from_bytes(hashlib.blake2b(msg, digest_size=8).digest(), "little")
    u = ((word >> 11) + 0.5) / 2.0**53
    return _STD_NORMAL.inv_cdf(u)


def fitness(landscape: FitnessLandscape, arch: Sequence[int]) -> float:
    if not validate(landscape.space, arch):
        raise ValueError("architecture does not fit landscape space")
    total = 0.0
    for layer, choice in enumerate(arch):
        total += landscape.unary[layer][choice]
    for ((la, ca), (lb, cb)), w in landscape.pairwise.items():
        if arch[la] == ca and arch[lb] == cb:
            total += w
    if landscape.noise_sigma:
        total += landscape.noise_sigma * hashed_noise(landscape.seed, arch)
    return total


def brute_force_optimum(
    landscape: FitnessLandscape, cap: int = DEFAULT_ENUMERATION_CAP
) -> tuple[Architecture, float]:
    """Exhaustive argmax; ties go to the lexicographically smallest architecture."""
    best, best_fit = None, float("-inf")
    for arch in enumerate_all(landscape.space, cap):
        f = fitness(landscape, arch)
        if f > best_fit:
            best, best_fit = arch, f
    return best, best_fit


def make_landscape(
    space: SearchSpace,
    kind: str,
    seed: int,
    *,
    interaction_count: int = 10,
    interaction_scale: float = 0.3,
    noise_sigma: float = 0.05,
    noise_seed: int | None = None,
) -> FitnessLandscape:
    """Draw a landscape of the given kind.

    Unary utilities are i.i.d. uniform on [0, 1]. ``interacting`` adds
    ``interaction_count`` distinct pairwise terms with weights uniform on
    ``[-interaction_scale, interaction_scale]``; ``noisy`` keeps the
    separable utilities and adds hashed noise of scale ``noise_sigma``.
    ``noise_seed`` (default ``seed``) keys the noise hash alone, so two
    landscapes can share utilities but carry independent noise.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown landscape kind {kind!r}; expected one of {KINDS}")
    counts = space.choice_counts
    rng = generator(seed, "landscape", "unary")
    unary = tuple(tuple(float(v) for v in rng.random(p)) for p in counts)
    pairwise: dict[PairKey, float] = {}
    sigma = 0.0
    if kind == "interacting":
        max_pairs = sum(counts[a] * counts[b]
                        for a in range(len(counts)) for b in range(a + 1, len(counts)))
        if interaction_count > max_pairs:
            raise ValueError(f"space admits at most {max_pairs} pairwise terms")
        rng = generator(seed, "landscape", "pairwise")
        while len(pairwise) < interaction_count:
            la, lb = sorted(int(x) for x in rng.choice(len(counts), size=2, replace=False))
            key = ((la, int(rng.integers(counts[la]))), (lb, int(rng.integers(counts[lb]))))
            w = float(rng.uniform(-interaction_scale, interaction_scale))
            if key not in pairwise:
                pairwise[key] = w
    elif kind == "noisy":
        if noise_sigma <= 0:
            raise ValueError("noisy landscapes need noise_sigma > 0")
        sigma = float(noise_sigma)
    return FitnessLandscape(space, unary, pairwise, sigma, seed if noise_seed is None else noise_seed)


def to_document(landscape: FitnessLandscape) -> str:
    doc = {
        "format": LANDSCAPE_FORMAT,
        "space": landscape.space.shape(),
        "unary": [list(r) for r in landscape.unary],
        "pairwise": [[la, ca, lb, cb, w] for ((la, ca), (lb, cb)), w in landscape.pairwise.items()],
        "noise_sigma": landscape.noise_sigma,
        "seed": landscape.seed,
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def from_document(text: str) -> FitnessLandscape:
    doc = json.loads(text)
    if doc.get("format") != LANDSCAPE_FORMAT:
        raise ValueError(f"unsupported landscape format {doc.get('format')!r}")
    pairwise = {((int(la), int(ca)), (int(lb), int(cb))): float(w)
                for la, ca, lb, cb, w in doc["pairwise"]}
    return FitnessLandscape(SearchSpace.from_shape(doc["space"]), doc["unary"],
                            pairwise, float(doc["noise_sigma"]), int(doc["seed"]))
