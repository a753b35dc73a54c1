"""Layered search spaces and the flat architecture encoding.

An architecture is a tuple of choice indices, one per search layer. Layers are
numbered globally and contiguously across groups in declaration order.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

Architecture = tuple[int, ...]

DEFAULT_ENUMERATION_CAP = 10**6


@dataclass(frozen=True)
class LayerGroup:
    name: str
    num_layers: int
    num_choices: int
    choice_labels: tuple[str, ...] = ()

    def __post_init__(self):
        labels = tuple(self.choice_labels) or tuple(f"op{i}" for i in range(self.num_choices))
        object.__setattr__(self, "choice_labels", labels)
        if self.num_layers < 1:
            raise ValueError(f"group {self.name!r}: num_layers must be >= 1")
        if self.num_choices < 1:
            raise ValueError(f"group {self.name!r}: num_choices must be >= 1")
        if len(labels) != self.num_choices:
            raise ValueError(
                f"group {self.name!r}: {len(labels)} labels for {self.num_choices} choices"
            )
        if len(set(labels)) != len(labels):
            raise ValueError(f"group {self.name!r}: choice labels must be distinct")


@dataclass(frozen=True)
class SearchSpace:
    groups: tuple[LayerGroup, ...]
    _offsets: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise ValueError("a search space needs at least one group")
        names = [g.name for g in groups]
        if len(set(names)) != len(names):
            raise ValueError("group names must be distinct")
        object.__setattr__(self, "groups", groups)
        offsets = [0]
        for g in groups:
            offsets.append(offsets[-1] + g.num_layers)
        object.__setattr__(self, "_offsets", tuple(offsets))

    @property
    def total_layers(self) -> int:
        return self._offsets[-1]

    @property
    def choice_counts(self) -> tuple[int, ...]:
        """Number of choices for every layer, in global layer order."""
        return tuple(g.num_choices for g in self.groups for _ in range(g.num_layers))

    def group_offset(self, name: str) -> int:
        for g, off in zip(self.groups, self._offsets):
            if g.name == name:
                return off
        raise KeyError(name)

    def group_of(self, layer_index: int) -> LayerGroup:
        if not 0 <= layer_index < self.total_layers:
            raise IndexError("layer index out of bounds")
        return self.groups[bisect.bisect_right(self._offsets, layer_index) - 1]

    def label(self, layer_index: int, choice: int) -> str:
        return self.group_of(layer_index).choice_labels[choice]

    def __add__(self, other: "SearchSpace") -> "SearchSpace":
        return SearchSpace(self.groups + other.groups)

    def shape(self) -> list[list]:
        """Compact ``[name, layers, choices, labels]`` rows, used in serialized documents."""
        return [[g.name, g.num_layers, g.num_choices, list(g.choice_labels)] for g in self.groups]

    @classmethod
    def from_shape(cls, rows) -> "SearchSpace":
        return cls(tuple(LayerGroup(n, int(l), int(c), tuple(lab)) for n, l, c, lab in rows))


def paper_space() -> SearchSpace:
    """The 40 x 4 backbone, 7 x 6 head and 9 x 3 inter-modular space."""
    return SearchSpace((
        LayerGroup("backbone", 40, 4, ("Shuffle3x3", "Shuffle5x5", "Shuffle7x7", "Xception3x3")),
        LayerGroup("head", 7, 6, ("DWConv3x3", "DWConv5x5", "ATConv3x3",
                                  "ATConv5x5", "DFConv3x3", "DFConv5x5")),
        LayerGroup("inter", 9, 3, ("r4", "r8", "r16")),
    ))


def uniform_space(num_layers: int, num_choices: int, name: str = "toy") -> SearchSpace:
    return SearchSpace((LayerGroup(name, num_layers, num_choices),))


def space_size(space: SearchSpace) -> int:
    """Exact number of architectures in ``space``."""
    return math.prod(g.num_choices ** g.num_layers for g in space.groups)


def layer_info(space: SearchSpace, layer_index: int) -> tuple[str, int]:
    g = space.group_of(layer_index)
    return g.name, g.num_choices


def validate(space: SearchSpace, arch: Sequence[int]) -> bool:
    try:
        choices = tuple(arch)
    except TypeError:
        return False
    if len(choices) != space.total_layers:
        return False
    for c, p in zip(choices, space.choice_counts):
        if isinstance(c, bool) or not isinstance(c, int) or not 0 <= c < p:
            return False
    return True


def enumerate_all(space: SearchSpace, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[Architecture]:
    """Yield every architecture once, in lexicographic order.

    Raises ValueError before yielding anything if the space has more than
    ``cap`` members.
    """
    if space_size(space) > cap:
        raise ValueError("space too large to enumerate")
    return itertools.product(*(range(p) for p in space.choice_counts))


def format_arch(arch: Sequence[int]) -> str:
    return ",".join(str(int(c)) for c in arch)


def parse_arch(text: str) -> Architecture:
    text = text.strip()
    if not text:
        raise ValueError("empty architecture string")
    return tuple(int(p) for p in text.split(","))
