"""Experiment configuration: a flat ``dotted.key = value`` text file.

Lines starting with ``#`` are comments. Every key must be known; anything
else is a :class:`ConfigError`. The search space is declared either with a
preset (``space.preset = paper | toy``) or group by group::

    space.groups = backbone,head
    space.backbone.layers = 4
    space.backbone.labels = relu,tanh,identity
"""
from __future__ import annotations

import dataclasses
import hashlib
import typing
from dataclasses import dataclass, field

from pathnas.sampler import fairness_window
from pathnas.search import EAConfig, SearchBudget
from pathnas.searchspace import LayerGroup, SearchSpace, paper_space
from pathnas.supernet import toy_space

EVALUATORS = ("oracle", "supernet")
METHODS = ("path-priority", "ea", "random")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    kind: str = "separable"
    seed: typing.Optional[int] = None  # None: one landscape per run seed
    noise_seed: typing.Optional[int] = None  # None: same as the landscape seed
    interaction_count: int = 10
    interaction_scale: float = 0.3
    noise_sigma: float = 0.05
    path: str = ""  # load this landscape document instead of generating one


@dataclass(frozen=True)
class TaskConfig:
    input_dim: int = 8
    num_classes: int = 3
    clusters_per_class: int = 3
    n_train: int = 600
    n_val: int = 300
    spread: float = 0.8
    seed: int = 0


@dataclass(frozen=True)
class SupernetConfig:
    checkpoint: str = ""
    macro_steps: int = 300
    hidden_dim: int = 16
    learning_rate: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 1e-4
    batch_size: int = 32


@dataclass(frozen=True)
class PathPriorityConfig:
    cycles: int = 5
    models_per_cycle: int = 12
    K: typing.Optional[int] = None  # None: K = models_per_cycle
    reseed_per_cycle: bool = False


@dataclass(frozen=True)
class RandomConfig:
    n: int = 300


@dataclass(frozen=True)
class RunConfig:
    seeds: tuple[int, ...] = (0,)
    output_dir: str = "runs"
    parallelism: int = 1
    enumeration_cap: int = 10**6


@dataclass(frozen=True)
class ExperimentConfig:
    space: SearchSpace
    evaluator: str = "oracle"
    method: str = "path-priority"
    oracle: OracleConfig = field(default_factory=OracleConfig)
    task: TaskConfig = field(default_factory=TaskConfig)
    supernet: SupernetConfig = field(default_factory=SupernetConfig)
    path_priority: PathPriorityConfig = field(default_factory=PathPriorityConfig)
    ea: EAConfig = field(default_factory=EAConfig)
    random: RandomConfig = field(default_factory=RandomConfig)
    run: RunConfig = field(default_factory=RunConfig)

    @property
    def budget(self) -> SearchBudget:
        return SearchBudget(self.path_priority.cycles, self.path_priority.models_per_cycle)

    def declared_evaluations(self) -> int:
        if self.method == "path-priority":
            return self.budget.total
        if self.method == "ea":
            return self.ea.total
        return self.random.n

    def with_seeds(self, seeds) -> "ExperimentConfig":
        return dataclasses.replace(self, run=dataclasses.replace(self.run, seeds=tuple(seeds)))

    def to_items(self) -> dict[str, str]:
        """Canonical ``key -> text`` mapping; parsing it back gives an equal config."""
        items = {"evaluator.kind": self.evaluator, "method.name": self.method}
        items["space.groups"] = ",".join(g.name for g in self.space.groups)
        for g in self.space.groups:
            items[f"space.{g.name}.layers"] = str(g.num_layers)
            items[f"space.{g.name}.labels"] = ",".join(g.choice_labels)
        for section in _SECTIONS:
            obj = getattr(self, section)
            for f in dataclasses.fields(obj):
                items[f"{section}.{f.name}"] = _format(getattr(obj, f.name))
        return dict(sorted(items.items()))

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_items().items())

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:12]

    def evaluator_signature(self) -> dict[str, str]:
        """The config keys that determine what an architecture evaluates to."""
        keep = ("space.", "evaluator.")
        keep += ("oracle.",) if self.evaluator == "oracle" else ("task.", "supernet.checkpoint")
        return {k: v for k, v in self.to_items().items() if k.startswith(keep)}


_SECTIONS = ("oracle", "task", "supernet", "path_priority", "ea", "random", "run")


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return repr(value) if isinstance(value, float) else str(value)


def _coerce(text: str, hint, key: str):
    origin = typing.get_origin(hint)
    try:
        if origin is typing.Union:  # Optional[...]
            if text == "":
                return None
            inner = next(a for a in typing.get_args(hint) if a is not type(None))
            return _coerce(text, inner, key)
        if origin is tuple:
            return tuple(int(p) for p in text.split(",") if p.strip())
        if hint is bool:
            if text.lower() in ("true", "1", "yes"):
                return True
            if text.lower() in ("false", "0", "no"):
                return False
            raise ValueError(text)
        if hint is int:
            return int(text)
        if hint is float:
            return float(text)
        return text
    except (ValueError, StopIteration):
        raise ConfigError(f"{key}: cannot parse {text!r}") from None


def parse_items(text: str) -> dict[str, str]:
    items = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {n}: expected 'key = value'")
        if key in items:
            raise ConfigError(f"line {n}: duplicate key {key}")
        items[key] = value.strip()
    return items


def _space_from(items: dict[str, str]) -> SearchSpace:
    preset = items.pop("space.preset", None)
    names = items.pop("space.groups", None)
    if preset is not None:
        if names is not None:
            raise ConfigError("give either space.preset or space.groups, not both")
        if preset == "paper":
            return paper_space()
        if preset == "toy":
            return toy_space()
        raise ConfigError(f"space.preset: unknown preset {preset!r}")
    if not names:
        raise ConfigError("missing space declaration (space.preset or space.groups)")
    groups = []
    for name in names.split(","):
        name = name.strip()
        layers = items.pop(f"space.{name}.layers", None)
        labels = items.pop(f"space.{name}.labels", None)
        if layers is None or labels is None:
            raise ConfigError(f"group {name!r} needs space.{name}.layers and space.{name}.labels")
        try:
            groups.append(LayerGroup(name, int(layers), len(labels.split(",")),
                                     tuple(l.strip() for l in labels.split(","))))
        except ValueError as exc:
            raise ConfigError(f"space.{name}: {exc}") from None
    try:
        return SearchSpace(tuple(groups))
    except ValueError as exc:
        raise ConfigError(f"space: {exc}") from None


def _section(cls, section: str, items: dict[str, str]):
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for f in dataclasses.fields(cls):
        key = f"{section}.{f.name}"
        if key in items:
            kwargs[f.name] = _coerce(items.pop(key), hints[f.name], key)
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{section}: {exc}") from None


def parse_config(text: str) -> ExperimentConfig:
    items = parse_items(text)
    space = _space_from(items)
    evaluator = items.pop("evaluator.kind", "oracle")
    method = items.pop("method.name", "path-priority")
    sections = {
        "oracle": OracleConfig, "task": TaskConfig, "supernet": SupernetConfig,
        "path_priority": PathPriorityConfig, "ea": EAConfig, "random": RandomConfig,
        "run": RunConfig,
    }
    parts = {name: _section(cls, name, items) for name, cls in sections.items()}
    if items:
        raise ConfigError(f"unknown keys: {', '.join(sorted(items))}")
    cfg = ExperimentConfig(space=space, evaluator=evaluator, method=method, **parts)
    check(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def check(cfg: ExperimentConfig) -> None:
    """Cross-field validation, done before any work starts."""
    if cfg.evaluator not in EVALUATORS:
        raise ConfigError(f"evaluator.kind must be one of {EVALUATORS}")
    if cfg.method not in METHODS:
        raise ConfigError(f"method.name must be one of {METHODS}")
    if cfg.oracle.kind not in ("separable", "interacting", "noisy"):
        raise ConfigError(f"oracle.kind: unknown kind {cfg.oracle.kind!r}")
    if not cfg.run.seeds:
        raise ConfigError("run.seeds must list at least one seed")
    if any(s < 0 for s in cfg.run.seeds):
        raise ConfigError("run.seeds must be non-negative")
    if cfg.run.parallelism < 1:
        raise ConfigError("run.parallelism must be >= 1")
    if cfg.random.n < 1:
        raise ConfigError("random.n must be >= 1")
    if cfg.supernet.macro_steps < 0 or cfg.supernet.batch_size < 1:
        raise ConfigError("supernet.macro_steps must be >= 0 and supernet.batch_size >= 1")
    if cfg.method == "path-priority":
        window = fairness_window(cfg.space)
        pp = cfg.path_priority
        if pp.cycles < 1 or pp.models_per_cycle < 1 or pp.models_per_cycle % window:
            raise ConfigError(
                f"path_priority.models_per_cycle={pp.models_per_cycle} must be a positive "
                f"multiple of {window} and cycles >= 1")
