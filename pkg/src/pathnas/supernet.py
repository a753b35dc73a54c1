"""A toy weight-sharing supernet trained with fair path sampling.

Every (layer, choice) owns a block: an affine map into the hidden width
followed by a choice-specific nonlinearity. A shared linear head turns the
last hidden vector into class logits. Choice labels select the block type:

* ``relu``, ``tanh``, ``sigmoid``, ``identity``: elementwise activation
* ``<act>:<w>``: same activation, only the first ``w`` hidden units live
* ``att:<r>``: channel attention gate with reduction ratio ``r``

Gradients are accumulated per micro-step for whichever path the sampler
picked and applied once per accumulation window with SGD (momentum and
weight decay), each block's gradient averaged over the times it was picked.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from pathnas import attention
from pathnas.rng import generator
from pathnas.sampler import PermutationScheduler, fairness_window
from pathnas.searchspace import LayerGroup, SearchSpace, validate

CHECKPOINT_MAGIC = b"PATHNAS-SUPERNET\n"
CHECKPOINT_FORMAT = 1

ACTIVATIONS = ("relu", "tanh", "sigmoid", "identity")


@dataclass(frozen=True)
class BlockSpec:
    kind: str  # one of ACTIVATIONS or "att"
    width: int | None = None  # live hidden units; None = all
    reduction: int | None = None  # only for "att"


def parse_block(label: str, hidden_dim: int) -> BlockSpec:
    name, _, arg = label.partition(":")
    if name == "att":
        r = int(arg) if arg else 4
        if hidden_dim % r:
            raise ValueError(f"block {label!r}: hidden_dim {hidden_dim} not divisible by {r}")
        return BlockSpec("att", reduction=r)
    if name not in ACTIVATIONS:
        raise ValueError(f"unknown block label {label!r}")
    width = int(arg) if arg else None
    if width is not None and not 1 <= width <= hidden_dim:
        raise ValueError(f"block {label!r}: width must be in [1, {hidden_dim}]")
    return BlockSpec(name, width=width)


def toy_space(num_layers: int = 3, labels: Sequence[str] = ("relu", "tanh:4", "identity")) -> SearchSpace:
    return SearchSpace((LayerGroup("toy", num_layers, len(labels), tuple(labels)),))


@dataclass(frozen=True)
class Hyper:
    learning_rate: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 1e-4
    hidden_dim: int = 16
    accumulation_window: int = 0  # 0 = lcm of the space's choice counts


# ---------------------------------------------------------------------------
# toy task


@dataclass(frozen=True)
class ToyTask:
    x_train: np.ndarray
    y_train: np.ndarray
    x_val: np.ndarray
    y_val: np.ndarray
    num_classes: int
    seed: int = 0

    @property
    def input_dim(self) -> int:
        return self.x_train.shape[1]

    def train_batch(self, index: int, batch_size: int) -> tuple[np.ndarray, np.ndarray]:
        """The ``index``-th minibatch of the infinite epoch-shuffled stream."""
        n = len(self.y_train)
        per_epoch = max(1, n // batch_size)
        epoch, pos = divmod(index, per_epoch)
        order = generator(self.seed, "batches", epoch).permutation(n)
        idx = order[pos * batch_size:(pos + 1) * batch_size]
        return self.x_train[idx], self.y_train[idx]

    def batches_per_epoch(self, batch_size: int) -> int:
        return max(1, len(self.y_train) // batch_size)


def make_toy_task(
    input_dim: int = 8,
    num_classes: int = 3,
    clusters_per_class: int = 3,
    n_train: int = 600,
    n_val: int = 300,
    spread: float = 0.8,
    centre_scale: float = 1.0,
    seed: int = 0,
) -> ToyTask:
    """Gaussian clusters, several per class, split into disjoint train/val sets.

    With more than one cluster per class the classes are generally not
    linearly separable, so the block nonlinearities matter.
    """
    rng = generator(seed, "task")
    centres = centre_scale * rng.normal(size=(num_classes * clusters_per_class, input_dim))
    n = n_train + n_val
    which = rng.integers(len(centres), size=n)
    x = centres[which] + spread * rng.normal(size=(n, input_dim))
    y = which % num_classes
    perm = rng.permutation(n)
    tr, va = perm[:n_train], perm[n_train:]
    return ToyTask(x[tr], y[tr], x[va], y[va], num_classes, seed)


# ---------------------------------------------------------------------------
# state


def _act(kind, z):
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    if kind == "sigmoid":
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    return z


def _act_grad(kind, z, out):
    if kind == "relu":
        return (z > 0).astype(z.dtype)
    if kind == "tanh":
        return 1.0 - out * out
    if kind == "sigmoid":
        return out * (1.0 - out)
    return np.ones_like(z)


def _glorot(rng, rows, cols):
    bound = (6.0 / (rows + cols)) ** 0.5
    return rng.uniform(-bound, bound, size=(rows, cols))


class SupernetState:
    """Shared weights, optimizer slots, gradient buffers and fairness counters."""

    def __init__(self, space: SearchSpace, input_dim: int, num_classes: int,
                 hyper: Hyper = Hyper(), seed: int = 0):
        self.space = space
        self.input_dim = input_dim
        self.num_classes = num_classes
        window = hyper.accumulation_window or fairness_window(space)
        self.hyper = Hyper(**{**asdict(hyper), "accumulation_window": window})
        self.seed = seed
        h = self.hyper.hidden_dim
        self.blocks = [[parse_block(space.label(l, c), h) for c in range(p)]
                       for l, p in enumerate(space.choice_counts)]
        rng = generator(seed, "supernet-init")
        self.params: dict[str, np.ndarray] = {}
        for l, specs in enumerate(self.blocks):
            fan_in = input_dim if l == 0 else h
            for c, spec in enumerate(specs):
                self.params[f"L{l}.C{c}.W"] = _glorot(rng, fan_in, h)
                self.params[f"L{l}.C{c}.b"] = np.zeros(h)
                if spec.kind == "att":
                    m = h // spec.reduction
                    self.params[f"L{l}.C{c}.w1"] = _glorot(rng, h, m)
                    self.params[f"L{l}.C{c}.w2"] = _glorot(rng, m, h)
        self.params["head.W"] = _glorot(rng, h, num_classes)
        self.params["head.b"] = np.zeros(num_classes)
        self.momentum = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.update_counts = [np.zeros(p, dtype=np.int64) for p in space.choice_counts]
        self.window_counts = [np.zeros(p, dtype=np.int64) for p in space.choice_counts]
        self.micro_in_window = 0
        self.micro_steps = 0
        self.macro_steps = 0

    def block_keys(self, layer: int, choice: int) -> list[str]:
        prefix = f"L{layer}.C{choice}."
        return [k for k in self.params if k.startswith(prefix)]


# ---------------------------------------------------------------------------
# forward / backward


def forward(state: SupernetState, arch: Sequence[int], x: np.ndarray):
    """Logits of the single-path model ``arch`` and the cache for backprop."""
    if not validate(state.space, arch):
        raise ValueError("architecture does not fit supernet space")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] != state.input_dim:
        raise ValueError(f"batch must be (n>0, {state.input_dim}), got {x.shape}")
    p = state.params
    cache = []
    h = x
    for l, c in enumerate(arch):
        spec = state.blocks[l][c]
        z = h @ p[f"L{l}.C{c}.W"] + p[f"L{l}.C{c}.b"]
        if spec.kind == "att":
            a, gate_cache = attention._gate_forward(p[f"L{l}.C{c}.w1"], p[f"L{l}.C{c}.w2"], z)
            out = z * (1.0 + a)
            cache.append((h, z, out, a, gate_cache))
        else:
            out = _act(spec.kind, z)
            if spec.width is not None:
                out = out.copy()
                out[:, spec.width:] = 0.0
            cache.append((h, z, out, None, None))
        h = out
    logits = h @ p["head.W"] + p["head.b"]
    return logits, (cache, h)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient w.r.t. the logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    n = len(labels)
    loss = -float(logp[np.arange(n), labels].mean())
    grad = np.exp(logp)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


def backward(state: SupernetState, arch: Sequence[int], cache, grad_logits) -> dict[str, np.ndarray]:
    layers, top = cache
    p = state.params
    grads = {"head.W": top.T @ grad_logits, "head.b": grad_logits.sum(axis=0)}
    dh = grad_logits @ p["head.W"].T
    for l in reversed(range(len(arch))):
        c = arch[l]
        spec = state.blocks[l][c]
        h_in, z, out, a, gate_cache = layers[l]
        if spec.kind == "att":
            w1, w2 = p[f"L{l}.C{c}.w1"], p[f"L{l}.C{c}.w2"]
            dw1, dw2, dz_gate = attention._gate_backward(w1, w2, gate_cache, dh * z)
            dz = dh * (1.0 + a) + dz_gate
            grads[f"L{l}.C{c}.w1"] = dw1
            grads[f"L{l}.C{c}.w2"] = dw2
        else:
            dz = dh * _act_grad(spec.kind, z, out)
            if spec.width is not None:
                dz[:, spec.width:] = 0.0
        grads[f"L{l}.C{c}.W"] = h_in.T @ dz
        grads[f"L{l}.C{c}.b"] = dz.sum(axis=0)
        dh = dz @ p[f"L{l}.C{c}.W"].T
    return grads


def loss_and_grads(state, arch, x, y):
    logits, cache = forward(state, arch, x)
    loss, g = cross_entropy(logits, np.asarray(y))
    return loss, backward(state, arch, cache, g)


def accumulate_gradients(state: SupernetState, arch: Sequence[int], x, y) -> float:
    """Add this path's loss gradients to the buffers; return the loss."""
    loss, grads = loss_and_grads(state, arch, x, y)
    for k, g in grads.items():
        state.grads[k] += g
    for l, c in enumerate(arch):
        state.window_counts[l][c] += 1
    state.micro_in_window += 1
    state.micro_steps += 1
    return loss


def _sgd(state: SupernetState, key: str, scale: float) -> None:
    hp = state.hyper
    w, v = state.params[key], state.momentum[key]
    g = state.grads[key] * scale + hp.weight_decay * w
    v *= hp.momentum
    v += g
    w -= hp.learning_rate * v


def macro_step(state: SupernetState) -> SupernetState:
    """Apply one SGD update from a full accumulation window, then zero the buffers."""
    if state.micro_in_window != state.hyper.accumulation_window:
        raise RuntimeError("incomplete accumulation window")
    for l, counts in enumerate(state.window_counts):
        for c, n in enumerate(counts):
            if n:
                for key in state.block_keys(l, c):
                    _sgd(state, key, 1.0 / n)
        state.update_counts[l] += counts
        counts[:] = 0
    for key in ("head.W", "head.b"):
        _sgd(state, key, 1.0 / state.micro_in_window)
    for g in state.grads.values():
        g[:] = 0.0
    state.micro_in_window = 0
    state.macro_steps += 1
    return state


def train(
    state: SupernetState,
    task: ToyTask,
    macro_steps: int,
    batch_size: int = 32,
    sampler: Iterable | None = None,
) -> list[float]:
    """Fair supernet training; returns the loss of every micro-step."""
    if sampler is None:
        sampler = PermutationScheduler(state.space, state.seed)
    sampler = iter(sampler)
    losses = []
    for _ in range(macro_steps):
        for _ in range(state.hyper.accumulation_window):
            arch = next(sampler)
            x, y = task.train_batch(state.micro_steps, batch_size)
            losses.append(accumulate_gradients(state, arch, x, y))
        macro_step(state)
    return losses


def estimate_fitness(state: SupernetState, arch: Sequence[int], x_val, y_val) -> float:
    """Validation accuracy of the single path ``arch`` under the shared weights."""
    logits, _ = forward(state, arch, x_val)
    return float(np.mean(np.argmax(logits, axis=1) == np.asarray(y_val)))


def train_standalone(arch: Sequence[int], space: SearchSpace, task: ToyTask, steps: int,
                     hyper: Hyper = Hyper(), batch_size: int = 32, seed: int = 0) -> SupernetState:
    """Train one fixed path on its own, one update per batch."""
    state = SupernetState(space, task.input_dim, task.num_classes,
                          Hyper(**{**asdict(hyper), "accumulation_window": 1}), seed)
    arch = tuple(arch)
    for _ in range(steps):
        x, y = task.train_batch(state.micro_steps, batch_size)
        accumulate_gradients(state, arch, x, y)
        macro_step(state)
    return state


# ---------------------------------------------------------------------------
# gradient check


def gradient_check(state: SupernetState, arch: Sequence[int], x, y, step: float = 1e-5) -> float:
    """Max relative error of analytic vs central-difference gradients on the chosen path."""
    _, grads = loss_and_grads(state, arch, x, y)
    worst = 0.0
    for key, analytic in grads.items():
        w = state.params[key]
        numeric = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            old = w[idx]
            w[idx] = old + step
            up, _ = cross_entropy(forward(state, arch, x)[0], y)
            w[idx] = old - step
            down, _ = cross_entropy(forward(state, arch, x)[0], y)
            w[idx] = old
            numeric[idx] = (up - down) / (2 * step)
        worst = max(worst, attention.relative_error(analytic, numeric))
    return worst


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(state: SupernetState, path, sampler: PermutationScheduler | None = None) -> None:
    """Header line (JSON) then every array as little-endian float64, row-major."""
    if state.micro_in_window:
        raise RuntimeError("cannot checkpoint in the middle of an accumulation window")
    keys = list(state.params)
    header = {
        "format": CHECKPOINT_FORMAT,
        "space": state.space.shape(),
        "hyper": asdict(state.hyper),
        "seed": state.seed,
        "input_dim": state.input_dim,
        "num_classes": state.num_classes,
        "macro_steps": state.macro_steps,
        "micro_steps": state.micro_steps,
        "update_counts": [c.tolist() for c in state.update_counts],
        "sampler": sampler.state_dict() if sampler is not None else None,
        "arrays": [[k, list(state.params[k].shape)] for k in keys],
    }
    payload = b"".join(np.ascontiguousarray(state.params[k], dtype="<f8").tobytes() for k in keys)
    payload += b"".join(np.ascontiguousarray(state.momentum[k], dtype="<f8").tobytes() for k in keys)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        fh.write(payload)


def load_checkpoint(path) -> tuple[SupernetState, PermutationScheduler | None]:
    with open(path, "rb") as fh:
        if fh.readline() != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a supernet checkpoint")
        header = json.loads(fh.readline())
        payload = fh.read()
    if header["format"] != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: unsupported checkpoint format {header['format']}")
    space = SearchSpace.from_shape(header["space"])
    state = SupernetState(space, header["input_dim"], header["num_classes"],
                          Hyper(**header["hyper"]), header["seed"])
    offset = 0
    for target in (state.params, state.momentum):
        for key, shape in header["arrays"]:
            n = math.prod(shape) * 8
            target[key] = np.frombuffer(payload[offset:offset + n], dtype="<f8").reshape(shape).astype(np.float64)
            offset += n
    if offset != len(payload):
        raise ValueError(f"{path}: payload size mismatch")
    state.update_counts = [np.asarray(c, dtype=np.int64) for c in header["update_counts"]]
    state.macro_steps = header["macro_steps"]
    state.micro_steps = header["micro_steps"]
    sampler = None
    if header["sampler"] is not None:
        sampler = PermutationScheduler.from_state(space, header["sampler"])
    return state, sampler
