"""Bidirectional channel attention between two feature hierarchies.

Source maps are upsampled to a common grid, concatenated and average pooled
into a statistic ``z``. A bottleneck ``W2`` (reduction ratio ``r``) followed
by ``1 - sigmoid``, then ``W1`` and a ReLU, turns ``z`` into a non-negative
per-channel vector ``a`` that recalibrates a target map as ``F * (1 + a)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pathnas.rng import generator

REDUCTION_RATIOS = (4, 8, 16)
DIRECTIONS = ("fg->bg", "bg->fg")


@dataclass(frozen=True)
class FeatureMap:
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3 or 0 in data.shape:
            raise ValueError(f"feature map must be a non-empty C x H x W array, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("feature map contains non-finite values")
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def spatial(self) -> tuple[int, int]:
        return self.data.shape[1], self.data.shape[2]


@dataclass(frozen=True)
class AttentionBlock:
    w1: np.ndarray  # C_s x C_s/r
    w2: np.ndarray  # C_s/r x C_r
    r: int
    direction: str = "fg->bg"

    def __post_init__(self):
        w1 = np.asarray(self.w1, dtype=np.float64)
        w2 = np.asarray(self.w2, dtype=np.float64)
        if w1.ndim != 2 or w2.ndim != 2:
            raise ValueError("W1 and W2 must be matrices")
        c_s, hidden = w1.shape
        if self.r < 1 or c_s % self.r or hidden != c_s // self.r:
            raise ValueError(f"W1 must be C_s x C_s/r with C_s divisible by r, got {w1.shape}, r={self.r}")
        if w2.shape[0] != hidden:
            raise ValueError(f"W2 must be {hidden} x C_r, got {w2.shape}")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "w2", w2)

    @property
    def c_s(self) -> int:
        return self.w1.shape[0]

    @property
    def c_r(self) -> int:
        return self.w2.shape[1]

    @property
    def num_parameters(self) -> int:
        return self.w1.size + self.w2.size


def parameter_count(c_s: int, c_r: int, r: int) -> int:
    """Weights in a block: C_s*C_s/r + C_s/r*C_r (exact integer)."""
    if c_s % r:
        raise ValueError("C_s must be divisible by r")
    return c_s * (c_s // r) + (c_s // r) * c_r


def init_block(c_r: int, c_s: int, r: int, seed: int = 0, direction: str = "fg->bg") -> AttentionBlock:
    if c_s % r:
        raise ValueError("C_s must be divisible by r")
    hidden = c_s // r
    rng = generator(seed, "attention", c_r, c_s, r)
    return AttentionBlock(
        w1=_glorot(rng, c_s, hidden),
        w2=_glorot(rng, hidden, c_r),
        r=r,
        direction=direction,
    )


def _glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    bound = (6.0 / (rows + cols)) ** 0.5
    return rng.uniform(-bound, bound, size=(rows, cols))


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def bilinear_upsample(data: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Resize a C x H x W array to ``size`` with half-pixel-centre sampling.

    Source coordinates are ``(i + 0.5) * in / out - 0.5`` clamped at 0, the
    usual align-corners-false convention.
    """
    out_h, out_w = size
    _, in_h, in_w = data.shape
    if (in_h, in_w) == (out_h, out_w):
        return data.copy()
    y0, y1, wy = _axis_weights(in_h, out_h)
    x0, x1, wx = _axis_weights(in_w, out_w)
    rows = data[:, y0, :] * (1 - wy)[None, :, None] + data[:, y1, :] * wy[None, :, None]
    return rows[:, :, x0] * (1 - wx)[None, None, :] + rows[:, :, x1] * wx[None, None, :]


def _axis_weights(n_in: int, n_out: int):
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.maximum(src, 0.0)
    lo = np.minimum(np.floor(src).astype(np.int64), n_in - 1)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, src - lo


def squeeze(maps: Sequence[FeatureMap]) -> np.ndarray:
    if not maps:
        raise ValueError("squeeze needs at least one feature map")
    h = max(m.spatial[0] for m in maps)
    w = max(m.spatial[1] for m in maps)
    stacked = np.concatenate([bilinear_upsample(m.data, (h, w)) for m in maps], axis=0)
    return stacked.mean(axis=(1, 2))


def _gate_forward(w1, w2, z):
    # z: (..., C_r); returns attention (..., C_s) and the cache for backprop
    h = z @ w2.T
    s = _sigmoid(h)
    g = 1.0 - s
    u = g @ w1.T
    return np.maximum(u, 0.0), (z, s, g, u)


def _gate_backward(w1, w2, cache, grad_a):
    z, s, g, u = cache
    du = grad_a * (u > 0)
    dw1 = du.reshape(-1, du.shape[-1]).T @ g.reshape(-1, g.shape[-1])
    dg = du @ w1
    dh = -dg * s * (1.0 - s)
    dw2 = dh.reshape(-1, dh.shape[-1]).T @ z.reshape(-1, z.shape[-1])
    dz = dh @ w2
    return dw1, dw2, dz


def excite(block: AttentionBlock, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (block.c_r,):
        raise ValueError(f"z must have length {block.c_r}, got shape {z.shape}")
    a, _ = _gate_forward(block.w1, block.w2, z)
    return a


def calibrate(feature: FeatureMap, a: np.ndarray) -> FeatureMap:
    a = np.asarray(a, dtype=np.float64)
    if a.shape != (feature.channels,):
        raise ValueError(f"attention length {a.shape} does not match {feature.channels} channels")
    data = feature.data
    return FeatureMap(data + a[:, None, None] * data)


def cross_calibrate(
    fg_maps: Sequence[FeatureMap],
    bg_maps: Sequence[FeatureMap],
    fg_to_bg: Sequence[AttentionBlock],
    bg_to_fg: Sequence[AttentionBlock],
) -> tuple[list[FeatureMap], list[FeatureMap]]:
    """Calibrate both hierarchies against each other.

    One statistic is pooled per direction from the uncalibrated maps and
    shared across levels; every level has its own block. Neither direction
    sees the other's output.
    """
    if len(fg_to_bg) != len(bg_maps) or len(bg_to_fg) != len(fg_maps):
        raise ValueError("need one attention block per target level")
    z_fg = squeeze(fg_maps)
    z_bg = squeeze(bg_maps)
    new_bg = [calibrate(s, excite(b, z_fg)) for s, b in zip(bg_maps, fg_to_bg)]
    new_fg = [calibrate(f, excite(b, z_bg)) for f, b in zip(fg_maps, bg_to_fg)]
    return new_fg, new_bg


def readout_gradients(block: AttentionBlock, feature: FeatureMap, z: np.ndarray):
    """Analytic gradients of ``sum(calibrate(feature, excite(block, z)))``."""
    a, cache = _gate_forward(block.w1, block.w2, np.asarray(z, dtype=np.float64))
    grad_a = feature.data.sum(axis=(1, 2))
    dw1, dw2, _ = _gate_backward(block.w1, block.w2, cache, grad_a)
    return dw1, dw2


def _readout(w1, w2, feature, z):
    a, _ = _gate_forward(w1, w2, z)
    return float(np.sum(feature.data * (1.0 + a)[:, None, None]))


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """Largest entrywise ``|a - n| / max(|a|, |n|, floor)``."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom, initial=0.0))


def gradient_check_attention(
    block: AttentionBlock,
    feature: FeatureMap,
    z: np.ndarray | None = None,
    step: float = 1e-5,
) -> float:
    """Max relative error of the analytic W1/W2 gradients against central differences.

    ``z`` defaults to the pooled statistic of ``feature`` itself, which
    requires ``feature.channels == block.c_r``.
    """
    if feature.channels != block.c_s:
        raise ValueError("feature channels must equal the block's C_s")
    if z is None:
        if feature.channels != block.c_r:
            raise ValueError("pass z explicitly when C_r differs from the feature channels")
        z = squeeze([feature])
    z = np.asarray(z, dtype=np.float64)
    dw1, dw2 = readout_gradients(block, feature, z)
    w1, w2 = block.w1.copy(), block.w2.copy()
    errors = []
    for w, analytic in ((w1, dw1), (w2, dw2)):
        numeric = np.zeros_like(w)
        for idx in np.ndindex(w.shape):
            old = w[idx]
            w[idx] = old + step
            up = _readout(w1, w2, feature, z)
            w[idx] = old - step
            down = _readout(w1, w2, feature, z)
            w[idx] = old
            numeric[idx] = (up - down) / (2 * step)
        errors.append(relative_error(analytic, numeric))
    return max(errors)
