"""Deterministic tanh MLP policy over a flat parameter vector.

Layout: layers in order; each layer stores its (out, in) weight matrix
row-major, followed by its ``out`` biases. Every layer, the output layer
included, is squashed with tanh.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .core import ParameterVector, as_array
from .errors import DimensionMismatch


@dataclass(frozen=True)
class PolicySpec:
    obs_dim: int
    action_dim: int
    hidden: tuple[int, ...] = (16, 16)

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.obs_dim <= 0 or self.action_dim <= 0 or any(h <= 0 for h in self.hidden):
            raise ValueError(f"layer widths must be positive: {self.sizes}")

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.obs_dim, *self.hidden, self.action_dim)

    def layer_sizes_array(self) -> np.ndarray:
        return np.asarray(self.sizes, dtype=np.int64)


def param_count(spec: PolicySpec) -> int:
    s = spec.sizes
    return sum((s[i] + 1) * s[i + 1] for i in range(len(s) - 1))


def unflatten(params, spec: PolicySpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split a flat vector into [(W, b), ...] with W of shape (out, in)."""
    p = as_array(params)
    if p.size != param_count(spec):
        raise DimensionMismatch(f"expected {param_count(spec)} parameters, got {p.size}")
    layers = []
    pos = 0
    s = spec.sizes
    for fan_in, fan_out in zip(s[:-1], s[1:]):
        w = p[pos : pos + fan_in * fan_out].reshape(fan_out, fan_in)
        pos += fan_in * fan_out
        b = p[pos : pos + fan_out]
        pos += fan_out
        layers.append((w, b))
    return layers


def flatten(layers: list[tuple[np.ndarray, np.ndarray]]) -> ParameterVector:
    parts = []
    for w, b in layers:
        parts.append(np.asarray(w, dtype=np.float64).reshape(-1))
        parts.append(np.asarray(b, dtype=np.float64).reshape(-1))
    return ParameterVector(np.concatenate(parts))


def init_params(spec: PolicySpec, seed: int) -> ParameterVector:
    """Weights ~ N(0, 1/fan_in), zero biases."""
    rng = np.random.Generator(np.random.PCG64(seed))
    layers = []
    s = spec.sizes
    for fan_in, fan_out in zip(s[:-1], s[1:]):
        w = rng.standard_normal((fan_out, fan_in)) / np.sqrt(fan_in)
        layers.append((w, np.zeros(fan_out)))
    return flatten(layers)


@numba.njit(cache=True, nogil=True)
def mlp_forward_into(params, sizes, obs, buf_a, buf_b, out):
    """Compiled forward pass; ``buf_a``/``buf_b`` are scratch of max layer width."""
    n_layers = sizes.shape[0] - 1
    for i in range(sizes[0]):
        buf_a[i] = obs[i]
    src = buf_a
    dst = buf_b
    pos = 0
    for layer in range(n_layers):
        fan_in = sizes[layer]
        fan_out = sizes[layer + 1]
        bias_pos = pos + fan_in * fan_out
        for j in range(fan_out):
            acc = 0.0
            row = pos + j * fan_in
            for i in range(fan_in):
                acc += params[row + i] * src[i]
            dst[j] = np.tanh(acc + params[bias_pos + j])
        pos = bias_pos + fan_out
        src, dst = dst, src
    for j in range(sizes[n_layers]):
        out[j] = src[j]


def forward(params, spec: PolicySpec, obs) -> np.ndarray:
    p = np.ascontiguousarray(as_array(params), dtype=np.float64)
    x = np.ascontiguousarray(obs, dtype=np.float64).reshape(-1)
    if x.size != spec.obs_dim:
        raise DimensionMismatch(f"expected observation of size {spec.obs_dim}, got {x.size}")
    if p.size != param_count(spec):
        raise DimensionMismatch(f"expected {param_count(spec)} parameters, got {p.size}")
    width = max(spec.sizes)
    out = np.empty(spec.action_dim)
    mlp_forward_into(p, spec.layer_sizes_array(), x, np.empty(width), np.empty(width), out)
    return out
