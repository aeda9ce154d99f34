"""Adam gradient ascent with an L2 penalty on the distribution center."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import ParameterVector, as_array
from .errors import DimensionMismatch, NonFiniteGradient


@dataclass(frozen=True, eq=False)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step_count: int = 0
    alpha: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    l2_coeff: float = 0.005

    def __post_init__(self):
        for name in ("m", "v"):
            arr = np.array(getattr(self, name), dtype=np.float64, copy=True).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.m.shape != self.v.shape:
            raise DimensionMismatch("m and v must have the same dimension")
        if np.any(self.v < 0):
            raise ValueError("second moment must be non-negative")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.l2_coeff >= 0:
            raise ValueError("l2_coeff must be non-negative")

    @classmethod
    def zeros(cls, dim: int, **hyper) -> "AdamState":
        return cls(m=np.zeros(dim), v=np.zeros(dim), **hyper)

    @property
    def dim(self) -> int:
        return int(self.m.size)

    def hyperparameters(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "l2_coeff": self.l2_coeff,
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, AdamState):
            return NotImplemented
        return (
            self.m.tobytes() == other.m.tobytes()
            and self.v.tobytes() == other.v.tobytes()
            and self.step_count == other.step_count
            and self.hyperparameters() == other.hyperparameters()
        )


def adam_step(state: AdamState, theta, grad) -> tuple[ParameterVector, AdamState]:
    """One maximizing Adam step on ``grad - l2_coeff * theta``.

    ``grad`` may be a GradientEstimate or a plain vector.
    """
    th = as_array(theta)
    g_raw = np.asarray(getattr(grad, "vector", grad), dtype=np.float64)
    if th.shape != g_raw.shape or th.size != state.dim:
        raise DimensionMismatch(f"theta {th.size}, grad {g_raw.size}, optimizer state {state.dim}")
    if not np.all(np.isfinite(g_raw)):
        raise NonFiniteGradient("gradient contains NaN/Inf")

    g = g_raw - state.l2_coeff * th
    t = state.step_count + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    v = state.beta2 * state.v + (1.0 - state.beta2) * (g * g)
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_theta = th + state.alpha * m_hat / (np.sqrt(v_hat) + state.eps)
    return ParameterVector(new_theta), replace(state, m=m, v=v, step_count=t)
