"""Slow, obviously-correct reference implementations.

These exist to check the fast paths (test suite and acceptance runs). They
share no code with ``ranking`` or ``estimator`` beyond the ObjectivePair type.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .ranking import ObjectivePair, SortedFronts


def _dominates(a: ObjectivePair, b: ObjectivePair) -> bool:
    no_worse = a.fitness >= b.fitness and a.evolvability >= b.evolvability
    better = a.fitness > b.fitness or a.evolvability > b.evolvability
    return no_worse and better


def _crowding(front: list[int], pairs: Sequence[ObjectivePair]) -> dict[int, float]:
    dist = {p: 0.0 for p in front}
    if len(front) <= 2:
        return {p: math.inf for p in front}
    for key in (lambda p: pairs[p].fitness, lambda p: pairs[p].evolvability):
        ordered = sorted(front, key=lambda p: (key(p), pairs[p].sample_index))
        lo, hi = key(ordered[0]), key(ordered[-1])
        dist[ordered[0]] = math.inf
        dist[ordered[-1]] = math.inf
        for j in range(1, len(ordered) - 1):
            if hi > lo:
                dist[ordered[j]] += (key(ordered[j + 1]) - key(ordered[j - 1])) / (hi - lo)
    return dist


def brute_force_fronts(pairs: Sequence[ObjectivePair]) -> SortedFronts:
    """Peel fronts: each round keeps the points no remaining point dominates."""
    remaining = list(range(len(pairs)))
    fronts = []
    while remaining:
        front = [
            p for p in remaining
            if not any(_dominates(pairs[q], pairs[p]) for q in remaining if q != p)
        ]
        fronts.append(sorted(front))
        taken = set(front)
        remaining = [p for p in remaining if p not in taken]
    crowding = [0.0] * len(pairs)
    for front in fronts:
        for p, d in _crowding(front, pairs).items():
            crowding[p] = d
    return SortedFronts(fronts=fronts, crowding=crowding)


def smoothed_gradient_mc(
    fitness_fn: Callable[[np.ndarray], float],
    center,
    sigma: float,
    n_large: int,
    seed: int = 0,
) -> np.ndarray:
    """Plain Monte-Carlo estimate of the gradient of E[F(center + sigma * eps)].

    Fresh i.i.d. normal draws, raw fitness values, no mirroring or shaping.
    """
    c = np.asarray(center, dtype=np.float64)
    rng = np.random.default_rng(seed)
    grad = np.zeros_like(c)
    for _ in range(n_large):
        eps = rng.standard_normal(c.size)
        grad += fitness_fn(c + sigma * eps) * eps
    return grad / (n_large * sigma)
