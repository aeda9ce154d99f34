"""Fitness shaping and two-objective non-dominated sorting.

Both objectives (fitness, evolvability) are maximized. Every tie is broken by
ascending sample index so results are reproducible bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonFiniteValue, TooFewSamples


@dataclass(frozen=True)
class ObjectivePair:
    fitness: float
    evolvability: float
    sample_index: int

    def __post_init__(self):
        if not (math.isfinite(self.fitness) and math.isfinite(self.evolvability)):
            raise NonFiniteValue(self.sample_index)


@dataclass(frozen=True)
class SortedFronts:
    """``fronts[k]`` lists input positions in front k, ascending.

    ``crowding[p]`` is the crowding distance of position p within its own front.
    """

    fronts: list[list[int]]
    crowding: list[float]

    def front_of(self) -> list[int]:
        rank = [0] * len(self.crowding)
        for k, members in enumerate(self.fronts):
            for p in members:
                rank[p] = k
        return rank


def centered_rank(values: Sequence[float]) -> np.ndarray:
    """Map values to evenly spaced weights in [-0.5, 0.5] by ascending rank."""
    x = np.asarray(values, dtype=np.float64).reshape(-1)
    n = x.size
    if n < 2:
        raise TooFewSamples(f"centered_rank needs at least 2 values, got {n}")
    bad = np.flatnonzero(~np.isfinite(x))
    if bad.size:
        raise NonFiniteValue(int(bad[0]))
    order = np.argsort(x, kind="stable")
    weights = np.empty(n, dtype=np.float64)
    weights[order] = np.arange(n, dtype=np.float64) / (n - 1) - 0.5
    return weights


def dominates(a: ObjectivePair, b: ObjectivePair) -> bool:
    return (
        a.fitness >= b.fitness
        and a.evolvability >= b.evolvability
        and (a.fitness > b.fitness or a.evolvability > b.evolvability)
    )


def _objectives(pairs: Sequence[ObjectivePair]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    f = np.fromiter((p.fitness for p in pairs), dtype=np.float64, count=len(pairs))
    e = np.fromiter((p.evolvability for p in pairs), dtype=np.float64, count=len(pairs))
    idx = np.fromiter((p.sample_index for p in pairs), dtype=np.int64, count=len(pairs))
    return f, e, idx


def _fronts_from_arrays(f: np.ndarray, e: np.ndarray) -> list[list[int]]:
    # Deb's fast non-dominated sort: domination counts, then peel fronts by
    # decrementing the counts of everything the current front dominates.
    ge = (f[:, None] >= f[None, :]) & (e[:, None] >= e[None, :])
    gt = (f[:, None] > f[None, :]) | (e[:, None] > e[None, :])
    dom = ge & gt  # dom[i, j]: i dominates j
    counts = dom.sum(axis=0)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append(current.tolist())
        counts = counts - dom[current].sum(axis=0)
        counts[current] = -1
        current = np.flatnonzero(counts == 0)
    return fronts


def _crowding_from_arrays(f: np.ndarray, e: np.ndarray, idx: np.ndarray) -> np.ndarray:
    m = f.size
    dist = np.zeros(m, dtype=np.float64)
    if m <= 2:
        dist[:] = np.inf
        return dist
    for obj in (f, e):
        order = np.lexsort((idx, obj))
        lo, hi = obj[order[0]], obj[order[-1]]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = hi - lo
        if span > 0:
            gaps = (obj[order[2:]] - obj[order[:-2]]) / span
            dist[order[1:-1]] += gaps
    return dist


def fast_nondominated_sort(pairs: Sequence[ObjectivePair]) -> SortedFronts:
    if len(pairs) < 1:
        raise TooFewSamples("fast_nondominated_sort needs at least one pair")
    f, e, idx = _objectives(pairs)
    fronts = _fronts_from_arrays(f, e)
    crowding = np.zeros(len(pairs), dtype=np.float64)
    for members in fronts:
        m = np.asarray(members)
        crowding[m] = _crowding_from_arrays(f[m], e[m], idx[m])
    return SortedFronts(fronts=fronts, crowding=crowding.tolist())


def crowding_distance(front: Sequence[ObjectivePair]) -> list[float]:
    """Crowding distance per member, aligned with ``front``.

    Extremes of each objective are always +inf. An objective whose range is
    zero adds nothing to interior members.
    """
    if not front:
        return []
    f, e, idx = _objectives(front)
    return _crowding_from_arrays(f, e, idx).tolist()


def qe_total_order(pairs: Sequence[ObjectivePair]) -> list[int]:
    """Positions ordered best to worst: front, then crowding (desc), then index."""
    if len(pairs) < 2:
        raise TooFewSamples(f"qe_total_order needs at least 2 pairs, got {len(pairs)}")
    sf = fast_nondominated_sort(pairs)
    rank = sf.front_of()
    crowd = sf.crowding
    return sorted(
        range(len(pairs)),
        key=lambda p: (rank[p], -crowd[p], pairs[p].sample_index),
    )


def order_to_weights(order: Sequence[int]) -> np.ndarray:
    """Centered-rank weights for a best-to-worst permutation: best gets +0.5."""
    n = len(order)
    score = np.empty(n, dtype=np.float64)
    score[np.asarray(order, dtype=np.int64)] = np.arange(n - 1, -1, -1, dtype=np.float64)
    return centered_rank(score)
