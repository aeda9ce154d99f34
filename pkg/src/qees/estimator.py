"""Per-sample objectives, shaping modes and the ES gradient estimate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import BehaviorDescriptor, ObjectiveMode, SampleEvaluation, SearchDistribution
from .errors import DimensionMismatch, LengthMismatch, NonFiniteGradient, TooFewSamples
from .ranking import ObjectivePair, centered_rank, order_to_weights, qe_total_order
from .sampling import NoiseTable, PerturbationRef


@dataclass(frozen=True, eq=False)
class GradientEstimate:
    vector: np.ndarray
    n: int
    sigma: float

    def __post_init__(self):
        vec = np.array(self.vector, dtype=np.float64, copy=True)
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)
        if not np.all(np.isfinite(vec)):
            raise NonFiniteGradient("gradient estimate contains NaN/Inf")


def _behavior_matrix(behaviors) -> np.ndarray:
    if isinstance(behaviors, np.ndarray):
        bcs = np.asarray(behaviors, dtype=np.float64)
        if bcs.ndim != 2:
            raise DimensionMismatch("behavior matrix must be 2-D (n, bc_dim)")
        return bcs
    dims = {b.dim for b in behaviors}
    if len(dims) > 1:
        raise DimensionMismatch(f"behavior descriptors have mixed dimensions {sorted(dims)}")
    return np.array([b.coords for b in behaviors], dtype=np.float64)


def evolvability_scores(behaviors) -> tuple[np.ndarray, BehaviorDescriptor]:
    """Squared distance of each offspring's behavior from the offspring mean.

    Accepts a list of BehaviorDescriptor or an (n, d) array. The mean of the
    returned scores is the total (population) variance of the behaviors.
    """
    bcs = _behavior_matrix(behaviors)
    if bcs.shape[0] < 2:
        raise TooFewSamples(f"evolvability needs at least 2 behaviors, got {bcs.shape[0]}")
    bc_mean = bcs.mean(axis=0)
    dev = bcs - bc_mean
    scores = np.einsum("ij,ij->i", dev, dev)
    return scores, BehaviorDescriptor(bc_mean)


def _sorted_evals(evals: Sequence[SampleEvaluation]) -> list[SampleEvaluation]:
    ordered = sorted(evals, key=lambda e: e.sample_index)
    if [e.sample_index for e in ordered] != list(range(len(ordered))):
        raise LengthMismatch("sample indices must be exactly 0..n-1")
    return ordered


def weights_from_objectives(
    mode: ObjectiveMode, fitness: np.ndarray, evolvability: np.ndarray | None
) -> np.ndarray:
    """Shaped weights from per-sample objective arrays indexed by sample index."""
    if mode is ObjectiveMode.FITNESS_ONLY:
        return centered_rank(fitness)
    if evolvability is None:
        raise ValueError(f"mode {mode.value} needs evolvability scores")
    if mode is ObjectiveMode.EVOLVABILITY_ONLY:
        return centered_rank(evolvability)
    pairs = [ObjectivePair(float(f), float(e), i) for i, (f, e) in enumerate(zip(fitness, evolvability))]
    return order_to_weights(qe_total_order(pairs))


def shaped_weights(mode: ObjectiveMode, evals: Sequence[SampleEvaluation]) -> np.ndarray:
    """Weights r_i for samples 0..n-1 under the given objective mode."""
    ordered = _sorted_evals(evals)
    if len(ordered) < 2:
        raise TooFewSamples(f"need at least 2 evaluations, got {len(ordered)}")
    fitness = np.array([e.fitness for e in ordered], dtype=np.float64)
    evo = None
    if mode.uses_evolvability:
        evo, _ = evolvability_scores([e.behavior for e in ordered])
    return weights_from_objectives(mode, fitness, evo)


def estimate_gradient(
    weights: Sequence[float],
    refs: Sequence[PerturbationRef],
    table: NoiseTable,
    dist: SearchDistribution,
) -> GradientEstimate:
    w = np.asarray(weights, dtype=np.float64)
    n = w.size
    if n != len(refs):
        raise LengthMismatch(f"{n} weights but {len(refs)} perturbation refs")
    if n < 2:
        raise TooFewSamples(f"gradient needs at least 2 samples, got {n}")
    dim = dist.dim
    acc = np.zeros(dim, dtype=np.float64)
    # fixed ascending-index accumulation keeps the sum bit-reproducible
    for wi, ref in zip(w, refs):
        if wi != 0.0:
            acc += (wi * ref.sign) * table.slice(ref.offset, dim)
    return GradientEstimate(acc / (n * dist.sigma), n=n, sigma=dist.sigma)
