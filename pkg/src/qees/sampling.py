"""Shared noise table and mirrored perturbations.

A perturbation is never stored; it is the slice ``table[offset:offset+dim]``
times a sign. Mirrored pairs (2k, 2k+1) share the offset with signs +1/-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ParameterVector, SearchDistribution
from .errors import InvalidLength, OddPopulation, OffsetOutOfRange, TableTooShort

DEFAULT_TABLE_LENGTH = 10_000_000


@dataclass(frozen=True, eq=False)
class NoiseTable:
    seed: int
    length: int
    values: np.ndarray = field(repr=False)

    def slice(self, offset: int, dim: int) -> np.ndarray:
        if offset < 0 or offset + dim > self.length:
            raise OffsetOutOfRange(f"offset {offset} + dim {dim} exceeds table length {self.length}")
        return self.values[offset : offset + dim]


@dataclass(frozen=True)
class PerturbationRef:
    offset: int
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if self.offset < 0:
            raise OffsetOutOfRange(f"negative offset {self.offset}")


def build_noise_table(seed: int, length: int = DEFAULT_TABLE_LENGTH) -> NoiseTable:
    if length <= 0:
        raise InvalidLength(f"noise table length must be positive, got {length}")
    rng = np.random.Generator(np.random.PCG64(seed))
    values = rng.standard_normal(length, dtype=np.float64)
    values.setflags(write=False)
    return NoiseTable(seed=int(seed), length=int(length), values=values)


def sample_generation(table: NoiseTable, n: int, dim: int, gen_seed: int) -> list[PerturbationRef]:
    """Draw n/2 distinct offsets and emit each as a (+, -) pair.

    Offsets are distinct but their slices may overlap.
    """
    if n <= 0 or n % 2:
        raise OddPopulation(f"population size must be even and positive, got {n}")
    n_offsets = table.length - dim + 1
    if dim <= 0 or n_offsets < n // 2:
        raise TableTooShort(f"table of length {table.length} cannot supply {n // 2} offsets of dim {dim}")
    rng = np.random.Generator(np.random.PCG64(gen_seed))
    offsets = rng.choice(n_offsets, size=n // 2, replace=False)
    refs = []
    for off in offsets:
        refs.append(PerturbationRef(int(off), 1))
        refs.append(PerturbationRef(int(off), -1))
    return refs


def perturbation(ref: PerturbationRef, table: NoiseTable, dim: int) -> np.ndarray:
    """The realized epsilon for ``ref`` (a fresh array)."""
    return ref.sign * table.slice(ref.offset, dim)


def perturbation_matrix(refs: list[PerturbationRef], table: NoiseTable, dim: int) -> np.ndarray:
    eps = np.empty((len(refs), dim), dtype=np.float64)
    for i, ref in enumerate(refs):
        eps[i] = perturbation(ref, table, dim)
    return eps


def realize_offspring(dist: SearchDistribution, ref: PerturbationRef, table: NoiseTable) -> ParameterVector:
    center = dist.center.values
    return ParameterVector(center + dist.sigma * perturbation(ref, table, center.size))


def realize_population(dist: SearchDistribution, refs: list[PerturbationRef], table: NoiseTable) -> np.ndarray:
    """Row i holds ``center + sigma * eps_i``; same arithmetic as realize_offspring."""
    center = dist.center.values
    return center[None, :] + dist.sigma * perturbation_matrix(refs, table, center.size)
