"""Value types shared across the package.

All reals are float64. Array-backed types hold read-only copies so instances
can be shared freely between concurrent evaluators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ParameterVector:
    """Flat vector of policy parameters.

    ``dim`` defaults to ``len(values)``; passing it explicitly lets callers
    build a deliberately inconsistent vector for validation.
    """

    values: np.ndarray
    dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        if self.dim is None:
            object.__setattr__(self, "dim", int(self.values.size))

    def __len__(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParameterVector):
            return NotImplemented
        return self.dim == other.dim and self.values.tobytes() == other.values.tobytes()

    def __hash__(self) -> int:
        return hash((self.dim, self.values.tobytes()))

    def to_bytes(self) -> bytes:
        return np.ascontiguousarray(self.values, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ParameterVector":
        return cls(np.frombuffer(data, dtype="<f8"))


def validate_parameter_vector(v: ParameterVector) -> None:
    """Raise if ``v`` breaks a ParameterVector invariant, else return None."""
    if v.dim is None or v.dim <= 0:
        raise DimensionMismatch(f"dim must be positive, got {v.dim}")
    if v.dim != v.values.size:
        raise DimensionMismatch(f"dim {v.dim} != number of values {v.values.size}")
    bad = np.flatnonzero(~np.isfinite(v.values))
    if bad.size:
        raise NonFiniteValue(int(bad[0]))


def as_array(v) -> np.ndarray:
    if isinstance(v, ParameterVector):
        return v.values
    return np.asarray(v, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class SearchDistribution:
    center: ParameterVector
    sigma: float

    def __post_init__(self):
        if not isinstance(self.center, ParameterVector):
            object.__setattr__(self, "center", ParameterVector(self.center))
        # sigma == 0 is tolerated here so realize_offspring stays defined;
        # the run config rejects it.
        if not self.sigma >= 0 or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be finite and non-negative, got {self.sigma}")

    @property
    def dim(self) -> int:
        return self.center.dim


@dataclass(frozen=True, eq=False)
class BehaviorDescriptor:
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _frozen_array(self.coords))
        bad = np.flatnonzero(~np.isfinite(self.coords))
        if bad.size:
            raise NonFiniteValue(int(bad[0]))

    @property
    def dim(self) -> int:
        return int(self.coords.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BehaviorDescriptor):
            return NotImplemented
        return self.coords.tobytes() == other.coords.tobytes()

    def __hash__(self) -> int:
        return hash(self.coords.tobytes())


@dataclass(frozen=True)
class SampleEvaluation:
    sample_index: int
    fitness: float
    behavior: BehaviorDescriptor
    episode_steps: int = 0

    def __post_init__(self):
        if not math.isfinite(self.fitness):
            raise NonFiniteValue(self.sample_index)
        if self.episode_steps < 0:
            raise ValueError("episode_steps must be non-negative")


def check_unique_indices(evals: Sequence[SampleEvaluation]) -> None:
    seen = set()
    for e in evals:
        if e.sample_index in seen:
            raise ValueError(f"duplicate sample_index {e.sample_index}")
        seen.add(e.sample_index)


class ObjectiveMode(str, Enum):
    FITNESS_ONLY = "es"
    EVOLVABILITY_ONLY = "e-es"
    QUALITY_EVOLVABILITY = "qe-es"

    @classmethod
    def parse(cls, text: str) -> "ObjectiveMode":
        key = text.strip().lower().replace("_", "-")
        aliases = {
            "es": cls.FITNESS_ONLY,
            "fitness": cls.FITNESS_ONLY,
            "fitness-only": cls.FITNESS_ONLY,
            "fitnessonly": cls.FITNESS_ONLY,
            "e-es": cls.EVOLVABILITY_ONLY,
            "ees": cls.EVOLVABILITY_ONLY,
            "evolvability": cls.EVOLVABILITY_ONLY,
            "evolvability-only": cls.EVOLVABILITY_ONLY,
            "evolvabilityonly": cls.EVOLVABILITY_ONLY,
            "qe-es": cls.QUALITY_EVOLVABILITY,
            "qees": cls.QUALITY_EVOLVABILITY,
            "quality-evolvability": cls.QUALITY_EVOLVABILITY,
            "qualityevolvability": cls.QUALITY_EVOLVABILITY,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown objective mode {text!r}") from None

    @property
    def uses_fitness(self) -> bool:
        return self is not ObjectiveMode.EVOLVABILITY_ONLY

    @property
    def uses_evolvability(self) -> bool:
        return self is not ObjectiveMode.FITNESS_ONLY


RECORD_COLUMNS = (
    "generation",
    "mean_fitness",
    "max_fitness",
    "center_fitness",
    "mean_evolvability",
    "bc_mean_x",
    "bc_mean_y",
    "wall_clock_seconds",
)


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    mean_fitness: float
    max_fitness: float
    center_fitness: float
    mean_evolvability: float
    bc_mean: BehaviorDescriptor
    wall_clock_seconds: float = 0.0

    def __post_init__(self):
        if self.generation < 0:
            raise ValueError("generation must be non-negative")
        # tolerance covers summation rounding when every fitness is equal
        if self.max_fitness < self.mean_fitness - 1e-9 * max(1.0, abs(self.mean_fitness)):
            raise ValueError("max_fitness < mean_fitness")
        if self.mean_evolvability < 0:
            raise ValueError("mean_evolvability must be non-negative")
        if self.wall_clock_seconds < 0:
            raise ValueError("wall_clock_seconds must be non-negative")

    def row(self) -> list:
        bc = self.bc_mean.coords
        bx = float(bc[0]) if bc.size > 0 else 0.0
        by = float(bc[1]) if bc.size > 1 else 0.0
        return [
            self.generation,
            self.mean_fitness,
            self.max_fitness,
            self.center_fitness,
            self.mean_evolvability,
            bx,
            by,
            self.wall_clock_seconds,
        ]
