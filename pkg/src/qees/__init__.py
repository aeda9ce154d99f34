"""Evolution strategies with fitness, evolvability and quality-evolvability objectives."""

from .core import (
    BehaviorDescriptor,
    GenerationRecord,
    ObjectiveMode,
    ParameterVector,
    SampleEvaluation,
    SearchDistribution,
    validate_parameter_vector,
)
from .config import RunConfig, load_config, parse_config
from .environment import EnvironmentSpec, TrapGeometry, Variant, run_episode
from .policy import PolicySpec
from .runner import run_experiment, run_generation

__all__ = [
    "BehaviorDescriptor",
    "EnvironmentSpec",
    "GenerationRecord",
    "ObjectiveMode",
    "ParameterVector",
    "PolicySpec",
    "RunConfig",
    "SampleEvaluation",
    "SearchDistribution",
    "TrapGeometry",
    "Variant",
    "load_config",
    "parse_config",
    "run_episode",
    "run_experiment",
    "run_generation",
    "validate_parameter_vector",
]

__version__ = "0.1.0"
