import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from qees.core import (
    BehaviorDescriptor,
    GenerationRecord,
    ObjectiveMode,
    ParameterVector,
    SampleEvaluation,
    check_unique_indices,
    validate_parameter_vector,
)
from qees.errors import DimensionMismatch, NonFiniteValue
from qees.estimator import evolvability_scores


def test_zero_vector_is_valid():
    validate_parameter_vector(ParameterVector([0.0, 0.0]))


def test_nan_reports_its_index():
    with pytest.raises(NonFiniteValue) as err:
        validate_parameter_vector(ParameterVector([1.0, np.nan]))
    assert err.value.index == 1


def test_empty_vector_is_a_dimension_error():
    with pytest.raises(DimensionMismatch):
        validate_parameter_vector(ParameterVector([], dim=0))


def test_declared_dim_must_match_length():
    with pytest.raises(DimensionMismatch):
        validate_parameter_vector(ParameterVector([1.0, 2.0], dim=3))


def test_parameter_vector_is_read_only():
    v = ParameterVector(np.arange(3.0))
    with pytest.raises(ValueError):
        v.values[0] = 5.0


@given(arrays(np.float64, st.integers(1, 64), elements=st.floats(allow_nan=True, allow_infinity=True)))
def test_serialization_round_trip_is_bit_exact(values):
    v = ParameterVector(values)
    back = ParameterVector.from_bytes(v.to_bytes())
    assert back.values.tobytes() == v.values.tobytes()


def test_sample_evaluation_rejects_nonfinite_fitness():
    with pytest.raises(NonFiniteValue):
        SampleEvaluation(3, float("inf"), BehaviorDescriptor([0.0, 0.0]))


def test_duplicate_sample_index_detected():
    b = BehaviorDescriptor([0.0, 0.0])
    with pytest.raises(ValueError):
        check_unique_indices([SampleEvaluation(0, 1.0, b), SampleEvaluation(0, 2.0, b)])


@pytest.mark.parametrize("text,mode", [
    ("es", ObjectiveMode.FITNESS_ONLY),
    ("E-ES", ObjectiveMode.EVOLVABILITY_ONLY),
    ("qe_es", ObjectiveMode.QUALITY_EVOLVABILITY),
    ("QualityEvolvability", ObjectiveMode.QUALITY_EVOLVABILITY),
])
def test_mode_parsing(text, mode):
    assert ObjectiveMode.parse(text) is mode


def test_generation_record_rejects_max_below_mean():
    with pytest.raises(ValueError):
        GenerationRecord(0, 2.0, 1.0, 0.0, 0.0, BehaviorDescriptor([0, 0]))


def test_record_aggregates_match_recomputation():
    rng = np.random.default_rng(3)
    evals = [SampleEvaluation(i, float(rng.normal()), BehaviorDescriptor(rng.normal(size=2))) for i in range(50)]
    f = np.array([e.fitness for e in evals])
    bcs = np.array([e.behavior.coords for e in evals])
    evo, bc_mean = evolvability_scores(bcs)
    rec = GenerationRecord(4, float(f.mean()), float(f.max()), 0.0, float(evo.mean()), bc_mean)
    # independent recomputation with plain Python sums
    n = len(evals)
    mean_f = sum(e.fitness for e in evals) / n
    mx = sum(e.behavior.coords[0] for e in evals) / n
    my = sum(e.behavior.coords[1] for e in evals) / n
    var = sum((e.behavior.coords[0] - mx) ** 2 + (e.behavior.coords[1] - my) ** 2 for e in evals) / n
    assert abs(rec.mean_fitness - mean_f) < 1e-12
    assert rec.max_fitness == max(e.fitness for e in evals)
    assert abs(rec.mean_evolvability - var) < 1e-12
    assert abs(rec.bc_mean.coords[0] - mx) < 1e-12 and abs(rec.bc_mean.coords[1] - my) < 1e-12
