import numpy as np
import pytest

from qees.core import BehaviorDescriptor, ObjectiveMode, ParameterVector, SampleEvaluation, SearchDistribution
from qees.errors import DimensionMismatch, LengthMismatch, TooFewSamples
from qees.estimator import estimate_gradient, evolvability_scores, shaped_weights
from qees.ranking import centered_rank
from qees.sampling import PerturbationRef, build_noise_table, perturbation_matrix, sample_generation
from qees.ranking import ObjectivePair
from qees.verification import brute_force_fronts, smoothed_gradient_mc


def bds(points):
    return [BehaviorDescriptor(p) for p in points]


def evals_from(fitness, behaviors):
    return [SampleEvaluation(i, float(f), BehaviorDescriptor(b)) for i, (f, b) in enumerate(zip(fitness, behaviors))]


@pytest.fixture(scope="module")
def table():
    return build_noise_table(11, 400_000)


# ------------------------------------------------------------ evolvability


def test_symmetric_pair():
    scores, mean = evolvability_scores(bds([(1, 0), (-1, 0)]))
    np.testing.assert_array_equal(scores, [1, 1])
    np.testing.assert_array_equal(mean.coords, [0, 0])


def test_identical_behaviors_have_zero_evolvability():
    scores, _ = evolvability_scores(bds([(3, 4)] * 5))
    np.testing.assert_array_equal(scores, np.zeros(5))


def test_square_corners():
    scores, mean = evolvability_scores(bds([(0, 0), (2, 0), (0, 2), (2, 2)]))
    np.testing.assert_array_equal(mean.coords, [1, 1])
    np.testing.assert_array_equal(scores, [2, 2, 2, 2])


def test_mean_score_is_total_variance():
    b = np.random.default_rng(0).normal(size=(300, 2)) * [3.0, 0.5]
    scores, _ = evolvability_scores(b)
    assert abs(scores.mean() - np.var(b, axis=0).sum()) < 1e-10


def test_evolvability_errors():
    with pytest.raises(TooFewSamples):
        evolvability_scores(bds([(0, 0)]))
    with pytest.raises(DimensionMismatch):
        evolvability_scores([BehaviorDescriptor([0, 0]), BehaviorDescriptor([0, 0, 0])])


# ------------------------------------------------------------ shaping


def test_fitness_only_delegates_to_centered_rank():
    w = shaped_weights(ObjectiveMode.FITNESS_ONLY, evals_from([3, 1, 2], [(0, 0)] * 3))
    np.testing.assert_array_equal(w, [0.5, -0.5, 0.0])


def test_evolvability_ties_fall_back_to_index():
    w = shaped_weights(ObjectiveMode.EVOLVABILITY_ONLY, evals_from([5, 1, 3, 0], [(1, 1)] * 4))
    np.testing.assert_array_equal(w, centered_rank([0, 1, 2, 3]))


def test_qe_with_aligned_objectives_equals_fitness_only():
    # behaviors chosen so EVO rises with F; the oracle then gives singleton
    # fronts ordered by fitness, i.e. the plain fitness ranking
    fitness = [1.0, 2.0, 3.0]
    behaviors = [(4.0, 0.0), (5.0, 0.0), (-9.0, 0.0)]
    scores, _ = evolvability_scores(np.array(behaviors))
    assert np.all(np.diff(scores) > 0)
    pairs = [ObjectivePair(f, e, i) for i, (f, e) in enumerate(zip(fitness, scores))]
    assert brute_force_fronts(pairs).fronts == [[2], [1], [0]]
    ev = evals_from(fitness, behaviors)
    np.testing.assert_array_equal(
        shaped_weights(ObjectiveMode.QUALITY_EVOLVABILITY, ev),
        shaped_weights(ObjectiveMode.FITNESS_ONLY, ev),
    )


@pytest.mark.parametrize("mode", list(ObjectiveMode))
def test_weights_sum_to_zero(mode):
    rng = np.random.default_rng(1)
    ev = evals_from(rng.normal(size=51), rng.normal(size=(51, 2)))
    assert abs(shaped_weights(mode, ev).sum()) < 1e-12


def test_shaping_needs_complete_indices():
    b = BehaviorDescriptor([0, 0])
    with pytest.raises(LengthMismatch):
        shaped_weights(ObjectiveMode.FITNESS_ONLY, [SampleEvaluation(0, 1.0, b), SampleEvaluation(2, 1.0, b)])


def test_shaping_is_scale_invariant():
    rng = np.random.default_rng(2)
    f = rng.normal(size=40)
    b = rng.normal(size=(40, 2))
    for mode in ObjectiveMode:
        a = shaped_weights(mode, evals_from(f, b))
        c = shaped_weights(mode, evals_from(f * 7.5, b))
        assert a.tobytes() == c.tobytes()


# ------------------------------------------------------------ gradient


def test_two_sample_gradient_arithmetic():
    t = build_noise_table(0, 3)
    object.__setattr__(t, "values", np.array([1.0, 0.0, 0.0]))
    dist = SearchDistribution(ParameterVector(np.zeros(3)), 0.02)
    refs = [PerturbationRef(0, 1), PerturbationRef(0, -1)]
    g = estimate_gradient([0.5, -0.5], refs, t, dist)
    np.testing.assert_allclose(g.vector, [25.0, 0.0, 0.0], rtol=1e-15)


def test_zero_weights_zero_gradient(table):
    dist = SearchDistribution(ParameterVector(np.zeros(8)), 0.02)
    refs = sample_generation(table, 6, 8, 0)
    assert np.all(estimate_gradient(np.zeros(6), refs, table, dist).vector == 0)


def test_length_mismatch(table):
    dist = SearchDistribution(ParameterVector(np.zeros(8)), 0.02)
    with pytest.raises(LengthMismatch):
        estimate_gradient([0.5, -0.5, 0.0], sample_generation(table, 2, 8, 0), table, dist)


def test_gradient_matches_formula(table):
    dim, n, sigma = 12, 30, 0.05
    dist = SearchDistribution(ParameterVector(np.zeros(dim)), sigma)
    refs = sample_generation(table, n, dim, 3)
    w = centered_rank(np.random.default_rng(4).normal(size=n))
    eps = perturbation_matrix(refs, table, dim)
    expected = (w[:, None] * eps).sum(axis=0) / (n * sigma)
    np.testing.assert_allclose(estimate_gradient(w, refs, table, dist).vector, expected, rtol=1e-12, atol=1e-12)


def test_mirror_relabel_antisymmetry(table):
    dim, n = 9, 10
    dist = SearchDistribution(ParameterVector(np.zeros(dim)), 0.02)
    refs = sample_generation(table, n, dim, 8)
    w = centered_rank(np.random.default_rng(5).normal(size=n))
    swapped = [PerturbationRef(r.offset, -r.sign) for r in refs]
    a = estimate_gradient(w, refs, table, dist).vector
    b = estimate_gradient(-w, swapped, table, dist).vector
    assert a.tobytes() == b.tobytes()


def test_linear_fitness_gradient_is_aligned(table):
    dim, n, sigma = 10, 1000, 0.02
    a = np.random.default_rng(6).normal(size=dim)
    center = np.zeros(dim)
    dist = SearchDistribution(ParameterVector(center), sigma)
    refs = sample_generation(table, n, dim, 17)
    eps = perturbation_matrix(refs, table, dim)
    f = (center + sigma * eps) @ a
    g = estimate_gradient(centered_rank(f), refs, table, dist).vector
    assert g @ a / (np.linalg.norm(g) * np.linalg.norm(a)) > 0.9


def test_quadratic_gradient_points_toward_optimum(table):
    dim, n, sigma = 10, 200, 0.02
    rng = np.random.default_rng(7)
    hits = 0
    for trial in range(200):
        theta = rng.normal(size=dim)
        target = rng.normal(size=dim)
        dist = SearchDistribution(ParameterVector(theta), sigma)
        refs = sample_generation(table, n, dim, 1000 + trial)
        pop = theta + sigma * perturbation_matrix(refs, table, dim)
        f = -np.sum((pop - target) ** 2, axis=1)
        g = estimate_gradient(centered_rank(f), refs, table, dist).vector
        hits += g @ (target - theta) > 0
    assert hits >= 190


def test_rank_gradient_agrees_in_direction_with_raw_mc():
    # the shaped estimator and the raw-fitness oracle target the same direction
    a = np.array([1.0, -0.5, 0.8, -1.2, 0.6])
    mc = smoothed_gradient_mc(lambda th: float(th @ a), np.zeros(5), 0.02, 20_000, seed=1)
    assert mc @ a / (np.linalg.norm(mc) * np.linalg.norm(a)) > 0.99
