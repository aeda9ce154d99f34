import numpy as np
import pytest

from qees.config import AdamConfig
from qees.errors import DimensionMismatch, NonFiniteGradient
from qees.optimizer import AdamState, adam_step


def test_first_step_moves_each_coordinate_by_alpha():
    state = AdamState.zeros(4, alpha=0.01, l2_coeff=0.0)
    g = np.array([3.0, -0.001, 250.0, -7.0])
    theta, new = adam_step(state, np.zeros(4), g)
    np.testing.assert_allclose(np.abs(theta.values), 0.01, rtol=1e-5)
    assert np.all(np.sign(theta.values) == np.sign(g))
    assert new.step_count == 1


def test_zero_coordinate_gradient_does_not_move():
    theta, _ = adam_step(AdamState.zeros(2, l2_coeff=0.0), np.zeros(2), np.array([0.0, 1.0]))
    assert theta.values[0] == 0.0


def test_origin_is_fixed_point_under_l2():
    theta, _ = adam_step(AdamState.zeros(3, l2_coeff=0.005), np.zeros(3), np.zeros(3))
    assert np.all(theta.values == 0.0)


def test_defaults_match_published_hyperparameters():
    cfg = AdamConfig()
    assert cfg.alpha == 0.01 and cfg.l2_coeff == 0.005
    s = AdamState.zeros(1)
    assert (s.alpha, s.beta1, s.beta2, s.eps, s.l2_coeff) == (0.01, 0.9, 0.999, 1e-8, 0.005)


def test_l2_penalty_shrinks_norm():
    rng = np.random.default_rng(0)
    theta = rng.uniform(0.5, 1.0, size=6) * rng.choice([-1, 1], size=6)
    state = AdamState.zeros(6, alpha=0.01, l2_coeff=0.005)
    norm = np.linalg.norm(theta)
    for _ in range(30):
        new_theta, state = adam_step(state, theta, np.zeros(6))
        theta = new_theta.values
        assert np.linalg.norm(theta) < norm
        norm = np.linalg.norm(theta)


def test_matches_reference_adam_formula():
    rng = np.random.default_rng(1)
    state = AdamState.zeros(5, alpha=0.03, beta1=0.8, beta2=0.99, eps=1e-6, l2_coeff=0.1)
    theta = rng.normal(size=5)
    m = np.zeros(5)
    v = np.zeros(5)
    th_ref = theta.copy()
    for t in range(1, 6):
        g = rng.normal(size=5)
        out, state = adam_step(state, theta, g)
        theta = out.values
        gg = g - 0.1 * th_ref
        m = 0.8 * m + 0.2 * gg
        v = 0.99 * v + 0.01 * gg**2
        th_ref = th_ref + 0.03 * (m / (1 - 0.8**t)) / (np.sqrt(v / (1 - 0.99**t)) + 1e-6)
        np.testing.assert_allclose(theta, th_ref, rtol=1e-13, atol=1e-15)
    assert state.step_count == 5


def test_deterministic_and_replayable():
    rng = np.random.default_rng(2)
    grads = rng.normal(size=(10, 4))

    def trajectory(start_state, theta, gs):
        out = []
        for g in gs:
            p, start_state = adam_step(start_state, theta, g)
            theta = p.values
            out.append(theta.tobytes())
        return out, start_state, theta

    full, _, _ = trajectory(AdamState.zeros(4), np.ones(4), grads)
    again, _, _ = trajectory(AdamState.zeros(4), np.ones(4), grads)
    assert full == again
    head, mid_state, mid_theta = trajectory(AdamState.zeros(4), np.ones(4), grads[:5])
    tail, _, _ = trajectory(mid_state, mid_theta, grads[5:])
    assert head + tail == full


def test_errors():
    s = AdamState.zeros(3)
    with pytest.raises(DimensionMismatch):
        adam_step(s, np.zeros(3), np.zeros(2))
    with pytest.raises(NonFiniteGradient):
        adam_step(s, np.zeros(3), np.array([0.0, np.nan, 0.0]))
