"""Tests for the two-layer ReLU network"""

import numpy as np
import pytest
from qpk.core import ShapeError
from qpk.models.mlp import (
    MlpParams,
    MlpPredictor,
    hidden_size,
    mlp_backprop,
    mlp_forward,
    mlp_forward_batch,
    mlp_param_count,
)


def zero_params(d, h):
    return MlpParams(np.zeros((h, d)), np.zeros((h, h)), np.zeros((1, h)), np.zeros(h), np.zeros(h), 0.0)


def random_params(rng, d, h, biases=True):
    scale = 1.0 if biases else 0.0
    return MlpParams(
        rng.normal(size=(h, d)),
        rng.normal(size=(h, h)),
        rng.normal(size=(1, h)),
        scale * rng.normal(size=h),
        scale * rng.normal(size=h),
        scale * rng.normal(),
    )


@pytest.mark.parametrize(("d", "h"), [(1, 1), (4, 2), (10, 4), (24, 5)])
def test_hidden_size(d, h):
    assert hidden_size(d) == h


def test_forward_zero_params():
    assert mlp_forward(np.array([0.3, -1.2, 4.0]), zero_params(3, 2)) == 0.0


def test_forward_by_hand():
    p = MlpParams(np.eye(2), np.eye(2), [[1.0, 1.0]], np.zeros(2), np.zeros(2), 0.0)
    assert mlp_forward(np.array([1.0, -2.0]), p) == 1.0


def test_forward_positive_homogeneity():
    rng = np.random.default_rng(0)
    p = random_params(rng, 4, 2, biases=False)
    x = rng.normal(size=4)
    for scale in (0.5, 2.0, 7.3):
        assert mlp_forward(scale * x, p) == pytest.approx(scale * mlp_forward(x, p), rel=1e-12)


def test_forward_shape_errors():
    p = zero_params(3, 2)
    with pytest.raises(ShapeError):
        mlp_forward(np.zeros(4), p)
    with pytest.raises(ShapeError):
        mlp_forward(np.zeros((2, 3)), p)


def test_params_shape_validation():
    with pytest.raises(ShapeError):
        MlpParams(np.zeros((2, 3)), np.zeros((3, 3)), np.zeros((1, 2)), np.zeros(2), np.zeros(2), 0.0)


@pytest.mark.parametrize("d", range(2, 25))
def test_param_count_matches_enumeration(d):
    h = hidden_size(d)
    p = MlpParams.initialize(d, h, seed=d)
    enumerated = p.W1.size + p.W2.size + p.W3.size + p.b1.size + p.b2.size + 1
    assert mlp_param_count(d, h) == enumerated == len(p.flatten()) == p.n_params


def test_initialize():
    p = MlpParams.initialize(5, 3, seed=1)
    assert p.W1.shape == (3, 5)
    assert p.W2.shape == (3, 3)
    assert p.W3.shape == (1, 3)
    assert not np.any(p.b1) and not np.any(p.b2) and p.b3 == 0.0

    again = MlpParams.initialize(5, 3, seed=1)
    np.testing.assert_array_equal(p.flatten(), again.flatten())


def test_flat_vector_layout():
    rng = np.random.default_rng(2)
    p = random_params(rng, 3, 2)
    theta = p.flatten()
    restored = MlpParams.from_vector(theta, 3, 2)
    np.testing.assert_array_equal(restored.W2, p.W2)
    assert restored.b3 == p.b3

    mask = MlpParams.weight_mask(3, 2)
    assert mask.sum() == 3 * 2 + 2 * 2 + 2

    with pytest.raises(ShapeError):
        MlpParams.from_vector(theta[:-1], 3, 2)


def test_backprop_matches_finite_differences():
    rng = np.random.default_rng(123)
    d, h = 3, 2
    model = MlpPredictor(d, h)
    checked = 0
    while checked < 50:
        p = random_params(rng, d, h)
        x = rng.normal(size=d)

        z1 = p.W1 @ x + p.b1
        z2 = p.W2 @ np.maximum(z1, 0) + p.b2
        if np.min(np.abs(np.concatenate([z1, z2]))) < 1e-3:
            continue  # too close to a ReLU kink

        exact = mlp_backprop(x, p)[0]
        approx = model.gradient_fd(x, p.flatten(), h=1e-5)
        assert np.max(np.abs(exact - approx)) <= 1e-5 * max(np.max(np.abs(exact)), 1.0)
        checked += 1


def test_predictor_interface():
    rng = np.random.default_rng(4)
    model = MlpPredictor(4)
    assert model.h == 2
    assert model.n_params == mlp_param_count(4, 2)

    theta = model.initial_parameters(seed=9)
    X = rng.normal(size=(6, 4))
    np.testing.assert_array_equal(model.predict_batch(X, theta), mlp_forward_batch(X, model.unflatten(theta)))
    assert model.jacobian(X, theta).shape == (6, model.n_params)


def test_weight_penalty():
    model = MlpPredictor(2, 2, alpha=0.5)
    theta = np.arange(model.n_params, dtype=float)
    mask = MlpParams.weight_mask(2, 2)

    assert model.penalty(theta) == pytest.approx(0.25 * np.sum(theta[mask] ** 2))
    grad = model.penalty_gradient(theta)
    np.testing.assert_allclose(grad[mask], 0.5 * theta[mask])
    assert not np.any(grad[~mask])
