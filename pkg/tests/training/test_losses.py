"""Tests for training losses"""

import numpy as np
import pytest
from qpk.core import ShapeError
from qpk.training.losses import LossKind, loss, loss_gradient


def test_mse_examples():
    assert loss([1.0, -1.0], [1.0, -1.0], LossKind.MSE) == 0.0
    assert loss([1.0, -1.0], [-1.0, 1.0], LossKind.MSE) == 4.0


def test_bce_example():
    assert loss([0.0], [1.0], "BCE") == pytest.approx(np.log(2), abs=1e-12)


def test_bce_is_clipped():
    value = loss([-1.0], [1.0], LossKind.BCE)
    assert np.isfinite(value)
    assert value == pytest.approx(-np.log(1e-7), rel=1e-6)


def test_length_mismatch():
    with pytest.raises(ShapeError):
        loss([0.1, 0.2], [1.0], LossKind.MSE)
    with pytest.raises(ShapeError):
        loss_gradient([], [], LossKind.MSE)


@pytest.mark.parametrize("kind", list(LossKind))
def test_gradient_matches_finite_differences(kind):
    rng = np.random.default_rng(0)
    preds = rng.uniform(-0.9, 0.9, size=7)
    labels = np.where(rng.uniform(size=7) < 0.5, -1.0, 1.0)

    grad = loss_gradient(preds, labels, kind)
    h = 1e-6
    for i in range(len(preds)):
        plus, minus = preds.copy(), preds.copy()
        plus[i] += h
        minus[i] -= h
        fd = (loss(plus, labels, kind) - loss(minus, labels, kind)) / (2 * h)
        assert grad[i] == pytest.approx(fd, abs=1e-7)
