"""Basic interface for a gradient-capable predictor."""

from __future__ import annotations

from abc import ABCMeta, abstractmethod

import numpy as np
from monty.json import MSONable

from qpk.core import ParameterError
from qpk.training.sampling import init_params


class Predictor(MSONable, metaclass=ABCMeta):
    """Base definition for a scalar-output model f(x; theta) with a flat parameter vector.

    Subclasses implement batched evaluation and the Jacobian with respect to theta; the
    single-point helpers, finite differences and initialization are shared.
    """

    @property
    @abstractmethod
    def n_features(self) -> int:
        """Dimensionality of the input vectors."""

    @property
    @abstractmethod
    def n_params(self) -> int:
        """Length of the flat parameter vector."""

    @abstractmethod
    def predict_batch(self, X: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Model outputs for every row of X."""

    @abstractmethod
    def jacobian(self, X: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Gradients with respect to theta for every row of X, shape (n, n_params)."""

    def predict(self, x: np.ndarray, theta: np.ndarray) -> float:
        """Model output for a single input vector."""
        return float(self.predict_batch(np.atleast_2d(x), theta)[0])

    def gradient(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Gradient with respect to theta for a single input vector."""
        return self.jacobian(np.atleast_2d(x), theta)[0]

    def gradient_fd(self, x: np.ndarray, theta: np.ndarray, h: float = 1e-5) -> np.ndarray:
        """Central finite-difference gradient (f(theta + h e_k) - f(theta - h e_k)) / 2h.

        Raises:
            ParameterError: if h is not in (0, 1e-3].
        """
        if not 0 < h <= 1e-3:
            raise ParameterError(f"Finite-difference step must lie in (0, 1e-3], got {h}")

        theta = np.asarray(theta, dtype=np.float64)
        grad = np.empty(len(theta))
        for k in range(len(theta)):
            plus, minus = theta.copy(), theta.copy()
            plus[k] += h
            minus[k] -= h
            grad[k] = (self.predict(x, plus) - self.predict(x, minus)) / (2 * h)
        return grad

    def initial_parameters(self, seed: int) -> np.ndarray:
        """Parameters at epoch 0. Defaults to i.i.d. standard normal entries."""
        return init_params(self.n_params, seed)

    def penalty(self, theta: np.ndarray) -> float:  # noqa: ARG002
        """Regularization term added to the training loss. Zero unless overridden."""
        return 0.0

    def penalty_gradient(self, theta: np.ndarray) -> np.ndarray:
        """Gradient of penalty() with respect to theta."""
        return np.zeros_like(theta, dtype=np.float64)
