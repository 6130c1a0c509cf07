"""Two-layer ReLU network f(x) = W3 relu(W2 relu(W1 x + b1) + b2) + b3, trained by
backpropagation through the same full-batch loop as the quantum models.
"""

from __future__ import annotations

import math

import numpy as np
from monty.json import MSONable

from qpk.core import ShapeError
from qpk.models.base import Predictor
from qpk.training.sampling import standard_normal

DEFAULT_ALPHA = 1e-4


def hidden_size(d: int) -> int:
    """Hidden width ceil(sqrt(d))."""
    return math.ceil(math.sqrt(d))


def mlp_param_count(d: int, h: int) -> int:
    """d*h + h^2 + h weights plus 2h + 1 biases."""
    return d * h + h * h + h + 2 * h + 1


class MlpParams(MSONable):
    """Weights and biases of the two-layer ReLU network."""

    def __init__(
        self,
        W1: np.ndarray | list,
        W2: np.ndarray | list,
        W3: np.ndarray | list,
        b1: np.ndarray | list,
        b2: np.ndarray | list,
        b3: float,
    ):
        """
        Args:
            W1: Input weights, shape (h, d).
            W2: Hidden weights, shape (h, h).
            W3: Output weights, shape (1, h).
            b1: First hidden bias, shape (h,).
            b2: Second hidden bias, shape (h,).
            b3: Output bias.

        Raises:
            ShapeError: if the shapes are inconsistent.
        """
        self.W1 = np.atleast_2d(np.asarray(W1, dtype=np.float64))
        self.W2 = np.atleast_2d(np.asarray(W2, dtype=np.float64))
        self.W3 = np.atleast_2d(np.asarray(W3, dtype=np.float64))
        self.b1 = np.asarray(b1, dtype=np.float64).ravel()
        self.b2 = np.asarray(b2, dtype=np.float64).ravel()
        self.b3 = float(b3)

        h = self.W1.shape[0]
        if self.W2.shape != (h, h) or self.W3.shape != (1, h) or self.b1.shape != (h,) or self.b2.shape != (h,):
            raise ShapeError(
                f"Inconsistent MLP shapes: W1 {self.W1.shape}, W2 {self.W2.shape}, W3 {self.W3.shape}, "
                f"b1 {self.b1.shape}, b2 {self.b2.shape}"
            )

    @property
    def d(self) -> int:
        """Input dimensionality."""
        return self.W1.shape[1]

    @property
    def h(self) -> int:
        """Hidden width."""
        return self.W1.shape[0]

    @property
    def n_params(self) -> int:
        """Total number of weights and biases."""
        return mlp_param_count(self.d, self.h)

    @classmethod
    def initialize(cls, d: int, h: int, seed: int) -> MlpParams:
        """Weights drawn i.i.d. N(0, 1) (W1, W2, W3 in that order from one stream);
        biases zero.
        """
        z = standard_normal(seed, d * h + h * h + h)
        W1 = z[: d * h].reshape(h, d)
        W2 = z[d * h : d * h + h * h].reshape(h, h)
        W3 = z[d * h + h * h :].reshape(1, h)
        return cls(W1, W2, W3, np.zeros(h), np.zeros(h), 0.0)

    def flatten(self) -> np.ndarray:
        """Flat vector ordered W1, W2, W3, b1, b2, b3 (row-major)."""
        return np.concatenate([self.W1.ravel(), self.W2.ravel(), self.W3.ravel(), self.b1, self.b2, [self.b3]])

    @classmethod
    def from_vector(cls, theta: np.ndarray, d: int, h: int) -> MlpParams:
        """Inverse of flatten()."""
        theta = np.asarray(theta, dtype=np.float64)
        if len(theta) != mlp_param_count(d, h):
            raise ShapeError(f"Expected {mlp_param_count(d, h)} parameters for d={d}, h={h}, got {len(theta)}")

        sizes = [d * h, h * h, h, h, h]
        W1, W2, W3, b1, b2 = np.split(theta[:-1], np.cumsum(sizes)[:-1])
        return cls(W1.reshape(h, d), W2.reshape(h, h), W3.reshape(1, h), b1, b2, theta[-1])

    @staticmethod
    def weight_mask(d: int, h: int) -> np.ndarray:
        """Boolean mask over the flat vector selecting weights (not biases)."""
        mask = np.zeros(mlp_param_count(d, h), dtype=bool)
        mask[: d * h + h * h + h] = True
        return mask

    def as_dict(self) -> dict:
        """Returns MSONable dict for serialization. See monty package for more
        information.
        """
        return {
            "@module": self.__class__.__module__,
            "@class": self.__class__.__name__,
            "W1": self.W1.tolist(),
            "W2": self.W2.tolist(),
            "W3": self.W3.tolist(),
            "b1": self.b1.tolist(),
            "b2": self.b2.tolist(),
            "b3": self.b3,
        }


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def mlp_forward_batch(X: np.ndarray, p: MlpParams) -> np.ndarray:
    """Network outputs for every row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != p.d:
        raise ShapeError(f"Expected inputs of length {p.d}, got {X.shape[1]}")

    a1 = _relu(X @ p.W1.T + p.b1)
    a2 = _relu(a1 @ p.W2.T + p.b2)
    return a2 @ p.W3[0] + p.b3


def mlp_forward(x: np.ndarray, p: MlpParams) -> float:
    """Scalar network output for a single input. Its sign is the predicted class.

    Raises:
        ShapeError: if len(x) differs from the input width of W1.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"Expected a single input vector, got shape {x.shape}")
    return float(mlp_forward_batch(x, p)[0])


def mlp_backprop(X: np.ndarray, p: MlpParams) -> np.ndarray:
    """Gradients of the output with respect to the flat parameters, shape (n, n_params).

    The ReLU derivative at 0 is taken as 0.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != p.d:
        raise ShapeError(f"Expected inputs of length {p.d}, got {X.shape[1]}")
    n = len(X)

    z1 = X @ p.W1.T + p.b1
    a1 = _relu(z1)
    z2 = a1 @ p.W2.T + p.b2
    a2 = _relu(z2)

    delta2 = p.W3[0] * (z2 > 0)
    delta1 = (delta2 @ p.W2) * (z1 > 0)

    return np.concatenate(
        [
            (delta1[:, :, None] * X[:, None, :]).reshape(n, -1),
            (delta2[:, :, None] * a1[:, None, :]).reshape(n, -1),
            a2,
            delta1,
            delta2,
            np.ones((n, 1)),
        ],
        axis=1,
    )


class MlpPredictor(Predictor):
    """The two-layer ReLU network as a flat-parameter predictor with an L2 weight penalty
    (alpha / 2) * ||weights||^2, biases unpenalized.
    """

    def __init__(self, d: int, h: int | None = None, alpha: float = DEFAULT_ALPHA):
        """
        Args:
            d: Input dimensionality.
            h: Hidden width. Defaults to ceil(sqrt(d)).
            alpha: L2 penalty strength on the weights.
        """
        self.d = d
        self.h = hidden_size(d) if h is None else h
        self.alpha = alpha
        self._mask = MlpParams.weight_mask(self.d, self.h)

    @property
    def n_features(self) -> int:
        """Input dimensionality."""
        return self.d

    @property
    def n_params(self) -> int:
        """d*h + h^2 + h + 2h + 1."""
        return mlp_param_count(self.d, self.h)

    def unflatten(self, theta: np.ndarray) -> MlpParams:
        """MlpParams view of a flat parameter vector."""
        return MlpParams.from_vector(theta, self.d, self.h)

    def predict_batch(self, X: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Network outputs for every row of X."""
        return mlp_forward_batch(X, self.unflatten(theta))

    def jacobian(self, X: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Backpropagated output gradients for every row of X."""
        return mlp_backprop(X, self.unflatten(theta))

    def initial_parameters(self, seed: int) -> np.ndarray:
        """N(0, 1) weights and zero biases, flattened."""
        return MlpParams.initialize(self.d, self.h, seed).flatten()

    def penalty(self, theta: np.ndarray) -> float:
        """(alpha / 2) * sum of squared weights."""
        w = np.asarray(theta)[self._mask]
        return 0.5 * self.alpha * float(np.dot(w, w))

    def penalty_gradient(self, theta: np.ndarray) -> np.ndarray:
        """alpha * weights, zero on biases."""
        return np.where(self._mask, self.alpha * np.asarray(theta, dtype=np.float64), 0.0)

    def __repr__(self) -> str:
        return f"MlpPredictor(d={self.d}, h={self.h}, alpha={self.alpha})"
