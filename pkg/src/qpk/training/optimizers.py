"""First-order optimizers acting on flat parameter vectors."""

from __future__ import annotations

from abc import ABCMeta, abstractmethod
from dataclasses import dataclass
from enum import Enum

import numpy as np
from monty.json import MSONable

from qpk.core import ShapeError

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


class OptimizerKind(str, Enum):
    """Supported optimizers."""

    ADAM = "ADAM"
    GD = "GD"


@dataclass(frozen=True)
class AdamState:
    """Moment estimates of the ADAM optimizer.

    Args:
        m: First-moment (mean) estimate.
        v: Second-moment (uncentered variance) estimate, entrywise nonnegative.
        t: Number of steps taken so far.
    """

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> AdamState:
        """Fresh state for a parameter vector of the given length."""
        return cls(np.zeros(size), np.zeros(size), 0)


def adam_step(
    state: AdamState,
    theta: np.ndarray,
    grad: np.ndarray,
    lr: float,
    beta1: float = BETA1,
    beta2: float = BETA2,
    eps: float = EPSILON,
) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected ADAM update. Inputs are not modified.

    Returns:
        The new state and the updated parameter vector.

    Raises:
        ShapeError: if theta, grad and the state moments differ in length.
    """
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if not theta.shape == grad.shape == state.m.shape == state.v.shape:
        raise ShapeError(
            f"ADAM shapes disagree: theta {theta.shape}, grad {grad.shape}, moments {state.m.shape}/{state.v.shape}"
        )

    t = state.t + 1
    m = beta1 * state.m + (1.0 - beta1) * grad
    v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)

    new_theta = theta - lr * m_hat / (np.sqrt(v_hat) + eps)
    return AdamState(m, v, t), new_theta


class Optimizer(MSONable, metaclass=ABCMeta):
    """Base definition for a stateful first-order optimizer."""

    def __init__(self, lr: float):
        """
        Args:
            lr: Step size.
        """
        self.lr = lr

    @abstractmethod
    def reset(self, size: int) -> None:
        """Clears internal state for a parameter vector of the given length."""

    @abstractmethod
    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Returns the updated parameters."""


class GradientDescent(Optimizer):
    """Vanilla gradient descent: theta <- theta - lr * grad."""

    def reset(self, size: int) -> None:
        """Stateless; nothing to clear."""

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Returns theta - lr * grad."""
        theta = np.asarray(theta, dtype=np.float64)
        grad = np.asarray(grad, dtype=np.float64)
        if theta.shape != grad.shape:
            raise ShapeError(f"Gradient shape {grad.shape} does not match parameters {theta.shape}")
        return theta - self.lr * grad


class Adam(Optimizer):
    """ADAM with the conventional constants beta1 = 0.9, beta2 = 0.999, eps = 1e-8."""

    def __init__(self, lr: float, beta1: float = BETA1, beta2: float = BETA2, eps: float = EPSILON):
        """
        Args:
            lr: Base step size.
            beta1: Decay rate of the first moment.
            beta2: Decay rate of the second moment.
            eps: Denominator offset.
        """
        super().__init__(lr)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state: AdamState | None = None

    def reset(self, size: int) -> None:
        """Zeroes both moments and the step counter."""
        self.state = AdamState.zeros(size)

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Applies adam_step and keeps the new moments."""
        if self.state is None:
            self.reset(len(theta))
        self.state, theta = adam_step(self.state, theta, grad, self.lr, self.beta1, self.beta2, self.eps)  # type: ignore
        return theta

    def as_dict(self) -> dict:
        """Returns MSONable dict for serialization. See monty package for more
        information.
        """
        return {
            "@module": self.__class__.__module__,
            "@class": self.__class__.__name__,
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
        }


def get_optimizer(kind: OptimizerKind | str, lr: float) -> Optimizer:
    """Instantiates the optimizer named by kind."""
    if OptimizerKind(kind) is OptimizerKind.ADAM:
        return Adam(lr)
    return GradientDescent(lr)
