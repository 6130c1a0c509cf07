"""Quantum neural network predictors f(x; theta) = <0| U(x, theta)^dag Z_0 U(x, theta) |0>
evaluated on the statevector simulator, with exact parameter-shift gradients.
"""

from __future__ import annotations

from abc import abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Union

import numpy as np
from monty.json import MSONable

from qpk.core import ParameterError
from qpk.models.base import Predictor
from qpk.simulator.circuit import FEATURE, PARAMETER, CircuitTemplate
from qpk.simulator.statevector import MAX_QUBITS, PauliAxis


@dataclass(frozen=True)
class QnnConfig(MSONable):
    """Shape of the layered ansatz.

    Args:
        d: Number of qubits, equal to the feature dimensionality.
        L: Number of layers (>= 1). The parameter vector has length 2 * L; each layer's
            two parameters are shared by all qubits.
        ring_mode: How the ZZ ring is built for d = 2. "single" applies one ZZ gate on
            (0, 1); "double" applies the ring literally, i.e. (0, 1) and (1, 0).
    """

    d: int
    L: int
    ring_mode: Literal["single", "double"] = "single"

    def __post_init__(self):
        if not 1 <= self.d <= MAX_QUBITS:
            raise ParameterError(f"d must be between 1 and {MAX_QUBITS}, got {self.d}")
        if self.L < 1:
            raise ParameterError(f"L must be at least 1, got {self.L}")
        if self.ring_mode not in ("single", "double"):
            raise ParameterError(f"Unknown ring_mode: {self.ring_mode}")

    @property
    def n_params(self) -> int:
        """Parameter count, 2 * L."""
        return 2 * self.L

    @property
    def ring_pairs(self) -> list[tuple[int, int]]:
        """Qubit pairs (j, j + 1 mod d) receiving a ZZ rotation in every layer."""
        if self.d == 1:
            return []
        if self.d == 2 and self.ring_mode == "single":
            return [(0, 1)]
        return [(j, (j + 1) % self.d) for j in range(self.d)]


class QuantumModel(Predictor):
    """A predictor defined by a compiled circuit template with Z readout on qubit 0."""

    @cached_property
    def template(self) -> CircuitTemplate:
        """The compiled circuit template."""
        return self._build_template()

    @abstractmethod
    def _build_template(self) -> CircuitTemplate:
        """Compiles the circuit template of this model."""

    @property
    def n_features(self) -> int:
        """Dimensionality of the input vectors."""
        return self.template.n_features

    @property
    def n_params(self) -> int:
        """Length of the parameter vector."""
        return self.template.n_params

    def predict_batch(self, X: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Expectation values for every row of X."""
        return self.template.expectations(X, theta)

    def jacobian(self, X: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Parameter-shift gradients: for each shared parameter, the sum over its gate
        occurrences of f(angle + pi/4) - f(angle - pi/4).
        """
        return self.template.jacobian(X, theta)

    def occurrence_shifts(self, x: np.ndarray, theta: np.ndarray) -> dict[int, np.ndarray]:
        """Per-occurrence shift differences grouped by parameter index."""
        diffs = self.template.occurrence_shifts(x, theta)
        grouped: dict[int, list[float]] = {k: [] for k in range(self.n_params)}
        for g in self.template.occurrences:
            grouped[int(self.template.indices[g])].append(float(diffs[g]))
        return {k: np.array(v) for k, v in grouped.items()}


class QuantumNeuralNetwork(QuantumModel):
    """Layered QNN with Y-rotation feature encoding, shared-parameter ZZ ring and X layers.

    Circuit: for each qubit j, RY(x_j); then for each layer i, ZZ(theta_{2i}) on every ring
    pair followed by X(theta_{2i+1}) on every qubit. Readout is Z on qubit 0.
    """

    def __init__(self, config: QnnConfig):
        """
        Args:
            config: The ansatz shape.
        """
        self.config = config

    def _build_template(self) -> CircuitTemplate:
        d, L = self.config.d, self.config.L

        gates = [(PauliAxis.Y, (j,), FEATURE, j) for j in range(d)]
        for i in range(L):
            gates.extend((PauliAxis.ZZ, pair, PARAMETER, 2 * i) for pair in self.config.ring_pairs)
            gates.extend((PauliAxis.X, (j,), PARAMETER, 2 * i + 1) for j in range(d))

        return CircuitTemplate.from_gates(d, gates, n_features=d, n_params=2 * L)

    def __repr__(self) -> str:
        return f"QuantumNeuralNetwork(d={self.config.d}, L={self.config.L}, ring_mode={self.config.ring_mode})"


class SingleQubitModel(QuantumModel):
    """One-qubit, one-parameter model: X(x) encoding, X(theta) ansatz, Z readout.

    Its output has the closed form cos(2 (theta + x)).
    """

    def _build_template(self) -> CircuitTemplate:
        gates = [(PauliAxis.X, (0,), FEATURE, 0), (PauliAxis.X, (0,), PARAMETER, 0)]
        return CircuitTemplate.from_gates(1, gates, n_features=1, n_params=1)

    def __repr__(self) -> str:
        return "SingleQubitModel()"


ModelLike = Union[QnnConfig, QuantumModel]


def as_model(config: ModelLike) -> QuantumModel:
    """Returns a QuantumModel for either a QnnConfig or an existing model."""
    if isinstance(config, QnnConfig):
        return QuantumNeuralNetwork(config)
    return config


def predict(x: np.ndarray, theta: np.ndarray, config: ModelLike) -> float:
    """Model output f(x; theta) in [-1, 1].

    Raises:
        ShapeError: on dimension mismatch.
    """
    return as_model(config).predict(x, theta)


def gradient(x: np.ndarray, theta: np.ndarray, config: ModelLike) -> np.ndarray:
    """Exact gradient of f(x; theta) with respect to theta (parameter-shift rule)."""
    return as_model(config).gradient(x, theta)


def gradient_fd(x: np.ndarray, theta: np.ndarray, config: ModelLike, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of f(x; theta).

    Raises:
        ParameterError: if h is not in (0, 1e-3].
    """
    return as_model(config).gradient_fd(x, theta, h)
