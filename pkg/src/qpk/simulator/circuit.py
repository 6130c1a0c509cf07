"""Compiled circuit templates whose gate angles are drawn from a feature vector and/or a
parameter vector. Templates are evaluated with numba kernels, batched over data points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import jit, prange

from qpk.core import ParameterError, QubitIndexError, ShapeError
from qpk.simulator.statevector import PauliAxis, PauliRotation, _apply_gate, _expval_z

FEATURE = 0
PARAMETER = 1

SHIFT = np.pi / 4


@dataclass(frozen=True)
class CircuitTemplate:
    """An ordered gate list with symbolic angles.

    Every gate's angle is ``x[index]`` when its source is FEATURE or ``theta[index]`` when
    its source is PARAMETER. A parameter may occur in several gates (shared parameters).

    Args:
        n_qubits: Register size.
        axes: Pauli generator per gate (PauliAxis values).
        q0: First target qubit per gate.
        q1: Second target qubit per gate (-1 for single-qubit gates).
        sources: FEATURE or PARAMETER per gate.
        indices: Index into x or theta per gate.
        n_features: Expected feature-vector length.
        n_params: Expected parameter-vector length.
        readout: Qubit whose Z expectation is the model output.
    """

    n_qubits: int
    axes: np.ndarray
    q0: np.ndarray
    q1: np.ndarray
    sources: np.ndarray
    indices: np.ndarray
    n_features: int
    n_params: int
    readout: int = 0

    @classmethod
    def from_gates(
        cls,
        n_qubits: int,
        gates: list[tuple[PauliAxis, tuple[int, ...], int, int]],
        n_features: int,
        n_params: int,
        readout: int = 0,
    ) -> CircuitTemplate:
        """Builds a template from (axis, targets, source, index) tuples.

        Raises:
            QubitIndexError: if a gate or the readout addresses a missing qubit.
        """
        if readout < 0 or readout >= n_qubits:
            raise QubitIndexError(f"Readout qubit {readout} out of range for {n_qubits} qubit(s)")

        axes, q0, q1, sources, indices = [], [], [], [], []
        for axis, targets, source, index in gates:
            PauliRotation(axis, targets, 0.0).validate(n_qubits)
            limit = n_features if source == FEATURE else n_params
            if not 0 <= index < limit:
                raise ShapeError(f"Angle index {index} out of range for source of length {limit}")

            axes.append(int(axis))
            q0.append(targets[0])
            q1.append(targets[1] if len(targets) == 2 else -1)
            sources.append(source)
            indices.append(index)

        return cls(
            n_qubits=n_qubits,
            axes=np.array(axes, dtype=np.int64),
            q0=np.array(q0, dtype=np.int64),
            q1=np.array(q1, dtype=np.int64),
            sources=np.array(sources, dtype=np.int64),
            indices=np.array(indices, dtype=np.int64),
            n_features=n_features,
            n_params=n_params,
            readout=readout,
        )

    @property
    def num_gates(self) -> int:
        """Total number of gates in the template."""
        return len(self.axes)

    @property
    def occurrences(self) -> np.ndarray:
        """Positions of the gates whose angle is a trainable parameter."""
        return np.flatnonzero(self.sources == PARAMETER)

    def check_inputs(self, X: np.ndarray, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Validates and normalizes a (batch of) feature vectors and a parameter vector.

        Returns:
            A tuple of a 2D float64 feature array and a 1D float64 parameter array.

        Raises:
            ShapeError: on any dimension mismatch.
            ParameterError: if a parameter is NaN or infinite.
        """
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        theta = np.asarray(theta, dtype=np.float64)
        if X.shape[1] != self.n_features:
            raise ShapeError(f"Expected feature vectors of length {self.n_features}, got {X.shape[1]}")
        if theta.ndim != 1 or len(theta) != self.n_params:
            raise ShapeError(f"Expected a parameter vector of length {self.n_params}, got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise ParameterError(f"Parameters must be finite, got {theta}")
        return np.ascontiguousarray(X), np.ascontiguousarray(theta)

    def expectations(self, X: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Model outputs <Z_readout> for every row of X."""
        X, theta = self.check_inputs(X, theta)
        return _batch_expectations(
            self.n_qubits, self.axes, self.q0, self.q1, self.sources, self.indices, X, theta, self.readout
        )

    def jacobian(self, X: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Parameter-shift gradients for every row of X, shape (n, n_params)."""
        X, theta = self.check_inputs(X, theta)
        return _batch_jacobian(
            self.n_qubits,
            self.axes,
            self.q0,
            self.q1,
            self.sources,
            self.indices,
            X,
            theta,
            self.n_params,
            self.readout,
            SHIFT,
        )

    def occurrence_shifts(self, x: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """Per-gate shift differences f(angle_g + pi/4) - f(angle_g - pi/4) for a single data
        point; zero for feature-encoding gates. Summing over the occurrences of a shared
        parameter yields its partial derivative.
        """
        X, theta = self.check_inputs(x, theta)
        angles = _resolve_angles(self.sources, self.indices, X[0], theta)
        return _occurrence_shifts(self.n_qubits, self.axes, self.q0, self.q1, self.sources, angles, self.readout, SHIFT)


@jit(nopython=True)
def _resolve_angles(sources, indices, x, theta):
    angles = np.empty(sources.shape[0], dtype=np.float64)
    for g in range(sources.shape[0]):
        if sources[g] == 0:
            angles[g] = x[indices[g]]
        else:
            angles[g] = theta[indices[g]]
    return angles


@jit(nopython=True)
def _expectation(n_qubits, axes, q0, q1, angles, readout):
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    for g in range(axes.shape[0]):
        _apply_gate(amps, axes[g], q0[g], q1[g], angles[g])
    return _expval_z(amps, readout)


@jit(nopython=True)
def _occurrence_shifts(n_qubits, axes, q0, q1, sources, angles, readout, shift):
    out = np.zeros(axes.shape[0], dtype=np.float64)
    shifted = angles.copy()
    for g in range(axes.shape[0]):
        if sources[g] != 1:
            continue
        shifted[g] = angles[g] + shift
        plus = _expectation(n_qubits, axes, q0, q1, shifted, readout)
        shifted[g] = angles[g] - shift
        minus = _expectation(n_qubits, axes, q0, q1, shifted, readout)
        shifted[g] = angles[g]
        out[g] = plus - minus
    return out


@jit(nopython=True, parallel=True)
def _batch_expectations(n_qubits, axes, q0, q1, sources, indices, X, theta, readout):
    out = np.empty(X.shape[0], dtype=np.float64)
    for i in prange(X.shape[0]):
        angles = _resolve_angles(sources, indices, X[i], theta)
        out[i] = _expectation(n_qubits, axes, q0, q1, angles, readout)
    return out


@jit(nopython=True, parallel=True)
def _batch_jacobian(n_qubits, axes, q0, q1, sources, indices, X, theta, n_params, readout, shift):
    out = np.zeros((X.shape[0], n_params), dtype=np.float64)
    for i in prange(X.shape[0]):
        angles = _resolve_angles(sources, indices, X[i], theta)
        diffs = _occurrence_shifts(n_qubits, axes, q0, q1, sources, angles, readout, shift)
        for g in range(axes.shape[0]):
            if sources[g] == 1:
                out[i, indices[g]] += diffs[g]
    return out
