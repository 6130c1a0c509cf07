"""Implements a minimal dense statevector simulator for Pauli-rotation circuits.

Gates follow the convention exp(-i * angle * P), where P is a Pauli string (X, Y, Z on
one qubit or Z⊗Z on two qubits). There is no implicit half angle. Qubit q corresponds to
bit q of the (little-endian) basis-state index.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from monty.json import MSONable
from numba import jit

from qpk.core import CapacityError, QubitIndexError, ShapeError

MAX_QUBITS = 24


class PauliAxis(IntEnum):
    """Generator of a Pauli rotation. The integer values are used by the compiled kernels."""

    X = 0
    Y = 1
    Z = 2
    ZZ = 3

    @property
    def num_targets(self) -> int:
        """Number of qubits the generator acts on."""
        return 2 if self is PauliAxis.ZZ else 1


@dataclass(frozen=True)
class PauliRotation(MSONable):
    """A rotation exp(-i * angle * P) about a Pauli generator.

    Args:
        axis: The Pauli generator (X, Y, Z or ZZ).
        targets: The qubit indices acted on (one index, or two for ZZ).
        angle: Rotation angle in radians.
    """

    axis: PauliAxis
    targets: tuple[int, ...]
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "axis", PauliAxis(self.axis))
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        if len(self.targets) != self.axis.num_targets:
            raise ShapeError(f"{self.axis.name} rotation needs {self.axis.num_targets} target(s), got {self.targets}")
        if len(set(self.targets)) != len(self.targets):
            raise QubitIndexError(f"Target qubits must be distinct, got {self.targets}")

    def validate(self, n_qubits: int) -> None:
        """Raises QubitIndexError if any target is outside a register of n_qubits."""
        for q in self.targets:
            if q < 0 or q >= n_qubits:
                raise QubitIndexError(f"Qubit index {q} out of range for {n_qubits} qubit(s)")

    @property
    def kernel_args(self) -> tuple[int, int, int, float]:
        """(axis, q0, q1, angle) as consumed by the compiled gate kernel; q1 is -1 for
        single-qubit gates.
        """
        q1 = self.targets[1] if len(self.targets) == 2 else -1
        return int(self.axis), self.targets[0], q1, float(self.angle)


class Statevector(MSONable):
    """Dense complex amplitude vector of an n-qubit pure state."""

    def __init__(self, amplitudes: np.ndarray | list, n_qubits: int | None = None):
        """
        Args:
            amplitudes: Complex vector of length 2**n_qubits.
            n_qubits: Number of qubits. Inferred from the vector length if not given.
        """
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise ShapeError("Amplitudes must be a one-dimensional vector")

        if n_qubits is None:
            n_qubits = int(round(np.log2(max(len(amps), 1))))
        if n_qubits < 1 or n_qubits > MAX_QUBITS:
            raise CapacityError(f"n_qubits must be between 1 and {MAX_QUBITS}, got {n_qubits}")
        if len(amps) != 2**n_qubits:
            raise ShapeError(f"Expected {2**n_qubits} amplitudes for {n_qubits} qubit(s), got {len(amps)}")

        self._amplitudes = amps
        self.n_qubits = n_qubits

    @property
    def amplitudes(self) -> np.ndarray:
        """A read-only view of the amplitude vector."""
        view = self._amplitudes.view()
        view.flags.writeable = False
        return view

    @property
    def norm(self) -> float:
        """Euclidean norm of the amplitude vector."""
        return float(np.linalg.norm(self._amplitudes))

    @property
    def probabilities(self) -> np.ndarray:
        """Computational-basis probabilities |amp_k|^2."""
        return np.abs(self._amplitudes) ** 2

    def copy(self) -> Statevector:
        """Returns an independent copy of the state."""
        return Statevector(self._amplitudes.copy(), self.n_qubits)

    def as_dict(self) -> dict:
        """Returns MSONable dict for serialization. See monty package for more
        information.
        """
        return {
            "@module": self.__class__.__module__,
            "@class": self.__class__.__name__,
            "real": self._amplitudes.real.tolist(),
            "imag": self._amplitudes.imag.tolist(),
            "n_qubits": self.n_qubits,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Statevector:
        """Instantiate object from MSONable dict. See monty package for more
        information.
        """
        amps = np.asarray(d["real"]) + 1j * np.asarray(d["imag"])
        return cls(amps, d["n_qubits"])

    def __repr__(self) -> str:
        return f"Statevector({self.n_qubits} qubits, norm={self.norm:.12f})"


def new_state(n_qubits: int) -> Statevector:
    """Prepares |0...0> on n_qubits qubits.

    Args:
        n_qubits: Number of qubits, between 1 and MAX_QUBITS.

    Raises:
        CapacityError: if n_qubits is out of range.
    """
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(f"n_qubits must be between 1 and {MAX_QUBITS}, got {n_qubits}")

    amps = np.zeros(2**n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(amps, n_qubits)


def apply_rotation(state: Statevector, gate: PauliRotation) -> Statevector:
    """Applies exp(-i * angle * P) to a state. The input state is left untouched.

    Args:
        state: The input statevector.
        gate: The rotation to apply.

    Returns:
        A new Statevector.

    Raises:
        QubitIndexError: if the gate addresses a qubit outside the register.
    """
    gate.validate(state.n_qubits)

    amps = np.array(state.amplitudes, dtype=np.complex128)
    _apply_gate(amps, *gate.kernel_args)
    return Statevector(amps, state.n_qubits)


def expval_z(state: Statevector, qubit: int) -> float:
    """Expectation value of the Pauli Z operator on a single qubit.

    Raises:
        QubitIndexError: if qubit is outside the register.
    """
    if qubit < 0 or qubit >= state.n_qubits:
        raise QubitIndexError(f"Qubit index {qubit} out of range for {state.n_qubits} qubit(s)")

    return float(_expval_z(state.amplitudes, qubit))


@jit(nopython=True)
def _rotate_x(amps: np.ndarray, qubit: int, angle: float) -> None:
    """[[c, -is], [-is, c]] on the target qubit (in place)."""
    c = np.cos(angle)
    s = np.sin(angle)
    mask = 1 << qubit
    for k in range(amps.shape[0]):
        if k & mask == 0:
            j = k | mask
            a0 = amps[k]
            a1 = amps[j]
            amps[k] = c * a0 - 1j * s * a1
            amps[j] = c * a1 - 1j * s * a0


@jit(nopython=True)
def _rotate_y(amps: np.ndarray, qubit: int, angle: float) -> None:
    """[[c, -s], [s, c]] on the target qubit (in place)."""
    c = np.cos(angle)
    s = np.sin(angle)
    mask = 1 << qubit
    for k in range(amps.shape[0]):
        if k & mask == 0:
            j = k | mask
            a0 = amps[k]
            a1 = amps[j]
            amps[k] = c * a0 - s * a1
            amps[j] = s * a0 + c * a1


@jit(nopython=True)
def _rotate_z(amps: np.ndarray, qubit: int, angle: float) -> None:
    """diag(e^{-i angle}, e^{+i angle}) on the target qubit (in place)."""
    minus = np.exp(-1j * angle)
    plus = np.exp(1j * angle)
    mask = 1 << qubit
    for k in range(amps.shape[0]):
        if k & mask == 0:
            amps[k] = amps[k] * minus
        else:
            amps[k] = amps[k] * plus


@jit(nopython=True)
def _rotate_zz(amps: np.ndarray, q0: int, q1: int, angle: float) -> None:
    """Diagonal phase: e^{-i angle} where the target bits agree, e^{+i angle} otherwise."""
    equal = np.exp(-1j * angle)
    differ = np.exp(1j * angle)
    for k in range(amps.shape[0]):
        if ((k >> q0) ^ (k >> q1)) & 1:
            amps[k] = amps[k] * differ
        else:
            amps[k] = amps[k] * equal


@jit(nopython=True)
def _apply_gate(amps: np.ndarray, axis: int, q0: int, q1: int, angle: float) -> None:
    """Dispatches a single rotation onto the amplitude buffer (in place)."""
    if angle == 0.0:
        return
    if axis == 0:
        _rotate_x(amps, q0, angle)
    elif axis == 1:
        _rotate_y(amps, q0, angle)
    elif axis == 2:
        _rotate_z(amps, q0, angle)
    else:
        _rotate_zz(amps, q0, q1, angle)


@jit(nopython=True)
def _expval_z(amps: np.ndarray, qubit: int) -> float:
    mask = 1 << qubit
    total = 0.0
    for k in range(amps.shape[0]):
        p = amps[k].real * amps[k].real + amps[k].imag * amps[k].imag
        if k & mask == 0:
            total += p
        else:
            total -= p
    return total
