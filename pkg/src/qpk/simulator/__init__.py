"""Dense statevector simulation for Pauli-rotation circuits."""

from __future__ import annotations

from .statevector import MAX_QUBITS, PauliAxis, PauliRotation, Statevector, apply_rotation, expval_z, new_state

__all__ = [
    "MAX_QUBITS",
    "PauliAxis",
    "PauliRotation",
    "Statevector",
    "apply_rotation",
    "expval_z",
    "new_state",
]
