"""Definitions of common job functions."""

from __future__ import annotations

from typing import Literal

from qpk.models.qnn import QnnConfig, QuantumNeuralNetwork


def model_for(d: int, L: int, ring_mode: Literal["single", "double"] = "single") -> QuantumNeuralNetwork:
    """The QNN on d qubits with L layers.

    Args:
        d: Number of qubits (the dataset's feature dimensionality).
        L: Number of layers.
        ring_mode: ZZ ring construction for two qubits.

    Returns:
        A QuantumNeuralNetwork with the requested shape.
    """
    return QuantumNeuralNetwork(QnnConfig(d, L, ring_mode))
