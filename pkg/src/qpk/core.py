"""Exception types shared across the qpk package.

Each error also inherits from the closest builtin exception so that callers can catch
either the specific qpk error or the generic Python one.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from qpk.training.trajectory import ParameterTrajectory


class QpkError(Exception):
    """Base class for all errors raised by the qpk package."""


class CapacityError(QpkError, ValueError):
    """Raised when a requested statevector exceeds the supported qubit count."""


class QubitIndexError(QpkError, IndexError):
    """Raised when a gate or readout addresses a qubit outside the register."""


class ShapeError(QpkError, ValueError):
    """Raised when array lengths or matrix shapes are inconsistent."""


class ParameterError(QpkError, ValueError):
    """Raised when a scalar argument is outside its allowed range."""


class DegenerateInitializationError(QpkError, ValueError):
    """Raised when a deviation is requested relative to a zero initialization."""


class ProvenanceError(QpkError, ValueError):
    """Raised when an artifact does not belong to the configuration consuming it."""


class DegenerateLabelsError(QpkError, ValueError):
    """Raised when a binary classifier receives labels from a single class."""


class InputError(QpkError, ValueError):
    """Raised when a classifier input violates a structural requirement (e.g., symmetry)."""


class EmptyReportError(QpkError, ValueError):
    """Raised when a report is requested for a run without any metrics."""


class TrainingDivergedError(QpkError, RuntimeError):
    """Raised when training encounters a non-finite loss or gradient.

    The partial trajectory up to (and excluding) the offending epoch is attached as
    the ``trajectory`` attribute.
    """

    def __init__(self, message: str, trajectory: ParameterTrajectory | None = None):
        """
        Args:
            message: Human-readable description of the failure.
            trajectory: The trajectory recorded before divergence was detected.
        """
        super().__init__(message)
        self.trajectory = trajectory
