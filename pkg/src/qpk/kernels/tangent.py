"""Tangent kernels: inner products of parameter gradients at a fixed parameter point."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any

import numpy as np

from qpk.kernels.base import GramMatrix, KernelKind, as_points
from qpk.models.qnn import as_model

if TYPE_CHECKING:
    from qpk.models.base import Predictor
    from qpk.models.qnn import QnnConfig


def qntk(x: np.ndarray, x_prime: np.ndarray, theta: np.ndarray, config: QnnConfig | Predictor) -> float:
    """k(x, x') = grad_theta f(x; theta) . grad_theta f(x'; theta).

    Raises:
        ShapeError: on dimension mismatch.
    """
    model = as_model(config)
    return float(np.dot(model.gradient(x, theta), model.gradient(x_prime, theta)))


def tangent_gram_values(model: Predictor, X_rows: np.ndarray, X_cols: np.ndarray | None, theta: np.ndarray):
    """Gram values from one Jacobian per point set. X_cols=None means the square case,
    in which the single Jacobian is reused and the result symmetrized exactly.
    """
    J_rows = model.jacobian(X_rows, theta)
    if X_cols is None:
        G = J_rows @ J_rows.T
        return (G + G.T) / 2.0
    return J_rows @ model.jacobian(X_cols, theta).T


def qntk_gram(
    X_rows: Any,
    X_cols: Any,
    theta: np.ndarray,
    config: QnnConfig | Predictor,
    provenance: dict | None = None,
) -> GramMatrix:
    """Tangent-kernel Gram matrix at theta. Each point's gradient is evaluated once.

    Args:
        X_rows: Row points (a LabeledDataset or an (n, d) array).
        X_cols: Column points. Passing the same object as X_rows yields a square Gram.
        theta: The parameter point.
        config: The ansatz shape or a predictor.
        provenance: Extra metadata to attach to the result.
    """
    model = as_model(config)
    rows, row_ids = as_points(X_rows)
    cols, col_ids = as_points(X_cols)

    values = tangent_gram_values(model, rows, None if X_cols is X_rows else cols, theta)
    return GramMatrix(values, KernelKind.QNTK, row_ids, col_ids, provenance=provenance)
