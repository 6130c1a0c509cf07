"""Binary soft-margin SVM trained on a precomputed Gram matrix.

The dual

    max_alpha  sum_i alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
    s.t.       0 <= alpha_i <= C,  sum_i alpha_i y_i = 0

is solved by sequential minimal optimization with second-order working-set selection
(maximal violating pair, as in LIBSVM). The solver stops once the maximal KKT violation
falls below tol or after max_passes sweeps of n pair updates.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
from monty.json import MSONable
from monty.serialization import dumpfn, loadfn
from numba import jit

from qpk.core import DegenerateLabelsError, InputError, ParameterError, ShapeError
from qpk.kernels.base import GramMatrix
from qpk.utils.funcs import get_logger

logger = get_logger(__name__)

SYMMETRY_TOL = 1e-8
ALPHA_FLOOR = 1e-9
TAU = 1e-12


class SvmModel(MSONable):
    """A trained binary SVM: dual coefficients, bias and the training labels."""

    def __init__(
        self,
        alpha: np.ndarray | list,
        b: float,
        labels: np.ndarray | list,
        C: float,
        tol: float = 1e-3,
        n_iter: int = 0,
        converged: bool = True,
        provenance: dict[str, Any] | None = None,
    ):
        """
        Args:
            alpha: Dual coefficients, one per training point, each in [0, C].
            b: Bias term.
            labels: Training labels (+1/-1).
            C: Box constraint.
            tol: Solver tolerance used in training.
            n_iter: Number of pair updates performed.
            converged: Whether the stopping criterion was met before the iteration cap.
            provenance: Metadata about the Gram matrix used in training.
        """
        self.alpha = np.asarray(alpha, dtype=np.float64)
        self.b = float(b)
        self.labels = np.asarray(labels, dtype=np.float64)
        self.C = float(C)
        self.tol = float(tol)
        self.n_iter = int(n_iter)
        self.converged = bool(converged)
        self.provenance = provenance or {}

    @property
    def support(self) -> np.ndarray:
        """Indices of training points with a nonzero dual coefficient."""
        return np.flatnonzero(self.alpha > 0)

    @property
    def n_train(self) -> int:
        """Number of training points."""
        return len(self.alpha)

    @property
    def dual_coef(self) -> np.ndarray:
        """alpha_i * y_i for every training point."""
        return self.alpha * self.labels

    def to_json(self, path: str | Path) -> None:
        """Writes the model as JSON."""
        dumpfn(self, path, indent=2)

    @classmethod
    def from_json(cls, path: str | Path) -> SvmModel:
        """Reads a model written by to_json()."""
        return loadfn(path)

    def as_dict(self) -> dict:
        """Returns MSONable dict for serialization. See monty package for more
        information.
        """
        return {
            "@module": self.__class__.__module__,
            "@class": self.__class__.__name__,
            "alpha": self.alpha.tolist(),
            "b": self.b,
            "support": self.support.tolist(),
            "labels": self.labels.tolist(),
            "C": self.C,
            "tol": self.tol,
            "n_iter": self.n_iter,
            "converged": self.converged,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> SvmModel:
        """Instantiate object from MSONable dict. See monty package for more
        information.
        """
        kwargs = {k: v for k, v in d.items() if not k.startswith("@") and k != "support"}
        return cls(**kwargs)

    def __repr__(self) -> str:
        return f"SvmModel(n_train={self.n_train}, n_support={len(self.support)}, b={self.b:.6g}, C={self.C})"


def _check_labels(labels: np.ndarray, n: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if len(labels) != n:
        raise ShapeError(f"Got {len(labels)} labels for a Gram of size {n}")
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise InputError("Labels must be +1 or -1")
    if np.all(labels == labels[0]):
        raise DegenerateLabelsError("Both classes must be present to train a binary SVM")
    return labels


def svm_train(
    gram: GramMatrix | np.ndarray,
    labels: np.ndarray | list,
    C: float = 1.0,
    tol: float = 1e-3,
    max_passes: int = 200,
) -> SvmModel:
    """Trains a binary SVM on a precomputed square Gram matrix.

    Args:
        gram: The training Gram matrix (n x n).
        labels: Training labels in {-1, +1}.
        C: Box constraint, positive.
        tol: Stopping tolerance on the maximal KKT violation.
        max_passes: Iteration cap in sweeps of n pair updates.

    Raises:
        ShapeError: if the Gram is not square or the labels do not match it.
        InputError: if the Gram is asymmetric beyond 1e-8 or labels are not +/-1.
        DegenerateLabelsError: if only one class is present.
        ParameterError: if C, tol or max_passes is not positive.
    """
    K = np.asarray(gram, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError(f"SVM training requires a square Gram matrix, got shape {K.shape}")
    if np.max(np.abs(K - K.T)) > SYMMETRY_TOL:
        raise InputError("Gram matrix is not symmetric within tolerance")
    if not C > 0:
        raise ParameterError(f"C must be positive, got {C}")
    if not tol > 0 or max_passes < 1:
        raise ParameterError(f"Invalid solver settings: tol={tol}, max_passes={max_passes}")

    y = _check_labels(labels, K.shape[0])
    n = len(y)

    alpha, grad, n_iter, converged = _smo_solve(np.ascontiguousarray(K), y, float(C), float(tol), max_passes * n)
    if not converged:
        logger.warning(f"SMO did not converge within {max_passes} passes ({n_iter} updates)")

    rho = _compute_rho(alpha, grad, y, C)
    alpha = np.where(alpha < ALPHA_FLOOR, 0.0, alpha)

    provenance = gram.provenance if isinstance(gram, GramMatrix) else {}
    if isinstance(gram, GramMatrix):
        provenance = {**provenance, "gram_hash": gram.hash, "kind": gram.kind.value}

    return SvmModel(alpha, -rho, y, C, tol, n_iter, converged, provenance)


def _compute_rho(alpha: np.ndarray, grad: np.ndarray, y: np.ndarray, C: float) -> float:
    """Offset from the free support vectors, or the midpoint of the feasible interval
    when every coefficient sits at a bound.
    """
    y_grad = y * grad
    upper = alpha >= C
    lower = alpha <= 0
    free = ~upper & ~lower

    if np.any(free):
        return float(np.mean(y_grad[free]))

    ub_mask = (upper & (y < 0)) | (lower & (y > 0))
    lb_mask = (upper & (y > 0)) | (lower & (y < 0))
    ub = np.min(y_grad[ub_mask]) if np.any(ub_mask) else np.inf
    lb = np.max(y_grad[lb_mask]) if np.any(lb_mask) else -np.inf
    return float((ub + lb) / 2)


@jit(nopython=True)
def _smo_solve(K, y, C, tol, max_iter):
    n = K.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)

    n_iter = 0
    converged = False
    while n_iter < max_iter:
        # i: maximal violator among the "up" set
        g_max = -np.inf
        i = -1
        for t in range(n):
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                v = -y[t] * grad[t]
                if v >= g_max:
                    g_max = v
                    i = t

        # j: second-order choice among the "low" set
        g_max2 = -np.inf
        j = -1
        obj_min = np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                v = y[t] * grad[t]
                if v >= g_max2:
                    g_max2 = v
                diff = g_max + v
                if i >= 0 and diff > 0:
                    quad = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if quad <= 0:
                        quad = TAU
                    obj = -(diff * diff) / quad
                    if obj <= obj_min:
                        obj_min = obj
                        j = t

        if g_max + g_max2 < tol or j == -1:
            converged = True
            break

        n_iter += 1
        old_i = alpha[i]
        old_j = alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = TAU

        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            elif alpha[j] > C:
                alpha[j] = C
                alpha[i] = C + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            elif alpha[j] < 0:
                alpha[j] = 0.0
                alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            elif alpha[i] < 0:
                alpha[i] = 0.0
                alpha[j] = total

        d_i = alpha[i] - old_i
        d_j = alpha[j] - old_j
        for k in range(n):
            grad[k] += y[k] * (y[i] * K[k, i] * d_i + y[j] * K[k, j] * d_j)

    return alpha, grad, n_iter, converged


def decision_function(model: SvmModel, cross_gram: GramMatrix | np.ndarray) -> np.ndarray:
    """Decision values sum_i alpha_i y_i K(x, x_i) + b for each row of a test x train Gram.

    Raises:
        ShapeError: if the column count differs from the training size.
    """
    K = np.atleast_2d(np.asarray(cross_gram, dtype=np.float64))
    if K.shape[1] != model.n_train:
        raise ShapeError(f"Cross Gram has {K.shape[1]} columns but the model was trained on {model.n_train} points")
    return K @ model.dual_coef + model.b


def svm_predict(model: SvmModel, cross_gram: GramMatrix | np.ndarray) -> np.ndarray:
    """Predicted labels, the sign of the decision value with sign(0) = +1."""
    return np.where(decision_function(model, cross_gram) >= 0, 1.0, -1.0)


def dual_objective(alpha: np.ndarray, gram: GramMatrix | np.ndarray, labels: np.ndarray) -> float:
    """sum(alpha) - 1/2 (alpha * y)^T K (alpha * y)."""
    ay = np.asarray(alpha, dtype=np.float64) * np.asarray(labels, dtype=np.float64)
    K = np.asarray(gram, dtype=np.float64)
    return float(np.sum(alpha) - 0.5 * ay @ K @ ay)


def accuracy(preds: np.ndarray | list, labels: np.ndarray | list) -> float:
    """Fraction of predictions equal to the labels.

    Raises:
        ShapeError: on a length mismatch or empty input.
    """
    preds = np.asarray(preds).ravel()
    labels = np.asarray(labels).ravel()
    if len(preds) != len(labels):
        raise ShapeError(f"Got {len(preds)} predictions for {len(labels)} labels")
    if len(preds) == 0:
        raise ShapeError("Accuracy requires at least one prediction")
    return float(np.mean(preds == labels))
