"""Path kernels: tangent kernels averaged along a recorded training trajectory.

The discrete path kernel is the uniform mean over epochs t = 0..T-1 of the tangent Gram
at theta(t); the final vector theta(T) joins only in inclusive mode. The effective
variant averages only epochs whose parameters (or Grams) moved appreciably since the
last kept epoch, so post-convergence plateaus do not dominate the mean.

Means are accumulated in a fixed epoch order with the running update
mean_k = mean_{k-1} + (G_k - mean_{k-1}) / k, which reproduces a repeated Gram exactly.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, Literal

import numpy as np
from tqdm import tqdm

from qpk.core import ParameterError, ProvenanceError
from qpk.kernels.base import GramMatrix, KernelKind, as_points
from qpk.kernels.tangent import tangent_gram_values
from qpk.models.qnn import as_model
from qpk.utils.funcs import get_logger

if TYPE_CHECKING:
    from qpk.models.base import Predictor
    from qpk.models.qnn import QnnConfig
    from qpk.training.trajectory import ParameterTrajectory

logger = get_logger(__name__)

EPS_MACHINE = np.finfo(np.float64).eps


class RunningMean:
    """Streaming arithmetic mean of equally-shaped arrays."""

    def __init__(self):
        self.count = 0
        self.mean: np.ndarray | None = None

    def add(self, value: np.ndarray) -> None:
        """Folds one more array into the mean."""
        self.count += 1
        if self.mean is None:
            self.mean = np.array(value, dtype=np.float64)
        else:
            self.mean = self.mean + (value - self.mean) / self.count


def epoch_range(traj: ParameterTrajectory, inclusive: bool = False) -> range:
    """Epochs that contribute to a path kernel.

    Raises:
        ProvenanceError: if the trajectory leaves no epoch to average.
    """
    if len(traj) == 0:
        raise ProvenanceError("Cannot build a path kernel from an empty trajectory")

    stop = len(traj) if inclusive else len(traj) - 1
    if stop < 1:
        raise ProvenanceError("Exclusive path kernel needs at least two recorded epochs")
    return range(stop)


def relative_displacement(current: np.ndarray, reference: np.ndarray) -> float:
    """||current - reference|| / max(||reference||, machine epsilon)."""
    return float(np.linalg.norm(current - reference) / max(np.linalg.norm(reference), EPS_MACHINE))


def kept_epochs(traj: ParameterTrajectory, rel_tol: float, inclusive: bool = False) -> list[int]:
    """Epochs retained by the parameter-space suppression criterion.

    Epoch 0 is always kept. A later epoch t is kept when its relative displacement from
    the last kept epoch is at least rel_tol.
    """
    epochs = epoch_range(traj, inclusive)
    kept = [0]
    for t in epochs[1:]:
        if relative_displacement(traj.thetas[t], traj.thetas[kept[-1]]) >= rel_tol:
            kept.append(t)
    return kept


def _prepare(X_rows, X_cols, config):
    model = as_model(config)
    rows, row_ids = as_points(X_rows)
    cols, col_ids = as_points(X_cols)
    return model, rows, None if X_cols is X_rows else cols, row_ids, col_ids


def _provenance(traj: ParameterTrajectory, epochs: list[int], **kwargs) -> dict[str, Any]:
    return {
        "trajectory_hash": traj.hash,
        "dataset_hash": traj.dataset_hash,
        "config_hash": traj.config_hash,
        "seed": traj.seed,
        "epoch_range": [int(epochs[0]), int(epochs[-1])] if epochs else [],
        "num_epochs_averaged": len(epochs),
        **kwargs,
    }


def qpk_gram(
    X_rows: Any,
    X_cols: Any,
    traj: ParameterTrajectory,
    config: QnnConfig | Predictor,
    inclusive: bool = False,
    quiet: bool = True,
) -> GramMatrix:
    """Path kernel: mean of tangent Grams at theta(0), ..., theta(T-1) (or up to theta(T)
    when inclusive).

    Raises:
        ProvenanceError: if the trajectory is empty (or has a single epoch in
            exclusive mode).
    """
    epochs = list(epoch_range(traj, inclusive))
    model, rows, cols, row_ids, col_ids = _prepare(X_rows, X_cols, config)

    acc = RunningMean()
    for t in tqdm(epochs, disable=quiet, desc="QPK"):
        acc.add(tangent_gram_values(model, rows, cols, traj.thetas[t]))

    provenance = _provenance(traj, epochs, inclusive=inclusive)
    return GramMatrix(acc.mean, KernelKind.QPK, row_ids, col_ids, provenance=provenance)  # type: ignore


def effective_qpk_gram(
    X_rows: Any,
    X_cols: Any,
    traj: ParameterTrajectory,
    config: QnnConfig | Predictor,
    rel_tol: float = 1e-6,
    criterion: Literal["parameter", "gram"] = "parameter",
    inclusive: bool = False,
    quiet: bool = True,
) -> GramMatrix:
    """Path kernel restricted to epochs that differ from the previously kept one.

    Args:
        X_rows: Row points.
        X_cols: Column points (the same object as X_rows for a square Gram).
        traj: The recorded training trajectory.
        config: The ansatz shape or a predictor.
        rel_tol: Minimum relative displacement for an epoch to be kept. 0 keeps every
            epoch; infinity keeps only epoch 0.
        criterion: "parameter" compares parameter vectors; "gram" compares the tangent
            Grams themselves (relative Frobenius distance).
        inclusive: Whether theta(T) may contribute.
        quiet: Whether to hide the progress bar.

    Raises:
        ParameterError: if rel_tol is negative or the criterion is unknown.
        ProvenanceError: as qpk_gram.
    """
    if not rel_tol >= 0:
        raise ParameterError(f"rel_tol must be nonnegative, got {rel_tol}")
    if criterion not in ("parameter", "gram"):
        raise ParameterError(f"Unknown suppression criterion: {criterion}")

    model, rows, cols, row_ids, col_ids = _prepare(X_rows, X_cols, config)
    acc = RunningMean()

    if criterion == "parameter":
        kept = kept_epochs(traj, rel_tol, inclusive)
        for t in tqdm(kept, disable=quiet, desc="Effective QPK"):
            acc.add(tangent_gram_values(model, rows, cols, traj.thetas[t]))
    else:
        kept = []
        last = None
        for t in tqdm(epoch_range(traj, inclusive), disable=quiet, desc="Effective QPK"):
            G = tangent_gram_values(model, rows, cols, traj.thetas[t])
            if last is None or relative_displacement(G, last) >= rel_tol:
                kept.append(t)
                acc.add(G)
                last = G

    logger.debug(f"Effective QPK kept {len(kept)} of {len(epoch_range(traj, inclusive))} epochs")

    provenance = _provenance(traj, kept, rel_tol=rel_tol, criterion=criterion, inclusive=inclusive)
    provenance["kept_epochs"] = kept
    return GramMatrix(acc.mean, KernelKind.EFFECTIVE_QPK, row_ids, col_ids, provenance=provenance)  # type: ignore
