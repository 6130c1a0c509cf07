"""Loss functions on +/-1 labels and their derivatives with respect to the predictions."""

from __future__ import annotations

from enum import Enum

import numpy as np

from qpk.core import ShapeError

BCE_CLIP = 1e-7


class LossKind(str, Enum):
    """Supported training losses."""

    MSE = "MSE"
    BCE = "BCE"


def _check(preds: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    preds = np.asarray(preds, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if len(preds) != len(labels):
        raise ShapeError(f"Got {len(preds)} predictions for {len(labels)} labels")
    if len(preds) == 0:
        raise ShapeError("Loss requires at least one prediction")
    return preds, labels


def _bce_probabilities(preds: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    raw = (1.0 + preds) / 2.0
    p = np.clip(raw, BCE_CLIP, 1.0 - BCE_CLIP)
    targets = (labels > 0).astype(np.float64)
    return raw, p, targets


def loss(preds: np.ndarray, labels: np.ndarray, kind: LossKind | str = LossKind.MSE) -> float:
    """Mean loss of predictions against +/-1 labels.

    MSE is mean (pred - label)^2. BCE maps p = (1 + pred) / 2, clipped to
    [1e-7, 1 - 1e-7], label +1 -> 1 and -1 -> 0, and returns the mean cross-entropy.

    Raises:
        ShapeError: on a length mismatch or empty input.
    """
    preds, labels = _check(preds, labels)
    kind = LossKind(kind)

    if kind is LossKind.MSE:
        return float(np.mean((preds - labels) ** 2))

    _, p, targets = _bce_probabilities(preds, labels)
    return float(-np.mean(targets * np.log(p) + (1.0 - targets) * np.log(1.0 - p)))


def loss_gradient(preds: np.ndarray, labels: np.ndarray, kind: LossKind | str = LossKind.MSE) -> np.ndarray:
    """Derivative of loss() with respect to each prediction.

    For BCE the clip is treated as flat, so predictions outside the clipping window
    receive a zero derivative.
    """
    preds, labels = _check(preds, labels)
    kind = LossKind(kind)
    n = len(preds)

    if kind is LossKind.MSE:
        return 2.0 * (preds - labels) / n

    raw, p, targets = _bce_probabilities(preds, labels)
    dp = -(targets / p - (1.0 - targets) / (1.0 - p)) / n
    inside = (raw > BCE_CLIP) & (raw < 1.0 - BCE_CLIP)
    return np.where(inside, dp * 0.5, 0.0)
