"""Full-batch training loop that records the complete parameter trajectory."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from monty.json import MSONable
from tqdm import tqdm

from qpk.core import DegenerateInitializationError, ParameterError, ShapeError, TrainingDivergedError
from qpk.training.losses import LossKind, loss, loss_gradient
from qpk.training.optimizers import OptimizerKind, get_optimizer
from qpk.training.trajectory import ParameterTrajectory
from qpk.utils.funcs import get_logger

if TYPE_CHECKING:
    from qpk.datasets.xor import LabeledDataset
    from qpk.models.base import Predictor

logger = get_logger(__name__)


@dataclass(frozen=True)
class TrainConfig(MSONable):
    """Hyperparameters of a full-batch training run.

    Args:
        optimizer: ADAM or GD.
        lr: Learning rate (ADAM base step size), must be positive.
        epochs: Number of full-batch updates T, at least 1.
        loss: MSE or BCE.
        seed: Seed for the parameter initialization.
    """

    optimizer: OptimizerKind = OptimizerKind.ADAM
    lr: float = 0.1
    epochs: int = 1000
    loss: LossKind = LossKind.MSE
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "optimizer", OptimizerKind(self.optimizer))
        object.__setattr__(self, "loss", LossKind(self.loss))
        if self.epochs < 1:
            raise ParameterError(f"epochs must be at least 1, got {self.epochs}")
        if not self.lr > 0:
            raise ParameterError(f"Learning rate must be positive, got {self.lr}")

    def as_dict(self) -> dict:
        """Returns MSONable dict for serialization. See monty package for more
        information.
        """
        return {
            "@module": self.__class__.__module__,
            "@class": self.__class__.__name__,
            "optimizer": self.optimizer.value,
            "lr": self.lr,
            "epochs": self.epochs,
            "loss": self.loss.value,
            "seed": self.seed,
        }


def train(
    dataset: LabeledDataset,
    model: Predictor,
    cfg: TrainConfig,
    theta0: np.ndarray | None = None,
    quiet: bool = True,
) -> ParameterTrajectory:
    """Trains a predictor on the full dataset for cfg.epochs updates.

    The trajectory records theta and the (penalized) loss at every epoch 0..T; its
    length is always cfg.epochs + 1.

    Args:
        dataset: The training set.
        model: Any predictor exposing predict_batch and jacobian.
        cfg: The training configuration.
        theta0: Optional explicit initialization. Defaults to
            model.initial_parameters(cfg.seed).
        quiet: Whether to hide the progress bar.

    Raises:
        ShapeError: if the dataset is empty or does not match the model's input size.
        TrainingDivergedError: on a non-finite loss, gradient or update. The partial trajectory
            (all epochs with finite values) is attached to the exception.
    """
    X, y = dataset.points, dataset.labels
    if len(X) == 0:
        raise ShapeError("Cannot train on an empty dataset")
    if X.shape[1] != model.n_features:
        raise ShapeError(f"Dataset has {X.shape[1]} features but the model expects {model.n_features}")

    theta = model.initial_parameters(cfg.seed) if theta0 is None else np.asarray(theta0, dtype=np.float64)
    optimizer = get_optimizer(cfg.optimizer, cfg.lr)
    optimizer.reset(len(theta))

    thetas: list[np.ndarray] = [theta]
    losses: list[float] = []

    def partial(n: int) -> ParameterTrajectory:
        return _make_trajectory(thetas[:n], losses[:n], cfg, model, dataset, len(theta))

    logger.info(f"Training {model!r} on {len(X)} points for {cfg.epochs} epochs ({cfg.optimizer.value}).")

    for epoch in tqdm(range(cfg.epochs + 1), disable=quiet, desc="Training"):
        preds = model.predict_batch(X, theta)
        value = loss(preds, y, cfg.loss) + model.penalty(theta)
        if not np.isfinite(value):
            raise TrainingDivergedError(f"Non-finite loss at epoch {epoch}", partial(epoch))
        losses.append(value)

        if epoch % 100 == 0:
            logger.debug(f"Epoch {epoch}: loss = {value:.6g}")

        if epoch == cfg.epochs:
            break

        grad = model.jacobian(X, theta).T @ loss_gradient(preds, y, cfg.loss) + model.penalty_gradient(theta)
        if not np.all(np.isfinite(grad)):
            raise TrainingDivergedError(f"Non-finite gradient at epoch {epoch}", partial(epoch + 1))

        theta = optimizer.step(theta, grad)
        if not np.all(np.isfinite(theta)):
            raise TrainingDivergedError(f"Non-finite parameters after epoch {epoch}", partial(epoch + 1))
        thetas.append(theta)

    logger.info(f"Finished training: final loss = {losses[-1]:.6g}")

    return _make_trajectory(thetas, losses, cfg, model, dataset, len(theta))


def _make_trajectory(thetas, losses, cfg, model, dataset, n_params) -> ParameterTrajectory:
    arr = np.array(thetas, dtype=np.float64) if thetas else np.empty((0, n_params))
    return ParameterTrajectory(
        thetas=arr,
        losses=losses,
        seed=cfg.seed,
        config={"train": cfg.as_dict(), "model": model.as_dict()},
        dataset_hash=getattr(dataset, "hash", None),
    )


def param_deviation(traj: ParameterTrajectory, n: int) -> float:
    """Relative distance travelled from initialization, ||theta(n) - theta(0)|| / ||theta(0)||.

    Raises:
        ParameterError: if n is outside 0..T.
        DegenerateInitializationError: if theta(0) is the zero vector.
    """
    if not 0 <= n < len(traj):
        raise ParameterError(f"Epoch {n} outside the recorded range 0..{len(traj) - 1}")

    norm0 = np.linalg.norm(traj.initial)
    if norm0 == 0:
        raise DegenerateInitializationError("Deviation is undefined for a zero initialization")

    return float(np.linalg.norm(traj.thetas[n] - traj.initial) / norm0)


def deviation_curve(traj: ParameterTrajectory) -> np.ndarray:
    """param_deviation at every recorded epoch."""
    norm0 = np.linalg.norm(traj.initial)
    if norm0 == 0:
        raise DegenerateInitializationError("Deviation is undefined for a zero initialization")

    return np.linalg.norm(traj.thetas - traj.initial, axis=1) / norm0
