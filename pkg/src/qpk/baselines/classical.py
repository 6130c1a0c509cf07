"""Feature learning versus random features on the Gaussian XOR mixture.

Each comparison cell draws D(d, 3, eps, 16 d), splits it 75/25 and reports the oracle,
the best of a pool of independently initialized ReLU networks and the best of a pool of
random-feature SVMs. The W1 shrinkage analysis checks that the network suppresses the
weights attached to the zero-valued coordinates.
"""

from __future__ import annotations

from pathlib import Path
from typing import Literal, NamedTuple

import numpy as np
import pandas as pd

from qpk.classifiers.svm import accuracy, svm_predict, svm_train
from qpk.core import ParameterError, ShapeError, TrainingDivergedError
from qpk.datasets.xor import LabeledDataset, generate, oracle_accuracy, split
from qpk.kernels.random_features import RandomFeatureMap, rf_feature_count, rf_gram
from qpk.models.mlp import DEFAULT_ALPHA, MlpParams, MlpPredictor, hidden_size, mlp_forward_batch
from qpk.training.losses import loss
from qpk.training.trainer import TrainConfig, train
from qpk.training.trajectory import ParameterTrajectory
from qpk.utils.funcs import derive_seed, get_logger
from qpk.utils.ray import parallel_map

logger = get_logger(__name__)

COMPARISON_COLUMNS = ["d", "eps", "repeat", "oracle_acc", "nn_acc", "rf_acc"]
POINTS_PER_DIM = 16


class MlpRun(NamedTuple):
    """Result of training one ReLU network."""

    initial: MlpParams
    params: MlpParams
    losses: np.ndarray
    trajectory: ParameterTrajectory

    def snapshot(self, epoch: int) -> MlpParams:
        """Network parameters after the given number of epochs."""
        return MlpParams.from_vector(self.trajectory.thetas[epoch], self.initial.d, self.initial.h)


class W1Shrinkage(NamedTuple):
    """Mean absolute first-layer weights on informative and zero-valued coordinates."""

    signal_before: float
    signal_after: float
    junk_before: float
    junk_after: float
    ratio_change: float

    @property
    def signal_mean_abs(self) -> tuple[float, float]:
        """(before, after) mean |W1| over informative columns."""
        return self.signal_before, self.signal_after

    @property
    def junk_mean_abs(self) -> tuple[float, float]:
        """(before, after) mean |W1| over zero-valued columns."""
        return self.junk_before, self.junk_after


def mlp_train(
    ds: LabeledDataset,
    seed: int,
    epochs: int = 1000,
    lr: float = 0.001,
    hidden: int | None = None,
    alpha: float = DEFAULT_ALPHA,
) -> MlpRun:
    """Full-batch ADAM on the MSE between network output and +/-1 labels.

    Weights start i.i.d. N(0, 1) and biases at zero. With lr = 0 the parameters stay at
    their initialization.

    Raises:
        ShapeError: if the dataset is empty.
        ParameterError: if lr is negative.
        TrainingDivergedError: on non-finite values; carries the partial trajectory.
    """
    if ds.n == 0:
        raise ShapeError("Cannot train on an empty dataset")
    if lr < 0:
        raise ParameterError(f"Learning rate must be nonnegative, got {lr}")

    model = MlpPredictor(ds.d, hidden, alpha)
    theta0 = model.initial_parameters(seed)
    initial = model.unflatten(theta0)

    if lr == 0:
        value = loss(model.predict_batch(ds.points, theta0), ds.labels) + model.penalty(theta0)
        frozen = ParameterTrajectory(np.tile(theta0, (epochs + 1, 1)), np.full(epochs + 1, value), seed=seed)
        return MlpRun(initial, initial, frozen.losses, frozen)

    traj = train(ds, model, TrainConfig(optimizer="ADAM", lr=lr, epochs=epochs, loss="MSE", seed=seed))
    return MlpRun(initial, model.unflatten(traj.final), traj.losses, traj)


def mlp_accuracy(params: MlpParams, ds: LabeledDataset) -> float:
    """Accuracy of sign(f(x)) with sign(0) = +1."""
    preds = np.where(mlp_forward_batch(ds.points, params) >= 0, 1.0, -1.0)
    return accuracy(preds, ds.labels)


def _best(scores: list[tuple[float, float]], selection: str) -> float:
    """Test accuracy of the pool member with the best selection score (first on ties)."""
    valid = [s for s in scores if np.isfinite(s[0])]
    if not valid:
        return float("nan")
    key = 1 if selection == "test" else 0
    return max(valid, key=lambda s: s[key])[1]


def compare_cell(
    d: int,
    eps: float,
    repeat: int,
    seed: int,
    pool_size: int = 10,
    d_prime: int = 3,
    train_fraction: float = 0.75,
    selection: Literal["test", "train"] = "test",
    epochs: int = 1000,
    lr: float = 0.001,
    C: float = 1.0,
) -> dict:
    """One (d, eps, repeat) row of the comparison table."""
    ds = generate(d, d_prime, eps, POINTS_PER_DIM * d, derive_seed(seed, "data", d, eps, repeat))
    train_ds, test_ds = split(ds, train_fraction, derive_seed(seed, "split", d, eps, repeat))

    nn_scores = []
    for k in range(pool_size):
        try:
            run = mlp_train(train_ds, derive_seed(seed, "nn", d, eps, repeat, k), epochs=epochs, lr=lr)
        except TrainingDivergedError as err:
            logger.warning(f"Network {k} diverged for d={d}, eps={eps}, repeat={repeat}: {err}")
            continue
        nn_scores.append((mlp_accuracy(run.params, train_ds), mlp_accuracy(run.params, test_ds)))

    f = rf_feature_count(d, hidden_size(d))
    rf_scores = []
    for k in range(pool_size):
        feature_map = RandomFeatureMap.sample(d, f, derive_seed(seed, "rf", d, eps, repeat, k))
        train_gram = rf_gram(train_ds, train_ds, feature_map)
        model = svm_train(train_gram, train_ds.labels, C=C)
        train_acc = accuracy(svm_predict(model, train_gram), train_ds.labels)
        test_acc = accuracy(svm_predict(model, rf_gram(test_ds, train_ds, feature_map)), test_ds.labels)
        rf_scores.append((train_acc, test_acc))

    return {
        "d": d,
        "eps": float(eps),
        "repeat": repeat,
        "oracle_acc": oracle_accuracy(test_ds, d_prime),
        "nn_acc": _best(nn_scores, selection),
        "rf_acc": _best(rf_scores, selection),
    }


def compare_experiment(
    d: int,
    eps_grid: list[float],
    repeats: int,
    seed: int,
    pool_size: int = 10,
    d_prime: int = 3,
    train_fraction: float = 0.75,
    selection: Literal["test", "train"] = "test",
    epochs: int = 1000,
    lr: float = 0.001,
    C: float = 1.0,
    jobs: int = 1,
    quiet: bool = True,
) -> pd.DataFrame:
    """Oracle, best-of-pool network and best-of-pool random-feature SVM test accuracies.

    Args:
        d: Dimensionality, at least d_prime.
        eps_grid: Noise levels.
        repeats: Independent datasets per noise level.
        seed: Root seed.
        pool_size: Number of networks and of random feature maps per dataset.
        d_prime: Number of informative coordinates.
        train_fraction: Share of each dataset used for training.
        selection: Whether the best pool member is chosen by test or train accuracy.
        epochs: Network training epochs.
        lr: Network learning rate.
        C: SVM box constraint.
        jobs: Degree of parallelism over (eps, repeat) cells.
        quiet: Whether to hide progress bars.

    Returns:
        A DataFrame with columns d, eps, repeat, oracle_acc, nn_acc, rf_acc.
    """
    if d < d_prime:
        raise ParameterError(f"d must be at least {d_prime}, got {d}")
    if selection not in ("test", "train"):
        raise ParameterError(f"Unknown selection metric: {selection}")

    tasks = [
        (d, float(eps), repeat, seed, pool_size, d_prime, train_fraction, selection, epochs, lr, C)
        for eps in eps_grid
        for repeat in range(repeats)
    ]
    logger.info(f"Running {len(tasks)} comparison cells for d={d}")
    rows = parallel_map(compare_cell, tasks, jobs=jobs, desc=f"Baseline d={d}", quiet=quiet)

    return pd.DataFrame(rows, columns=COMPARISON_COLUMNS)


def summarize_comparison(df: pd.DataFrame) -> pd.DataFrame:
    """Mean and sample standard deviation of each accuracy per (d, eps)."""
    summary = df.groupby(["d", "eps"])[["oracle_acc", "nn_acc", "rf_acc"]].agg(["mean", "std"])
    summary.columns = [f"{col}_{stat}" for col, stat in summary.columns]
    return summary.reset_index()


def w1_shrinkage(params_before: MlpParams, params_after: MlpParams, d_prime: int) -> W1Shrinkage:
    """Mean |W1| over informative columns (< d') and junk columns (>= d'), before and
    after training.

    ratio_change is (junk/signal after) / (junk/signal before); NaN when undefined.

    Raises:
        ShapeError: if the two W1 matrices differ in shape.
        ParameterError: if d' is not in 1..d-1.
    """
    W_before, W_after = params_before.W1, params_after.W1
    if W_before.shape != W_after.shape:
        raise ShapeError(f"W1 shapes differ: {W_before.shape} vs {W_after.shape}")
    if not 1 <= d_prime < W_before.shape[1]:
        raise ParameterError(f"Need 1 <= d' < {W_before.shape[1]}, got {d_prime}")

    def means(W):
        A = np.abs(W)
        return float(A[:, :d_prime].mean()), float(A[:, d_prime:].mean())

    sig_b, junk_b = means(W_before)
    sig_a, junk_a = means(W_after)

    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.float64(junk_a) / sig_a / (np.float64(junk_b) / sig_b)

    return W1Shrinkage(sig_b, sig_a, junk_b, junk_a, float(ratio) if np.isfinite(ratio) else float("nan"))


def save_w1_snapshot(params: MlpParams, path: str | Path) -> None:
    """Writes W1 as a CSV matrix with columns w_0, ..., w_{d-1}."""
    df = pd.DataFrame(params.W1, columns=[f"w_{k}" for k in range(params.d)])
    df.to_csv(path, index=False, float_format="%.17g")


def w1_experiment(
    d: int = 24,
    d_prime: int = 3,
    eps: float = 0.8,
    n: int = 384,
    seed: int = 0,
    epochs: int = 1000,
    lr: float = 0.001,
) -> tuple[MlpRun, W1Shrinkage]:
    """Trains one network on D(d, d', eps, n) and measures its W1 shrinkage."""
    ds = generate(d, d_prime, eps, n, derive_seed(seed, "w1-data"))
    run = mlp_train(ds, derive_seed(seed, "w1-nn"), epochs=epochs, lr=lr)
    return run, w1_shrinkage(run.initial, run.params, d_prime)
