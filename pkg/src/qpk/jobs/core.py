"""Core jobs for dataset generation, QNN training, kernel construction and SVM scoring."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

from jobflow import Maker, job

from qpk.datasets.xor import generate, oracle_accuracy, split
from qpk.harness.config import KernelSpec, SvmSpec
from qpk.harness.runner import build_grams, oracle_row, score_kernels
from qpk.jobs.schema import DatasetTaskDocument, KernelTaskDocument, SvmTaskDocument, TrainTaskDocument
from qpk.jobs.utils import model_for
from qpk.training.losses import LossKind
from qpk.training.optimizers import OptimizerKind
from qpk.training.trainer import TrainConfig, param_deviation, train
from qpk.utils.funcs import derive_seed, get_logger

if TYPE_CHECKING:
    from qpk.datasets.xor import LabeledDataset
    from qpk.kernels.base import GramMatrix
    from qpk.training.trajectory import ParameterTrajectory

logger = get_logger(__name__)


@dataclass
class DatasetMaker(Maker):
    """Maker to create a job that generates a Gaussian XOR dataset and splits it into
    train and test sets. The dataset and split seeds are derived from the job's seed,
    so the same seed always reproduces the same split.

    Args:
        name: Name of the job.
        d: Feature dimensionality.
        d_prime: Number of informative coordinates.
        eps: Noise level.
        n: Number of points before splitting.
        train_fraction: Share of points used for training.
        noise_mode: Whether eps is a standard deviation ("std") or a variance.
    """

    name: str = "generate_dataset"
    d: int = 4
    d_prime: int = 2
    eps: float = 0.1
    n: int = 32
    train_fraction: float = 0.5
    noise_mode: Literal["std", "variance"] = "std"

    @job(dataset="datasets", output_schema=DatasetTaskDocument)
    def make(self, seed: int = 0):
        """Returns a job that generates and splits the dataset.

        NOTE: This job stores the full dataset in an additional store called
        "datasets". This needs to be configured through a user's jobflow.yaml file.

        Args:
            seed: Root seed of the dataset and the split.
        """
        ds = generate(self.d, self.d_prime, self.eps, self.n, derive_seed(seed, "data", self.eps), self.noise_mode)
        train_ds, test_ds = split(ds, self.train_fraction, derive_seed(seed, "split", self.eps))

        logger.info(f"Generated {ds!r} with {train_ds.n} training points")

        return DatasetTaskDocument(
            task_label=self.name,
            dataset=ds,
            train=train_ds,
            test=test_ds,
            dataset_hash=ds.hash,
            eps=self.eps,
            seed=seed,
            oracle_accuracy=oracle_accuracy(ds),
        )


@dataclass
class TrainMaker(Maker):
    """Maker to create a job that trains an L-layer QNN on a training set and records
    its full parameter trajectory.

    Args:
        name: Name of the job.
        L: Number of layers.
        ring_mode: ZZ ring construction for two qubits ("single" or "double").
        optimizer: ADAM or GD.
        lr: Learning rate.
        epochs: Number of full-batch updates.
        loss: MSE or BCE.
    """

    name: str = "train_qnn"
    L: int = 1
    ring_mode: Literal["single", "double"] = "single"
    optimizer: OptimizerKind = OptimizerKind.ADAM
    lr: float = 0.1
    epochs: int = 1000
    loss: LossKind = LossKind.MSE

    @job(trajectory="trajectories", output_schema=TrainTaskDocument)
    def make(self, train_ds: LabeledDataset, seed: int = 0):
        """Returns a job that trains the QNN.

        NOTE: This job stores the trajectory in an additional store called
        "trajectories".

        Args:
            train_ds: The training set.
            seed: Root seed; the initialization seed is derived from it and L.
        """
        model = model_for(train_ds.d, self.L, self.ring_mode)
        cfg = TrainConfig(
            optimizer=self.optimizer,
            lr=self.lr,
            epochs=self.epochs,
            loss=self.loss,
            seed=derive_seed(seed, "init", self.L),
        )
        traj = train(train_ds, model, cfg)

        return TrainTaskDocument(
            task_label=self.name,
            trajectory=traj,
            L=self.L,
            d=train_ds.d,
            final_loss=traj.final_loss,
            param_deviation=param_deviation(traj, traj.n_epochs),
            trajectory_hash=traj.hash,
        )


@dataclass
class KernelMaker(Maker):
    """Maker to create a job that builds the QNTK (initial and final), path kernel and
    effective path kernel Grams from a recorded trajectory.

    Args:
        name: Name of the job.
        L: Number of layers of the QNN that produced the trajectory.
        ring_mode: ZZ ring construction for two qubits.
        inclusive: Whether the final epoch contributes to the path kernel.
        include_effective: Whether to build the effective path kernel.
        rel_tol: Suppression threshold of the effective path kernel.
        criterion: "parameter" or "gram" suppression criterion.
    """

    name: str = "build_kernels"
    L: int = 1
    ring_mode: Literal["single", "double"] = "single"
    inclusive: bool = False
    include_effective: bool = True
    rel_tol: float = 1e-6
    criterion: Literal["parameter", "gram"] = "parameter"

    @job(train_grams="grams", test_grams="grams", output_schema=KernelTaskDocument)
    def make(self, train_ds: LabeledDataset, test_ds: LabeledDataset, trajectory: ParameterTrajectory):
        """Returns a job that builds every Gram matrix of one trained QNN.

        NOTE: The Gram matrices are stored in an additional store called "grams".

        Args:
            train_ds: The training set the trajectory was recorded on.
            test_ds: The test set.
            trajectory: The recorded trajectory.
        """
        spec = KernelSpec(
            inclusive=self.inclusive,
            include_effective=self.include_effective,
            rel_tol=self.rel_tol,
            criterion=self.criterion,
        )
        grams = build_grams(train_ds, test_ds, trajectory, model_for(train_ds.d, self.L, self.ring_mode), spec)

        return KernelTaskDocument(
            task_label=self.name,
            train_grams={name: pair[0] for name, pair in grams.items()},
            test_grams={name: pair[1] for name, pair in grams.items()},
            psd={name: pair[0].provenance["psd"] for name, pair in grams.items()},
            mercer={name: pair[0].provenance["mercer"] for name, pair in grams.items()},
            trajectory_hash=trajectory.hash,
        )


@dataclass
class SvmMaker(Maker):
    """Maker to create a job that fits one precomputed-kernel SVM per Gram matrix and
    reports train and test accuracy next to the parity oracle.

    Args:
        name: Name of the job.
        C: Box constraint.
        tol: SMO stopping tolerance.
        max_passes: SMO iteration cap in sweeps of n updates.
    """

    name: str = "fit_svm"
    C: float = 1.0
    tol: float = 1e-3
    max_passes: int = 200

    @job(output_schema=SvmTaskDocument)
    def make(
        self,
        train_grams: dict[str, GramMatrix],
        test_grams: dict[str, GramMatrix],
        train_ds: LabeledDataset,
        test_ds: LabeledDataset,
        d_prime: int | None = None,
    ):
        """Returns a job that fits and scores the SVMs.

        Args:
            train_grams: Square training Grams keyed by kernel name.
            test_grams: Test-by-train Grams keyed by kernel name.
            train_ds: The training set.
            test_ds: The test set.
            d_prime: Informative coordinates for the oracle. Defaults to the value
                stored with the dataset.
        """
        grams = {name: (train_grams[name], test_grams[name]) for name in train_grams}
        scores = score_kernels(grams, train_ds, test_ds, SvmSpec(C=self.C, tol=self.tol, max_passes=self.max_passes))

        metrics = [
            {"kernel": name, "train_acc": train_acc, "test_acc": test_acc}
            for name, (_, train_acc, test_acc) in scores.items()
        ]
        oracle = oracle_row(train_ds, test_ds, d_prime or train_ds.d_prime)
        metrics.append({k: oracle[k] for k in ("kernel", "train_acc", "test_acc")})

        return SvmTaskDocument(
            task_label=self.name,
            models={name: model for name, (model, _, _) in scores.items()},
            metrics=metrics,
        )
