"""Core flows for the quantum-path-kernel package."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from jobflow import Flow, Maker

from qpk.jobs.core import DatasetMaker, KernelMaker, SvmMaker, TrainMaker
from qpk.utils.funcs import get_logger

logger = get_logger(__name__)


@dataclass
class PathKernelFlowMaker(Maker):
    """Maker to create the path-kernel workflow for one (eps, seed) and a list of layer
    counts.

    Steps:
        1)  A Gaussian XOR dataset is generated and split via `DatasetMaker`. The split
            is shared by every layer count.
        2)  For each L, the QNN is trained via `TrainMaker`, which records the full
            parameter trajectory.
        3)  The QNTK (initial and final), path kernel and effective path kernel Grams
            are built from the trajectory via `KernelMaker`.
        4)  One SVM per Gram is fit and scored via `SvmMaker`.

    The flow output maps each L to the metrics of its SVM job.

    Args:
        name: Name of the flow.
        dataset_maker: `DatasetMaker` used to create the dataset job. Automatically
            generated with default settings if not provided.
        train_maker: `TrainMaker` used as a template for the training jobs. Its L is
            replaced by each entry of `layers`.
        kernel_maker: `KernelMaker` used as a template for the kernel jobs.
        svm_maker: `SvmMaker` used to create the SVM jobs.
        layers: The layer counts to sweep.
    """

    name: str = "path_kernel"
    dataset_maker: DatasetMaker = field(default_factory=DatasetMaker)
    train_maker: TrainMaker = field(default_factory=TrainMaker)
    kernel_maker: KernelMaker = field(default_factory=KernelMaker)
    svm_maker: SvmMaker = field(default_factory=SvmMaker)
    layers: list[int] = field(default_factory=lambda: [1, 2, 4, 8])

    def make(self, seed: int = 0):  # type: ignore
        """Returns a flow that trains one QNN per layer count on a shared dataset and
        compares the resulting kernels downstream.

        Args:
            seed: Root seed of the dataset, split and initializations.
        """
        dataset_job = self.dataset_maker.make(seed)
        dataset_job.name = f"{self.dataset_maker.name} (eps={self.dataset_maker.eps:g}, seed={seed})"
        train_ds, test_ds = dataset_job.output.train, dataset_job.output.test

        jobs = [dataset_job]
        output = {}
        for L in self.layers:
            train_job = replace(self.train_maker, L=L).make(train_ds, seed)
            train_job.name = f"{self.train_maker.name} (L={L})"

            kernel_job = replace(self.kernel_maker, L=L, ring_mode=self.train_maker.ring_mode).make(
                train_ds, test_ds, train_job.output.trajectory
            )
            kernel_job.name = f"{self.kernel_maker.name} (L={L})"

            svm_job = self.svm_maker.make(
                kernel_job.output.train_grams, kernel_job.output.test_grams, train_ds, test_ds
            )
            svm_job.name = f"{self.svm_maker.name} (L={L})"

            jobs.extend([train_job, kernel_job, svm_job])
            output[str(L)] = svm_job.output.metrics

        logger.info(f"Created path-kernel flow with {len(jobs)} jobs for layers {self.layers}")

        return Flow(jobs, output=output, name=f"Path kernel: eps={self.dataset_maker.eps:g}, seed={seed}")
