"""Core definition for the task documents produced by the path-kernel jobs."""

from typing import Any, Optional

from pydantic import BaseModel, Field

from qpk.classifiers.svm import SvmModel
from qpk.datasets.xor import LabeledDataset
from qpk.kernels.base import GramMatrix
from qpk.training.trajectory import ParameterTrajectory
from qpk.utils.funcs import datetime_str


class DatasetTaskDocument(BaseModel):
    """A generated Gaussian XOR dataset and its train/test split."""

    task_label: Optional[str] = Field(None, description="The name of the task.")
    last_updated: str = Field(
        default_factory=datetime_str,
        description="Timestamp of when the document was last updated.",
    )
    dataset: LabeledDataset = Field(description="The full generated dataset.")
    train: LabeledDataset = Field(description="The training split.")
    test: LabeledDataset = Field(description="The test split.")
    dataset_hash: str = Field(description="Content hash of the full dataset.")
    eps: float = Field(description="The noise level.")
    seed: int = Field(description="The seed the dataset and split were derived from.")
    oracle_accuracy: Optional[float] = Field(None, description="Accuracy of the parity oracle on the full dataset.")


class TrainTaskDocument(BaseModel):
    """A recorded QNN training trajectory."""

    task_label: Optional[str] = Field(None, description="The name of the task.")
    last_updated: str = Field(
        default_factory=datetime_str,
        description="Timestamp of when the document was last updated.",
    )
    trajectory: ParameterTrajectory = Field(description="Parameters and losses at every epoch 0..T.")
    L: int = Field(description="Number of QNN layers.")
    d: int = Field(description="Number of qubits.")
    final_loss: float = Field(description="Training loss at the last epoch.")
    param_deviation: float = Field(description="Relative distance of the final parameters from initialization.")
    trajectory_hash: str = Field(description="Content hash of the trajectory.")


class KernelTaskDocument(BaseModel):
    """Train and test Gram matrices of every kernel built from one trajectory."""

    task_label: Optional[str] = Field(None, description="The name of the task.")
    last_updated: str = Field(
        default_factory=datetime_str,
        description="Timestamp of when the document was last updated.",
    )
    train_grams: dict[str, GramMatrix] = Field(description="Square training Grams keyed by kernel name.")
    test_grams: dict[str, GramMatrix] = Field(description="Test-by-train Grams keyed by kernel name.")
    psd: dict[str, dict[str, float]] = Field(
        default_factory=dict, description="Eigenvalue and symmetry diagnostics of each training Gram."
    )
    mercer: dict[str, bool] = Field(default_factory=dict, description="Whether each training Gram passed the check.")
    trajectory_hash: Optional[str] = Field(None, description="Content hash of the source trajectory.")


class SvmTaskDocument(BaseModel):
    """Fitted SVMs and their accuracies for every kernel of a cell."""

    task_label: Optional[str] = Field(None, description="The name of the task.")
    last_updated: str = Field(
        default_factory=datetime_str,
        description="Timestamp of when the document was last updated.",
    )
    models: dict[str, SvmModel] = Field(description="Fitted SVMs keyed by kernel name.")
    metrics: list[dict[str, Any]] = Field(description="One row of train/test accuracy per kernel.")
