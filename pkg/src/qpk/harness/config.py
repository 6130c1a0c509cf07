"""Validated experiment configuration with a stable content hash."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from qpk.baselines.classical import POINTS_PER_DIM
from qpk.core import InputError, ParameterError
from qpk.datasets.xor import train_size
from qpk.training.losses import LossKind
from qpk.training.optimizers import OptimizerKind
from qpk.utils.funcs import dict_hash

JOBS_ENV_VAR = "QPK_JOBS"


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid")


def _check_split(n: int, train_fraction: float) -> None:
    try:
        train_size(n, train_fraction)
    except ParameterError as err:
        raise ValueError(str(err)) from err


class DatasetSpec(_Spec):
    """Gaussian XOR mixture settings for the path-kernel sweep."""

    d: int = Field(4, ge=1, le=24, description="Feature dimensionality (= number of qubits).")
    d_prime: int = Field(2, ge=1, description="Number of informative coordinates.")
    eps: list[float] = Field([0.1, 1.0], min_length=1, description="Noise levels to sweep.")
    n: int = Field(32, ge=2, description="Points per dataset before splitting.")
    train_fraction: float = Field(0.5, gt=0, lt=1, description="Share of points used for training.")
    noise_mode: Literal["std", "variance"] = Field("std", description="Whether eps is a std or a variance.")

    @model_validator(mode="after")
    def check_dims(self):
        if self.d_prime > self.d:
            raise ValueError(f"d_prime ({self.d_prime}) must not exceed d ({self.d})")
        if any(e < 0 for e in self.eps):
            raise ValueError("Noise levels must be nonnegative")
        _check_split(self.n, self.train_fraction)
        return self


class ModelSpec(_Spec):
    """QNN shape and training settings."""

    layers: list[int] = Field([1, 2, 4, 8], min_length=1, description="Layer counts L to sweep.")
    loss: LossKind = Field(LossKind.MSE, description="Training loss.")
    optimizer: OptimizerKind = Field(OptimizerKind.ADAM, description="Optimizer.")
    lr: float = Field(0.1, gt=0, description="Learning rate.")
    epochs: int = Field(1000, ge=1, description="Full-batch training epochs.")
    ring_mode: Literal["single", "double"] = Field("single", description="ZZ ring construction for d = 2.")

    @model_validator(mode="after")
    def check_layers(self):
        if any(L < 1 for L in self.layers):
            raise ValueError("Layer counts must be at least 1")
        return self


class KernelSpec(_Spec):
    """Path-kernel construction settings."""

    inclusive: bool = Field(False, description="Whether theta(T) contributes to the path kernel.")
    include_effective: bool = Field(True, description="Whether to build the effective path kernel.")
    rel_tol: float = Field(1e-6, ge=0, description="Suppression threshold of the effective path kernel.")
    criterion: Literal["parameter", "gram"] = Field("parameter", description="Suppression criterion.")


class SvmSpec(_Spec):
    """Downstream SVM settings."""

    C: float = Field(1.0, gt=0, description="Box constraint.")
    tol: float = Field(1e-3, gt=0, description="SMO stopping tolerance.")
    max_passes: int = Field(200, ge=1, description="SMO iteration cap in sweeps of n updates.")


class BaselineSpec(_Spec):
    """Classical network versus random-feature comparison settings."""

    dims: list[int] = Field([4, 12, 24], min_length=1, description="Dimensionalities to compare.")
    d_prime: int = Field(3, ge=1, description="Informative coordinates.")
    eps: list[float] = Field([0.0, 0.5, 1.0], min_length=1, description="Noise levels.")
    repeats: int = Field(5, ge=1, description="Datasets per (d, eps).")
    pool_size: int = Field(10, ge=1, description="Networks and feature maps per dataset.")
    selection: Literal["test", "train"] = Field("test", description="Best-of-pool selection metric.")
    train_fraction: float = Field(0.75, gt=0, lt=1, description="Share of points used for training.")
    epochs: int = Field(1000, ge=1, description="Network training epochs.")
    lr: float = Field(0.001, gt=0, description="Network learning rate.")
    C: float = Field(1.0, gt=0, description="Random-feature SVM box constraint.")
    w1_d: int = Field(24, ge=2, description="Dimensionality of the W1 shrinkage run.")
    w1_eps: float = Field(0.8, ge=0, description="Noise level of the W1 shrinkage run.")
    w1_n: int = Field(384, ge=1, description="Dataset size of the W1 shrinkage run.")
    w1_snapshots: list[int] = Field([0, 250, 750], description="Epochs whose W1 is saved as CSV.")

    @model_validator(mode="after")
    def check_dims(self):
        if any(d < self.d_prime for d in self.dims) or self.w1_d <= self.d_prime:
            raise ValueError(f"All dimensionalities must be at least d_prime ({self.d_prime})")
        for d in self.dims:
            _check_split(POINTS_PER_DIM * d, self.train_fraction)
        return self


class ExperimentConfig(_Spec):
    """Full description of a path-kernel experiment.

    Everything except `out` and `jobs` enters the config hash, so results computed with
    any degree of parallelism or output location share the same provenance.
    """

    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    model: ModelSpec = Field(default_factory=ModelSpec)
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    svm: SvmSpec = Field(default_factory=SvmSpec)
    baseline: BaselineSpec = Field(default_factory=BaselineSpec)
    seeds: list[int] = Field([0, 1, 2], min_length=1, description="Seeds per (eps, L) cell.")
    out: str = Field("out", description="Root output directory.")
    jobs: Optional[int] = Field(None, ge=1, description=f"Parallelism; defaults to ${JOBS_ENV_VAR} or 1.")

    @property
    def hash(self) -> str:
        """First 12 hex digits of the SHA-256 of the canonical JSON (excluding out/jobs)."""
        return dict_hash(self.model_dump(mode="json", exclude={"out", "jobs"}))

    @property
    def run_dir(self) -> Path:
        """out/<config-hash>."""
        return Path(self.out) / self.hash

    def resolved_jobs(self) -> int:
        """Parallelism from the config, else the QPK_JOBS environment variable, else 1."""
        if self.jobs is not None:
            return self.jobs
        env = os.environ.get(JOBS_ENV_VAR)
        if env is None or env == "":
            return 1
        try:
            return max(int(env), 1)
        except ValueError:
            raise InputError(f"{JOBS_ENV_VAR} must be an integer, got {env!r}")

    def to_json(self, path: str | Path) -> None:
        """Writes the configuration as indented JSON."""
        Path(path).write_text(self.model_dump_json(indent=2))

    @classmethod
    def from_json(cls, path: str | Path) -> ExperimentConfig:
        """Loads and validates a JSON configuration file.

        Raises:
            InputError: if the file is missing or invalid.
        """
        path = Path(path)
        if not path.is_file():
            raise InputError(f"Config file not found: {path}")
        try:
            return cls.model_validate_json(path.read_text())
        except ValidationError as err:
            raise InputError(f"Invalid config file {path}: {err}")


def config_schema() -> dict:
    """JSON schema of ExperimentConfig."""
    return ExperimentConfig.model_json_schema()
