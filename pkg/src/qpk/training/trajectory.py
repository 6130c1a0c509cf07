"""The recorded parameter path of one training run."""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from monty.json import MSONable
from monty.serialization import dumpfn, loadfn

from qpk.core import ShapeError
from qpk.utils.funcs import array_hash

CSV_FLOAT_FORMAT = "%.17g"


class ParameterTrajectory(MSONable):
    """Parameter vectors theta(0), ..., theta(T) and the loss at each epoch.

    Index 0 is the initialization and index T the final parameters. A trajectory cut
    short by divergence may hold fewer rows (possibly none).
    """

    def __init__(
        self,
        thetas: np.ndarray | list,
        losses: np.ndarray | list,
        seed: int | None = None,
        config: dict[str, Any] | None = None,
        dataset_hash: str | None = None,
        config_hash: str | None = None,
    ):
        """
        Args:
            thetas: Array of shape (T + 1, P).
            losses: Array of length T + 1.
            seed: The seed that produced thetas[0].
            config: Snapshot of the training configuration (and model) as a dict.
            dataset_hash: Content hash of the training set.
            config_hash: Hash of the experiment configuration that produced the run.
        """
        thetas = np.asarray(thetas, dtype=np.float64)
        losses = np.asarray(losses, dtype=np.float64).ravel()
        if thetas.ndim == 1 and thetas.size == 0:
            thetas = thetas.reshape(0, 0)
        if thetas.ndim != 2:
            raise ShapeError(f"Trajectory parameters must form a 2D array, got shape {thetas.shape}")
        if len(thetas) != len(losses):
            raise ShapeError(f"Got {len(thetas)} parameter vectors but {len(losses)} losses")

        self.thetas = thetas
        self.losses = losses
        self.seed = seed
        self.config = config or {}
        self.dataset_hash = dataset_hash
        self.config_hash = config_hash

    @property
    def n_epochs(self) -> int:
        """Number of completed updates T (one less than the number of recorded vectors)."""
        return max(len(self.thetas) - 1, 0)

    @property
    def n_params(self) -> int:
        """Length of each parameter vector."""
        return self.thetas.shape[1]

    @property
    def initial(self) -> np.ndarray:
        """theta(0)."""
        return self.thetas[0]

    @property
    def final(self) -> np.ndarray:
        """theta(T)."""
        return self.thetas[-1]

    @property
    def final_loss(self) -> float:
        """Loss at the last recorded epoch."""
        return float(self.losses[-1])

    @property
    def hash(self) -> str:
        """Content hash of the parameter vectors and losses."""
        return array_hash(self.thetas, self.losses)

    def __len__(self) -> int:
        return len(self.thetas)

    def to_dataframe(self) -> pd.DataFrame:
        """One row per epoch with columns epoch, loss, theta_0, ..., theta_{P-1}."""
        df = pd.DataFrame(self.thetas, columns=[f"theta_{k}" for k in range(self.n_params)])
        df.insert(0, "loss", self.losses)
        df.insert(0, "epoch", np.arange(len(self)))
        return df

    def metadata(self) -> dict[str, Any]:
        """Sidecar metadata stored next to the CSV."""
        return {
            "seed": self.seed,
            "config": self.config,
            "dataset_hash": self.dataset_hash,
            "config_hash": self.config_hash,
            "trajectory_hash": self.hash,
        }

    def to_csv(self, path: str | Path) -> None:
        """Writes the trajectory CSV and a JSON sidecar with the same stem."""
        path = Path(path)
        self.to_dataframe().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        dumpfn(self.metadata(), path.with_suffix(".json"), indent=2)

    @classmethod
    def from_csv(cls, path: str | Path) -> ParameterTrajectory:
        """Reads a trajectory written by to_csv()."""
        path = Path(path)
        df = pd.read_csv(path, float_precision="round_trip")
        meta = loadfn(path.with_suffix(".json")) if path.with_suffix(".json").exists() else {}

        theta_cols = [c for c in df.columns if c.startswith("theta_")]
        return cls(
            thetas=df[theta_cols].to_numpy(dtype=np.float64),
            losses=df["loss"].to_numpy(dtype=np.float64),
            seed=meta.get("seed"),
            config=meta.get("config"),
            dataset_hash=meta.get("dataset_hash"),
            config_hash=meta.get("config_hash"),
        )

    def as_dict(self) -> dict:
        """Returns MSONable dict for serialization. See monty package for more
        information.
        """
        return {
            "@module": self.__class__.__module__,
            "@class": self.__class__.__name__,
            "thetas": self.thetas.tolist(),
            "losses": self.losses.tolist(),
            "seed": self.seed,
            "config": self.config,
            "dataset_hash": self.dataset_hash,
            "config_hash": self.config_hash,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ParameterTrajectory:
        """Instantiate object from MSONable dict. See monty package for more
        information.
        """
        thetas = np.asarray(d["thetas"], dtype=np.float64)
        if thetas.size == 0:
            thetas = thetas.reshape(0, 0)
        return cls(
            thetas=thetas,
            losses=d["losses"],
            seed=d.get("seed"),
            config=d.get("config"),
            dataset_hash=d.get("dataset_hash"),
            config_hash=d.get("config_hash"),
        )

    def __repr__(self) -> str:
        return f"ParameterTrajectory(T={self.n_epochs}, P={self.n_params}, seed={self.seed})"
