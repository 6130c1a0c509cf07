"""On-disk layout of a run directory and provenance checks between stages.

    out/<config-hash>/
        config.json
        data/   eps<eps>_seed<seed>_{full,train,test}.csv (+ .json sidecars)
        traj/   eps<eps>_L<L>_seed<seed>.csv (+ .json)
        gram/   eps<eps>_L<L>_seed<seed>_<kernel>_{train,test}.csv (+ .json)
        svm/    eps<eps>_L<L>_seed<seed>_<kernel>.json, eps<eps>_L<L>_seed<seed>_metrics.csv
        report/ metrics.csv, failures.csv, summary.csv, curves and figures
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from qpk.core import ProvenanceError

CSV_FLOAT_FORMAT = "%.17g"

SUBDIRS = ("data", "traj", "gram", "svm", "report")


def data_key(eps: float, seed: int) -> str:
    """File stem shared by the datasets of one (eps, seed) pair."""
    return f"eps{eps:g}_seed{seed}"


def cell_key(eps: float, L: int, seed: int) -> str:
    """File stem shared by the artifacts of one (eps, L, seed) cell."""
    return f"eps{eps:g}_L{L}_seed{seed}"


@dataclass(frozen=True)
class RunLayout:
    """Paths of every artifact below a run directory."""

    root: Path

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root))

    def subdir(self, name: str) -> Path:
        """One of data, traj, gram, svm or report."""
        return self.root / name

    def create(self) -> None:
        """Creates the run directory and its subdirectories."""
        for name in SUBDIRS:
            self.subdir(name).mkdir(parents=True, exist_ok=True)

    @property
    def config_path(self) -> Path:
        """The configuration copy stored with the run."""
        return self.root / "config.json"

    def dataset_path(self, eps: float, seed: int, part: str) -> Path:
        """part is one of full, train or test."""
        return self.subdir("data") / f"{data_key(eps, seed)}_{part}.csv"

    def trajectory_path(self, eps: float, L: int, seed: int) -> Path:
        """Trajectory CSV of one cell."""
        return self.subdir("traj") / f"{cell_key(eps, L, seed)}.csv"

    def gram_path(self, eps: float, L: int, seed: int, kernel: str, part: str) -> Path:
        """part is train (square) or test (test x train)."""
        return self.subdir("gram") / f"{cell_key(eps, L, seed)}_{kernel}_{part}.csv"

    def svm_path(self, eps: float, L: int, seed: int, kernel: str) -> Path:
        """Trained SVM model of one cell and kernel."""
        return self.subdir("svm") / f"{cell_key(eps, L, seed)}_{kernel}.json"

    def cell_metrics_path(self, eps: float, L: int, seed: int) -> Path:
        """Metrics rows of one cell, assembled into report/metrics.csv at the end."""
        return self.subdir("svm") / f"{cell_key(eps, L, seed)}_metrics.csv"

    @property
    def metrics_path(self) -> Path:
        """The assembled metrics table."""
        return self.subdir("report") / "metrics.csv"

    @property
    def failures_path(self) -> Path:
        """The per-cell failure ledger."""
        return self.subdir("report") / "failures.csv"


def write_csv(df: pd.DataFrame, path: str | Path) -> None:
    """Writes a table with 17 significant digits and no index."""
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)


def read_csv(path: str | Path) -> pd.DataFrame:
    """Reads a table written by write_csv() without losing float precision."""
    return pd.read_csv(path, float_precision="round_trip")


def check_provenance(found: str | None, expected: str, what: str) -> None:
    """Raises ProvenanceError when an artifact's recorded hash differs from the expected one."""
    if found != expected:
        raise ProvenanceError(f"{what} was produced under hash {found}, expected {expected}")
