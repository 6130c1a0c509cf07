"""Basic definitions for Gram matrices and the kernels that produce them."""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from monty.json import MSONable
from monty.serialization import dumpfn, loadfn

from qpk.core import InputError, ShapeError
from qpk.utils.funcs import array_hash

CSV_FLOAT_FORMAT = "%.17g"


class KernelKind(str, Enum):
    """Kernel families that produce Gram matrices."""

    QNTK = "QNTK"
    QPK = "QPK"
    EFFECTIVE_QPK = "EFFECTIVE_QPK"
    RF = "RF"


class GramMatrix(MSONable):
    """A matrix of kernel evaluations k(x_i, x'_j) together with the identifiers of the
    row and column points and a provenance record describing how it was produced.
    """

    def __init__(
        self,
        values: np.ndarray | list,
        kind: KernelKind | str,
        row_ids: list[int] | np.ndarray | None = None,
        col_ids: list[int] | np.ndarray | None = None,
        provenance: dict[str, Any] | None = None,
    ):
        """
        Args:
            values: Real matrix of shape (n, m).
            kind: The kernel family.
            row_ids: Identifiers of the n row points. Defaults to 0..n-1.
            col_ids: Identifiers of the m column points. Defaults to 0..m-1.
            provenance: Metadata such as the trajectory hash, seed and epoch range.

        Raises:
            ShapeError: if values is not 2D or the identifiers do not match its shape.
            InputError: if any entry is not finite.
        """
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeError(f"Gram values must be a 2D matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InputError("Gram matrix entries must all be finite")

        n, m = values.shape
        self.values = values
        self.kind = KernelKind(kind)
        self.row_ids = [int(i) for i in (range(n) if row_ids is None else row_ids)]
        self.col_ids = [int(i) for i in (range(m) if col_ids is None else col_ids)]
        self.provenance = provenance or {}

        if len(self.row_ids) != n or len(self.col_ids) != m:
            raise ShapeError(
                f"Identifier counts ({len(self.row_ids)}, {len(self.col_ids)}) do not match Gram shape {values.shape}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        """(n_rows, n_cols)."""
        return self.values.shape  # type: ignore

    @property
    def is_square(self) -> bool:
        """Whether rows and columns refer to the same points (a training Gram)."""
        return self.row_ids == self.col_ids

    @property
    def hash(self) -> str:
        """Content hash of the values."""
        return array_hash(self.values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def to_dataframe(self) -> pd.DataFrame:
        """Values with the column identifiers as header and the row identifiers as index."""
        df = pd.DataFrame(self.values, columns=[str(i) for i in self.col_ids], index=self.row_ids)
        df.index.name = "row_id"
        return df

    def metadata(self) -> dict[str, Any]:
        """Sidecar metadata stored next to the CSV."""
        return {"kind": self.kind.value, "provenance": self.provenance, "gram_hash": self.hash}

    def to_csv(self, path: str | Path) -> None:
        """Writes the values as CSV and a JSON sidecar with the same stem."""
        path = Path(path)
        self.to_dataframe().to_csv(path, float_format=CSV_FLOAT_FORMAT)
        dumpfn(self.metadata(), path.with_suffix(".json"), indent=2)

    @classmethod
    def from_csv(cls, path: str | Path) -> GramMatrix:
        """Reads a Gram matrix written by to_csv()."""
        path = Path(path)
        df = pd.read_csv(path, index_col="row_id", float_precision="round_trip")
        meta = loadfn(path.with_suffix(".json"))
        return cls(
            values=df.to_numpy(dtype=np.float64),
            kind=meta["kind"],
            row_ids=df.index.to_list(),
            col_ids=[int(c) for c in df.columns],
            provenance=meta.get("provenance"),
        )

    def as_dict(self) -> dict:
        """Returns MSONable dict for serialization. See monty package for more
        information.
        """
        return {
            "@module": self.__class__.__module__,
            "@class": self.__class__.__name__,
            "values": self.values.tolist(),
            "kind": self.kind.value,
            "row_ids": self.row_ids,
            "col_ids": self.col_ids,
            "provenance": self.provenance,
        }

    def __repr__(self) -> str:
        return f"GramMatrix({self.kind.value}, shape={self.shape})"


def as_points(X: Any) -> tuple[np.ndarray, list[int]]:
    """Extracts a 2D point array and point identifiers from a dataset or an array."""
    if hasattr(X, "points"):
        return X.points, list(X.ids)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return X, list(range(len(X)))
