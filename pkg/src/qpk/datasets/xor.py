"""Gaussian XOR mixture: noisy sign vectors labeled by the product of their clean signs.

A point of D(d, d', eps, n) is [s_1 + e_1, ..., s_d' + e_d', 0, ..., 0] with s_i uniform
on {-1, +1}, e_i ~ N(0, sigma) and label prod_i s_i. By default sigma = eps; with
noise_mode="variance", sigma = sqrt(eps).
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import numpy as np
import pandas as pd
from monty.json import MSONable
from monty.serialization import dumpfn, loadfn

from qpk.core import ParameterError, ShapeError
from qpk.training.sampling import permutation, random_signs, standard_normal
from qpk.utils.funcs import array_hash, derive_seed

CSV_FLOAT_FORMAT = "%.17g"


class LabeledDataset(MSONable):
    """Feature vectors with +/-1 labels, point identifiers and generation metadata."""

    def __init__(
        self,
        points: np.ndarray | list,
        labels: np.ndarray | list,
        meta: dict[str, Any] | None = None,
        clean_signs: np.ndarray | list | None = None,
        ids: np.ndarray | list | None = None,
    ):
        """
        Args:
            points: Array of shape (n, d).
            labels: Array of n labels in {-1, +1}.
            meta: Generation metadata (d, d_prime, eps, n, seed, noise_mode).
            clean_signs: The noiseless signs, shape (n, d'), if known.
            ids: Point identifiers. Defaults to 0..n-1.
        """
        self.points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        self.labels = np.asarray(labels, dtype=np.float64).ravel()
        self.meta = meta or {}
        self.clean_signs = None if clean_signs is None else np.asarray(clean_signs, dtype=np.float64)
        self.ids = np.arange(len(self.labels)) if ids is None else np.asarray(ids, dtype=np.int64)

        if len(self.points) != len(self.labels) or len(self.ids) != len(self.labels):
            raise ShapeError(
                f"Inconsistent dataset sizes: {len(self.points)} points, {len(self.labels)} labels, {len(self.ids)} ids"
            )

    @property
    def n(self) -> int:
        """Number of points."""
        return len(self.labels)

    @property
    def d(self) -> int:
        """Feature dimensionality."""
        return self.points.shape[1]

    @property
    def d_prime(self) -> int:
        """Number of informative (nonzero) coordinates."""
        return int(self.meta.get("d_prime", self.d))

    @property
    def hash(self) -> str:
        """Content hash of the points, labels and identifiers."""
        return array_hash(self.points, self.labels, self.ids)

    def __len__(self) -> int:
        return self.n

    def subset(self, indices: np.ndarray | list) -> LabeledDataset:
        """Rows at the given positions, keeping their identifiers."""
        indices = np.asarray(indices, dtype=np.int64)
        signs = None if self.clean_signs is None else self.clean_signs[indices]
        return LabeledDataset(self.points[indices], self.labels[indices], dict(self.meta), signs, self.ids[indices])

    def to_dataframe(self) -> pd.DataFrame:
        """Columns x_0, ..., x_{d-1}, label."""
        df = pd.DataFrame(self.points, columns=[f"x_{k}" for k in range(self.d)])
        df["label"] = self.labels.astype(int)
        return df

    def to_csv(self, path: str | Path) -> None:
        """Writes the points CSV and a JSON sidecar (meta, ids, clean signs)."""
        path = Path(path)
        self.to_dataframe().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        sidecar = {
            "meta": self.meta,
            "ids": self.ids.tolist(),
            "clean_signs": None if self.clean_signs is None else self.clean_signs.tolist(),
            "dataset_hash": self.hash,
        }
        dumpfn(sidecar, path.with_suffix(".json"), indent=2)

    @classmethod
    def from_csv(cls, path: str | Path) -> LabeledDataset:
        """Reads a dataset written by to_csv()."""
        path = Path(path)
        df = pd.read_csv(path, float_precision="round_trip")
        sidecar = loadfn(path.with_suffix(".json"))
        x_cols = [c for c in df.columns if c.startswith("x_")]
        return cls(
            df[x_cols].to_numpy(dtype=np.float64),
            df["label"].to_numpy(dtype=np.float64),
            sidecar.get("meta"),
            sidecar.get("clean_signs"),
            sidecar.get("ids"),
        )

    def as_dict(self) -> dict:
        """Returns MSONable dict for serialization. See monty package for more
        information.
        """
        return {
            "@module": self.__class__.__module__,
            "@class": self.__class__.__name__,
            "points": self.points.tolist(),
            "labels": self.labels.tolist(),
            "meta": self.meta,
            "clean_signs": None if self.clean_signs is None else self.clean_signs.tolist(),
            "ids": self.ids.tolist(),
        }

    def __repr__(self) -> str:
        return f"LabeledDataset(n={self.n}, d={self.d}, meta={self.meta})"


def generate(
    d: int,
    d_prime: int,
    eps: float,
    n: int,
    seed: int,
    noise_mode: Literal["std", "variance"] = "std",
) -> LabeledDataset:
    """Samples D(d, d', eps, n).

    Args:
        d: Total dimensionality (zero-padded).
        d_prime: Number of informative coordinates, 1 <= d' <= d.
        eps: Noise level, read as a standard deviation ("std") or variance ("variance").
        n: Number of points.
        seed: Root seed; signs and noise use independent derived streams.
        noise_mode: Interpretation of eps.

    Raises:
        ParameterError: on out-of-range arguments.
    """
    if not 1 <= d_prime <= d:
        raise ParameterError(f"Need 1 <= d' <= d, got d'={d_prime}, d={d}")
    if not eps >= 0:
        raise ParameterError(f"Noise level must be nonnegative, got {eps}")
    if n < 1:
        raise ParameterError(f"Need at least one point, got n={n}")
    if noise_mode not in ("std", "variance"):
        raise ParameterError(f"Unknown noise mode: {noise_mode}")

    sigma = eps if noise_mode == "std" else np.sqrt(eps)
    signs = random_signs(derive_seed(seed, "signs"), n * d_prime).reshape(n, d_prime)
    noise = standard_normal(derive_seed(seed, "noise"), n * d_prime).reshape(n, d_prime)

    points = np.zeros((n, d))
    points[:, :d_prime] = signs + sigma * noise
    labels = np.prod(signs, axis=1)

    meta = {"d": d, "d_prime": d_prime, "eps": float(eps), "n": n, "seed": seed, "noise_mode": noise_mode}
    return LabeledDataset(points, labels, meta, signs)


def oracle_predict(X: np.ndarray, d_prime: int) -> np.ndarray:
    """Vectorized oracle: sign of the product of the first d' coordinates, sign(0) = +1."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if not 1 <= d_prime <= X.shape[1]:
        raise ParameterError(f"Need 1 <= d' <= {X.shape[1]}, got {d_prime}")

    head = X[:, :d_prime]
    negative = np.sum(head < 0, axis=1) % 2 == 1
    has_zero = np.any(head == 0, axis=1)
    return np.where(negative & ~has_zero, -1.0, 1.0)


def oracle_label(x: np.ndarray, d_prime: int) -> float:
    """Bayes-optimal label of a single point from its observed (noisy) coordinates.

    Raises:
        ParameterError: if d' exceeds the length of x.
    """
    return float(oracle_predict(np.asarray(x, dtype=np.float64)[None, :], d_prime)[0])


def oracle_accuracy(ds: LabeledDataset, d_prime: int | None = None) -> float:
    """Fraction of points whose oracle label equals the true label."""
    preds = oracle_predict(ds.points, ds.d_prime if d_prime is None else d_prime)
    return float(np.mean(preds == ds.labels))


def train_size(n: int, train_fraction: float) -> int:
    """Number of training points a split of n points receives, round(train_fraction * n).

    Raises:
        ParameterError: if the fraction is outside (0, 1) or leaves a side empty.
    """
    if not 0 < train_fraction < 1:
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}")

    n_train = int(round(train_fraction * n))
    if n_train == 0 or n_train == n:
        raise ParameterError(f"A train fraction of {train_fraction} leaves an empty side for n={n}")
    return n_train


def split(ds: LabeledDataset, train_fraction: float, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded shuffle split into disjoint train and test sets.

    The train side has train_size(n, train_fraction) points; both sides keep their original
    order and identifiers.

    Raises:
        ParameterError: if the fraction is outside (0, 1) or leaves a side empty.
    """
    n_train = train_size(ds.n, train_fraction)
    perm = permutation(derive_seed(seed, "split"), ds.n)
    return ds.subset(np.sort(perm[:n_train])), ds.subset(np.sort(perm[n_train:]))
