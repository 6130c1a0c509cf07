"""Random ReLU feature kernel k(x, x') = <relu(W x), relu(W x')> with a fixed Gaussian W."""

from __future__ import annotations

import math
from typing import Any

import numpy as np
from monty.json import MSONable

from qpk.core import ShapeError
from qpk.kernels.base import GramMatrix, KernelKind, as_points
from qpk.models.mlp import mlp_param_count
from qpk.training.sampling import standard_normal


def rf_feature_count(d: int, h: int) -> int:
    """Smallest f with f * d at least the parameter count of the (d, h) ReLU network,
    i.e. ceil((d*h + h^2 + h + 2h + 1) / d).
    """
    return math.ceil(mlp_param_count(d, h) / d)


class RandomFeatureMap(MSONable):
    """Fixed random projection W of shape (f, d) followed by a ReLU."""

    def __init__(self, W: np.ndarray | list, seed: int | None = None):
        """
        Args:
            W: Projection matrix of shape (f, d).
            seed: Seed that produced W, if sampled.
        """
        self.W = np.atleast_2d(np.asarray(W, dtype=np.float64))
        self.seed = seed

    @classmethod
    def sample(cls, d: int, f: int, seed: int) -> RandomFeatureMap:
        """Draws W with i.i.d. N(0, 1) entries."""
        return cls(standard_normal(seed, f * d).reshape(f, d), seed=seed)

    @property
    def f(self) -> int:
        """Number of random features."""
        return self.W.shape[0]

    @property
    def d(self) -> int:
        """Input dimensionality."""
        return self.W.shape[1]

    def features(self, X: np.ndarray) -> np.ndarray:
        """relu(W x) for every row of X, shape (n, f)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.d:
            raise ShapeError(f"Feature map expects inputs of length {self.d}, got {X.shape[1]}")
        return np.maximum(X @ self.W.T, 0.0)

    def as_dict(self) -> dict:
        """Returns MSONable dict for serialization. See monty package for more
        information.
        """
        return {
            "@module": self.__class__.__module__,
            "@class": self.__class__.__name__,
            "W": self.W.tolist(),
            "seed": self.seed,
        }


def rf_gram(X_rows: Any, X_cols: Any, feature_map: RandomFeatureMap) -> GramMatrix:
    """Gram matrix of inner products of random ReLU features.

    Raises:
        ShapeError: if the points do not match the map's input dimensionality.
    """
    rows, row_ids = as_points(X_rows)
    cols, col_ids = as_points(X_cols)

    F_rows = feature_map.features(rows)
    if X_cols is X_rows:
        G = F_rows @ F_rows.T
        values = (G + G.T) / 2.0
    else:
        values = F_rows @ feature_map.features(cols).T

    provenance = {"seed": feature_map.seed, "f": feature_map.f}
    return GramMatrix(values, KernelKind.RF, row_ids, col_ids, provenance=provenance)
