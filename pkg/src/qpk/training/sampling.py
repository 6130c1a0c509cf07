"""Seeded random sampling used for parameter initialization and dataset generation.

All randomness flows from numpy's counter-based Philox bit generator. Gaussian variates
are produced with the Box-Muller transform on Philox uniforms so that streams can be
reproduced by any implementation of the same algorithm:

    u = Generator(Philox(seed)).random(2 * m)      # 53-bit doubles in [0, 1)
    u1, u2 = 1 - u[0::2], u[1::2]                  # u1 in (0, 1]
    r = sqrt(-2 ln u1)
    z[0::2], z[1::2] = r cos(2 pi u2), r sin(2 pi u2)

and the first ``size`` values of z are returned.
"""

from __future__ import annotations

import numpy as np

from qpk.core import ShapeError


def uniform(seed: int, size: int) -> np.ndarray:
    """Uniform doubles in [0, 1) from a Philox stream keyed by seed."""
    return np.random.Generator(np.random.Philox(seed)).random(size)


def standard_normal(seed: int, size: int) -> np.ndarray:
    """Standard normal variates via Box-Muller (see module docstring)."""
    m = (size + 1) // 2
    u = uniform(seed, 2 * m)
    u1 = 1.0 - u[0::2]
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * m, dtype=np.float64)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return z[:size]


def random_signs(seed: int, size: int) -> np.ndarray:
    """Uniform draws from {-1, +1}."""
    return np.where(uniform(seed, size) < 0.5, -1.0, 1.0)


def permutation(seed: int, n: int) -> np.ndarray:
    """Random permutation of range(n) from a Philox stream."""
    return np.random.Generator(np.random.Philox(seed)).permutation(n)


def init_params(length: int, seed: int) -> np.ndarray:
    """I.i.d. N(0, 1) parameter vector, deterministic per seed.

    Raises:
        ShapeError: if length < 1.
    """
    if length < 1:
        raise ShapeError(f"Parameter vector length must be at least 1, got {length}")
    return standard_normal(seed, length)
