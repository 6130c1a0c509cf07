"""Positive-semidefiniteness checks for square Gram matrices."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh

from qpk.core import ShapeError
from qpk.kernels.base import GramMatrix

SYMMETRY_TOL = 1e-10
EIGENVALUE_RTOL = 1e-8


class PsdReport(NamedTuple):
    """Spectrum extremes and asymmetry of a square matrix."""

    min_eigenvalue: float
    max_eigenvalue: float
    symmetric_defect: float


def psd_report(gram: GramMatrix | np.ndarray) -> PsdReport:
    """Extreme eigenvalues of (G + G^T) / 2 and the defect max |G - G^T|.

    Raises:
        ShapeError: if the matrix is not square.
    """
    G = np.asarray(gram, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ShapeError(f"PSD report requires a square matrix, got shape {G.shape}")

    eigvals = eigh((G + G.T) / 2.0, eigvals_only=True)
    return PsdReport(float(eigvals[0]), float(eigvals[-1]), float(np.max(np.abs(G - G.T))))


def is_mercer(
    gram: GramMatrix | np.ndarray,
    symmetry_tol: float = SYMMETRY_TOL,
    eigenvalue_rtol: float = EIGENVALUE_RTOL,
) -> bool:
    """Whether the matrix is symmetric within symmetry_tol and its smallest eigenvalue is
    at least -eigenvalue_rtol times its largest.
    """
    report = psd_report(gram)
    return (
        report.symmetric_defect < symmetry_tol
        and report.min_eigenvalue >= -eigenvalue_rtol * max(report.max_eigenvalue, 0.0)
    )
