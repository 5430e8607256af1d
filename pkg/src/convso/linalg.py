"""Symmetric eigensolver contract (Jacobi) and a LAPACK fast path for batches."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns, matching eigenvalues
    gap: float  # lambda_1 - lambda_2 (inf for 1x1)
    sweeps: int = 0

    @property
    def top(self):
        return float(self.eigenvalues[0])

    @property
    def top_vector(self):
        return self.eigenvectors[:, 0]


def _gap(vals):
    return float(vals[0] - vals[1]) if len(vals) > 1 else float("inf")


def symmetric_eig(m, tol=1e-15, max_sweeps=100) -> EigenResult:
    """Deterministic full eigendecomposition via cyclic Jacobi.

    The input is symmetrized; ties in the descending sort keep diagonal order.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    sym = np.ascontiguousarray(0.5 * (m + m.T))
    vals, vecs, sweeps = kernels.jacobi_eigh(sym, tol, max_sweeps)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    return EigenResult(vals, vecs[:, order], _gap(vals), int(sweeps))


def eigh_descending(m) -> EigenResult:
    """LAPACK path with the same result layout, for bulk checks."""
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    vals, vecs = np.linalg.eigh(0.5 * (m + m.T))
    vals = vals[::-1]
    return EigenResult(vals, vecs[:, ::-1], _gap(vals))


def lambda_max(m):
    """Largest eigenvalue of a symmetric matrix or of each matrix in a stack."""
    m = np.asarray(m, dtype=float)
    return np.linalg.eigvalsh(m)[..., -1]


def lambda_min(m):
    m = np.asarray(m, dtype=float)
    return np.linalg.eigvalsh(m)[..., 0]


def project_psd(m):
    """Frobenius-nearest PSD matrix, via the Jacobi contract."""
    res = symmetric_eig(m)
    w = np.maximum(res.eigenvalues, 0.0)
    v = res.eigenvectors
    return (v * w) @ v.T
