"""Dense symmetric eigendecomposition by cyclic Jacobi rotations.

Intended for the small matrices this package produces (landmark kernels up
to ~64x64, patch covariances up to ~150x150). The decomposition is fully
deterministic: fixed rotation order, threshold convergence at
1e-12 * max|A| (or 100 sweeps), eigenpairs sorted by descending eigenvalue,
and a fixed sign convention so downstream results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

MAX_SWEEPS = 100
OFFDIAG_TOL = 1e-12


@dataclass(frozen=True)
class SymMatrix:
    """Square symmetric matrix; symmetrized as (M + M^T)/2 at construction."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ValueError("SymMatrix requires a non-empty square matrix")
        if not np.all(np.isfinite(arr)):
            raise ValueError("SymMatrix entries must be finite")
        arr = np.ascontiguousarray((arr + arr.T) / 2.0)
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def order(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending; orthonormal eigenvectors as columns."""

    values: np.ndarray   # (k,)
    vectors: np.ndarray  # (k, k), column j pairs with values[j]

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        vectors = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float64))
        values.flags.writeable = False
        vectors.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "vectors", vectors)


@njit(cache=True)
def _jacobi_sweeps(a, v, tol, max_sweeps):  # pragma: no cover - via jacobi_eig
    # v holds eigenvector candidates as ROWS while iterating (contiguous
    # updates); the caller transposes to columns afterwards.
    k = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(k - 1):
            for q in range(p + 1, k):
                mag = abs(a[p, q])
                if mag > off:
                    off = mag
        if off <= tol:
            return sweep
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = a[p, q]
                if abs(apq) <= tol:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for i in range(k):
                    aip = a[p, i]
                    aiq = a[q, i]
                    a[p, i] = c * aip - s * aiq
                    a[q, i] = s * aip + c * aiq
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for i in range(k):
                    if i != p and i != q:
                        a[i, p] = a[p, i]
                        a[i, q] = a[q, i]
                for i in range(k):
                    vip = v[p, i]
                    viq = v[q, i]
                    v[p, i] = c * vip - s * viq
                    v[q, i] = s * vip + c * viq
    return max_sweeps


def jacobi_eig(matrix: SymMatrix) -> EigenSystem:
    """Eigendecompose a symmetric matrix with cyclic Jacobi rotations.

    Sweeps run until max off-diagonal < 1e-12 * max|A| or 100 sweeps.
    Sign convention: in each eigenvector, the entry of largest magnitude
    (earliest index on ties) is made non-negative.
    """
    a = matrix.entries.copy()
    k = matrix.order
    v = np.eye(k)
    tol = OFFDIAG_TOL * np.abs(a).max()
    _jacobi_sweeps(a, v, tol, MAX_SWEEPS)
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = v.T[:, order]
    lead = vectors[np.argmax(np.abs(vectors), axis=0), np.arange(k)]
    vectors = vectors * np.where(lead < 0.0, -1.0, 1.0)
    return EigenSystem(values=values, vectors=vectors)
