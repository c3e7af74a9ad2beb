"""Nystrom low-rank approximation of the range-kernel matrix.

Given landmarks z_1..z_m0 and the full list of guide vectors r_1..r_m,
build the small landmark kernel A(i,j) = kappa(z_i, z_j) and the cross
kernel B(i,j) = kappa(z_i, r_j), eigendecompose A = sum_k alpha_k w_k w_k^T,
and extrapolate eigenvectors of the full m x m kernel as
v_k = (1/alpha_k) B^T w_k. The rank-m0 surrogate is
K_hat = sum_k alpha_k v_k v_k^T; only (alpha_k, v_k) are ever stored.

Eigenpairs with alpha_k <= eps_drop * alpha_1 are discarded so the
1/alpha_k division cannot amplify noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import RangeList
from .landmarks import LandmarkSet
from .symeig import SymMatrix, jacobi_eig

DEFAULT_EPS_DROP = 1e-8
KERNEL_ERROR_MAX_POINTS = 5000
_BLOCK = 32768


class DegenerateKernelError(RuntimeError):
    """All eigenpairs of the landmark kernel were dropped."""


@dataclass(frozen=True)
class RangeKernel:
    """Gaussian similarity on guide vectors: exp(-|s-t|^2 / (2 theta^2))."""

    theta: float

    def __post_init__(self) -> None:
        if not self.theta > 0:
            raise ValueError("theta must be positive")

    def gram(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Kernel matrix between row vectors of ``left`` and ``right``."""
        left = np.asarray(left, dtype=np.float64)
        right = np.asarray(right, dtype=np.float64)
        out = np.empty((left.shape[0], right.shape[0]), dtype=np.float64)
        inv = 1.0 / (2.0 * self.theta * self.theta)
        # blocked over columns to bound the (rows, block, dim) temporary
        for start in range(0, right.shape[0], _BLOCK):
            chunk = right[start:start + _BLOCK]
            d2 = ((left[:, None, :] - chunk[None, :, :]) ** 2).sum(axis=2)
            np.exp(-d2 * inv, out=out[:, start:start + chunk.shape[0]])
        return out


@dataclass(frozen=True)
class NystromModel:
    """Retained eigenvalues and extrapolated eigenvectors of K_hat."""

    landmarks: LandmarkSet
    alphas: np.ndarray       # (rank,) descending, all > eps_drop * alpha_1
    extrapolated: np.ndarray  # (m, rank), column k is v_k
    retained_rank: int


def build_A(landmarks: np.ndarray, kernel: RangeKernel) -> SymMatrix:
    """Landmark kernel matrix: unit diagonal, entries in (0, 1]."""
    return SymMatrix(kernel.gram(landmarks, landmarks))


def build_B(landmarks: np.ndarray, range_list: RangeList, kernel: RangeKernel) -> np.ndarray:
    """Cross kernel between landmarks (rows) and all guide vectors (columns)."""
    landmarks = np.asarray(landmarks, dtype=np.float64)
    if landmarks.shape[1] != range_list.dim:
        raise ValueError(
            f"landmark dim {landmarks.shape[1]} != range-list dim {range_list.dim}"
        )
    return kernel.gram(landmarks, range_list.vectors)


def fit(
    range_list: RangeList,
    landmarks: LandmarkSet,
    kernel: RangeKernel,
    eps_drop: float = DEFAULT_EPS_DROP,
) -> NystromModel:
    """Eigendecompose the landmark kernel and extrapolate to all guides."""
    if not 0.0 <= eps_drop < 1.0:
        raise ValueError("eps_drop must lie in [0, 1)")
    eig = jacobi_eig(build_A(landmarks.centroids, kernel))
    alphas, vectors = _retain(eig.values, eig.vectors, eps_drop)
    B = build_B(landmarks.centroids, range_list, kernel)
    extrapolated = extrapolate(B, alphas, vectors)
    return NystromModel(
        landmarks=landmarks,
        alphas=alphas,
        extrapolated=extrapolated,
        retained_rank=alphas.shape[0],
    )


def _retain(values: np.ndarray, vectors: np.ndarray, eps_drop: float) -> tuple[np.ndarray, np.ndarray]:
    if values[0] <= 0.0:
        raise DegenerateKernelError("landmark kernel has no positive eigenvalue")
    keep = values > eps_drop * values[0]
    if not keep.any():
        raise DegenerateKernelError("every eigenpair fell below the drop threshold")
    return values[keep].copy(), vectors[:, keep].copy()


def extrapolate(B: np.ndarray, alphas: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """v_k = (1/alpha_k) B^T w_k for each retained eigenpair, as columns."""
    return (B.T @ vectors) / alphas[None, :]


def kernel_error(
    model: NystromModel,
    range_list: RangeList,
    kernel: RangeKernel,
    max_points: int = KERNEL_ERROR_MAX_POINTS,
) -> float:
    """Frobenius norm |K - K_hat|_F, materializing K (test scale only)."""
    m = range_list.m
    if m > max_points:
        raise ValueError(
            f"kernel_error materializes an m x m matrix; m={m} exceeds the "
            f"{max_points}-point diagnostic guard"
        )
    V = model.extrapolated
    scaled = V * model.alphas[None, :]
    err2 = 0.0
    for start in range(0, m, _BLOCK):
        stop = min(start + _BLOCK, m)
        K_blk = kernel.gram(range_list.vectors[start:stop], range_list.vectors)
        K_blk -= scaled[start:stop] @ V.T
        err2 += float((K_blk * K_blk).sum())
    return float(np.sqrt(err2))
