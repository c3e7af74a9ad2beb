"""Kernel filtering: brute-force reference and the fast low-rank path.

The kernel filter replaces each pixel by a weighted average of its
(2S+1)^2 neighborhood, weights being the product of a spatial kernel on
the displacement and a Gaussian range kernel on guide-vector differences.
``brute_force_filter`` evaluates that ratio directly and serves as the
oracle. ``fast_filter`` approximates the range-kernel matrix with a
rank-m0 Nystrom surrogate, which turns the filter into
(n+1) * rank spatial convolutions:

    1. list all guide vectors and pick m0 landmarks (k-means or uniform);
    2. eigendecompose the landmark kernel A;
    3. extrapolate eigenvectors v_k across all pixels via the cross kernel;
    4. for each retained k: d_k(x) = v_k at x's guide, h_k = d_k * f,
       accumulate zeta += alpha_k d_k (w * h_k), eta += alpha_k d_k (w * d_k);
    5. output zeta / eta with a small-denominator guard.

Guide construction for the three modes lives in ``build_guide``:
bilateral (guide = input), joint (external guide), and nlm (per-pixel
patches projected onto their leading PCA directions).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .image import Image, RangeList, extract_range_list
from .landmarks import (
    DEFAULT_MAX_ITER,
    LandmarkSet,
    kmeans_landmarks,
    uniform_landmarks,
)
from .nystrom import (
    DEFAULT_EPS_DROP,
    RangeKernel,
    _retain,
    build_A,
    build_B,
    extrapolate,
)
from .spatial import BOX, SpatialKernel, apply_planes, gaussian_weights
from .symeig import SymMatrix, jacobi_eig

MODE_BILATERAL = "bilateral"
MODE_JOINT = "joint"
MODE_NLM = "nlm"
STRATEGY_KMEANS = "kmeans"
STRATEGY_UNIFORM = "uniform"

DENOMINATOR_EPS_SCALE = 1e-12


@dataclass(frozen=True)
class FilterParams:
    """Everything that determines a filtering run (and hence its output)."""

    spatial: SpatialKernel
    theta: float
    m0: int = 15
    seed: int = 0
    landmark_strategy: str = STRATEGY_KMEANS
    mode: str = MODE_BILATERAL
    patch_radius: int = 3
    pca_dim: int = 25
    eps_drop: float = DEFAULT_EPS_DROP
    kmeans_max_iter: int = DEFAULT_MAX_ITER

    def __post_init__(self) -> None:
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.m0 < 1:
            raise ValueError("m0 must be >= 1")
        if self.landmark_strategy not in (STRATEGY_KMEANS, STRATEGY_UNIFORM):
            raise ValueError(f"unknown landmark strategy {self.landmark_strategy!r}")
        if self.mode not in (MODE_BILATERAL, MODE_JOINT, MODE_NLM):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 <= self.eps_drop < 1.0:
            raise ValueError("eps_drop must lie in [0, 1)")

    @property
    def range_kernel(self) -> RangeKernel:
        return RangeKernel(theta=self.theta)


@dataclass
class FilterReport:
    output: Image
    timings: dict[str, float] = field(default_factory=dict)
    retained_rank: int = 0
    quant_error: float = 0.0
    min_denominator: float = 0.0
    guarded_pixels: int = 0


def _check_sizes(f: Image, p: Image) -> None:
    if (f.width, f.height) != (p.width, p.height):
        raise ValueError(
            f"input {f.width}x{f.height} and guide {p.width}x{p.height} "
            "must share the spatial size"
        )


def _window_weights(kernel: SpatialKernel) -> np.ndarray:
    """2-D spatial weights on the square window, for direct evaluation."""
    S = kernel.effective_radius()
    if kernel.kind == BOX:
        return np.ones((2 * S + 1, 2 * S + 1))
    w1 = gaussian_weights(kernel.sigma, S)
    return np.outer(w1, w1)


def brute_force_filter(f: Image, p: Image, params: FilterParams) -> Image:
    """Direct evaluation of the kernel filter (the oracle path).

    A recursive-Gaussian spatial kernel is evaluated as its truncated FIR
    counterpart at radius ceil(3*sigma).
    """
    _check_sizes(f, p)
    S = params.spatial.effective_radius()
    weights = _window_weights(params.spatial)
    H, W = f.height, f.width
    inv = 1.0 / (2.0 * params.theta * params.theta)
    padf = np.pad(f.data, ((0, 0), (S, S), (S, S)), mode="edge")
    padp = np.pad(p.data, ((0, 0), (S, S), (S, S)), mode="edge")
    num = np.zeros_like(f.data)
    den = np.zeros((H, W))
    for iy in range(2 * S + 1):
        for ix in range(2 * S + 1):
            diff = padp[:, iy:iy + H, ix:ix + W] - p.data
            kv = np.exp(-(diff * diff).sum(axis=0) * inv)
            kv *= weights[iy, ix]
            num += kv * padf[:, iy:iy + H, ix:ix + W]
            den += kv
    return Image(data=num / den, range_max=f.range_max)


def build_guide(
    f: Image,
    mode: str = MODE_BILATERAL,
    guide: Image | None = None,
    patch_radius: int = 3,
    pca_dim: int = 25,
) -> Image:
    """Guide image for the requested mode (ρ channels drive the range kernel)."""
    if mode == MODE_BILATERAL:
        return f
    if mode == MODE_JOINT:
        if guide is None:
            raise ValueError("joint mode requires an external guide image")
        _check_sizes(f, guide)
        return guide
    if mode == MODE_NLM:
        return pca_patch_guide(f, patch_radius, pca_dim)
    raise ValueError(f"unknown mode {mode!r}")


def pca_patch_guide(f: Image, patch_radius: int, pca_dim: int) -> Image:
    """Project every pixel's patch onto the top PCA directions.

    Patches are the (2r+1)^2 window per channel with replicate borders,
    flattened channel-major; coefficients are computed against the mean
    patch, so a constant image yields an all-zero guide.
    """
    r = patch_radius
    side = 2 * r + 1
    n, H, W = f.data.shape
    dim = n * side * side
    if not 1 <= pca_dim <= dim:
        raise ValueError(f"pca_dim must lie in [1, {dim}], got {pca_dim}")
    pad = np.pad(f.data, ((0, 0), (r, r), (r, r)), mode="edge")
    X = np.empty((H * W, dim), dtype=np.float64)
    col = 0
    for c in range(n):
        for dy in range(side):
            for dx in range(side):
                X[:, col] = pad[c, dy:dy + H, dx:dx + W].ravel()
                col += 1
    mu = X.mean(axis=0)
    Xc = X - mu
    cov = SymMatrix(Xc.T @ Xc / X.shape[0])
    eig = jacobi_eig(cov)
    coeffs = Xc @ eig.vectors[:, :pca_dim]
    return Image(data=coeffs.T.reshape(pca_dim, H, W).copy(), range_max=f.range_max)


def select_landmarks(range_list: RangeList, params: FilterParams) -> LandmarkSet:
    if params.landmark_strategy == STRATEGY_KMEANS:
        return kmeans_landmarks(
            range_list.vectors, params.m0, seed=params.seed,
            max_iter=params.kmeans_max_iter,
        )
    return uniform_landmarks(range_list.vectors, params.m0, seed=params.seed)


def fast_filter(f: Image, p: Image, params: FilterParams) -> FilterReport:
    """Low-rank approximation of the kernel filter (the production path)."""
    _check_sizes(f, p)
    n, H, W = f.data.shape
    m = H * W
    if params.m0 > m:
        raise ValueError(f"m0 = {params.m0} exceeds the pixel count {m}")
    kernel = params.range_kernel
    t_start = time.perf_counter()

    range_list = extract_range_list(p)
    t0 = time.perf_counter()
    lm = select_landmarks(range_list, params)
    t1 = time.perf_counter()

    eig = jacobi_eig(build_A(lm.centroids, kernel))
    t2 = time.perf_counter()

    alphas, W_eig = _retain(eig.values, eig.vectors, params.eps_drop)
    B = build_B(lm.centroids, range_list, kernel)
    V = extrapolate(B, alphas, W_eig)
    rank = alphas.shape[0]
    t3 = time.perf_counter()

    zeta = np.zeros((n, H, W))
    eta = np.zeros((H, W))
    zeta_lead = eta_lead = None
    planes = np.empty((n + 1, H, W), dtype=np.float64)
    for k in range(rank):
        d = V[range_list.index_map, k].reshape(H, W)
        planes[:n] = d[np.newaxis, :, :] * f.data
        planes[n] = d
        conv = apply_planes(planes, params.spatial)
        term_num = (alphas[k] * d) * conv[:n]
        term_den = (alphas[k] * d) * conv[n]
        zeta += term_num
        eta += term_den
        if k == 0:
            zeta_lead = term_num.copy()
            eta_lead = term_den.copy()
    t4 = time.perf_counter()

    S = params.spatial.effective_radius()
    eps_den = DENOMINATOR_EPS_SCALE * (2 * S + 1) ** 2 * float(np.abs(alphas).max())
    abs_eta = np.abs(eta)
    min_den = float(abs_eta.min())
    mask = abs_eta < eps_den
    out = zeta / np.where(mask, 1.0, eta)
    guarded = int(mask.sum())
    if guarded:
        # rank-1 fallback; where even the leading term vanishes, pass the
        # input pixel through unchanged
        lead_ok = np.abs(eta_lead) >= eps_den
        fallback = np.where(
            lead_ok,
            zeta_lead / np.where(lead_ok, eta_lead, 1.0),
            f.data,
        )
        out = np.where(mask, fallback, out)
    t5 = time.perf_counter()

    return FilterReport(
        output=Image(data=out, range_max=f.range_max),
        timings={
            "clustering": t1 - t0,
            "eigendecomposition": t2 - t1,
            "extrapolation": t3 - t2,
            "convolutions": t4 - t3,
            "normalization": t5 - t4,
            "total": t5 - t_start,
        },
        retained_rank=rank,
        quant_error=lm.quant_error,
        min_denominator=min_den,
        guarded_pixels=guarded,
    )
