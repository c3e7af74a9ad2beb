"""Fast high-dimensional kernel filtering via Nystrom low-rank approximation.

Bilateral, joint-bilateral, and PCA-NLM filtering of color and
hyperspectral images, with a brute-force oracle, error diagnostics, and
quality metrics.
"""

from .filters import (
    FilterParams,
    FilterReport,
    brute_force_filter,
    build_guide,
    fast_filter,
    pca_patch_guide,
)
from .image import (
    Image,
    ImageFormatError,
    RangeList,
    extract_range_list,
    load_image,
    save_image,
)
from .landmarks import LandmarkSet, kmeans_landmarks, uniform_landmarks
from .metrics import QualityScore, mse, psnr, quality, ssim
from .nystrom import (
    DegenerateKernelError,
    NystromModel,
    RangeKernel,
    build_A,
    build_B,
    fit,
    kernel_error,
)
from .spatial import (
    SpatialKernel,
    box_filter,
    gaussian_fir,
    gaussian_recursive,
)
from .symeig import EigenSystem, SymMatrix, jacobi_eig

__all__ = [
    "DegenerateKernelError",
    "EigenSystem",
    "FilterParams",
    "FilterReport",
    "Image",
    "ImageFormatError",
    "LandmarkSet",
    "NystromModel",
    "QualityScore",
    "RangeKernel",
    "RangeList",
    "SpatialKernel",
    "SymMatrix",
    "box_filter",
    "brute_force_filter",
    "build_A",
    "build_B",
    "build_guide",
    "extract_range_list",
    "fast_filter",
    "fit",
    "gaussian_fir",
    "gaussian_recursive",
    "jacobi_eig",
    "kernel_error",
    "kmeans_landmarks",
    "load_image",
    "mse",
    "pca_patch_guide",
    "psnr",
    "quality",
    "save_image",
    "ssim",
    "uniform_landmarks",
]

__version__ = "0.1.0"
