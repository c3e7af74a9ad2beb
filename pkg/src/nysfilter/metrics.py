"""Image quality metrics: MSE, PSNR, and single-scale SSIM.

PSNR is capped at 99 dB so identical images produce a serializable value.
SSIM follows the standard single-scale protocol (Wang et al., 2004):
11x11 Gaussian window with sigma 1.5, C1 = (0.01 R)^2, C2 = (0.03 R)^2,
evaluated on every position where the full window fits, averaged over
pixels and then over channels. Images smaller than the window fall back
to global (whole-plane) statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import Image

PSNR_CAP = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class QualityScore:
    mse: float
    psnr: float
    ssim: float


def _check(a: Image, b: Image) -> None:
    if a.data.shape != b.data.shape:
        raise ValueError(f"image shapes differ: {a.data.shape} vs {b.data.shape}")


def mse(a: Image, b: Image) -> float:
    _check(a, b)
    diff = a.data - b.data
    return float(np.mean(diff * diff))


def psnr(a: Image, b: Image, per_band: bool = False) -> float:
    """10 log10(R^2 / MSE) using ``a.range_max``, capped at 99 dB.

    With ``per_band=True`` (hyperspectral convention) the PSNR is computed
    for each band separately and the values are averaged.
    """
    _check(a, b)
    R = a.range_max
    if per_band:
        vals = []
        for c in range(a.channels):
            diff = a.data[c] - b.data[c]
            vals.append(_psnr_from_mse(float(np.mean(diff * diff)), R))
        return float(np.mean(vals))
    return _psnr_from_mse(mse(a, b), R)


def _psnr_from_mse(err: float, R: float) -> float:
    if err <= 0.0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(R * R / err)))


def _gaussian_window() -> np.ndarray:
    half = SSIM_WINDOW // 2
    t = np.arange(-half, half + 1, dtype=np.float64)
    w = np.exp(-(t * t) / (2.0 * SSIM_SIGMA * SSIM_SIGMA))
    w2d = np.outer(w, w)
    return w2d / w2d.sum()


def _ssim_plane(x: np.ndarray, y: np.ndarray, R: float) -> float:
    c1 = (SSIM_K1 * R) ** 2
    c2 = (SSIM_K2 * R) ** 2
    H, W = x.shape
    if H < SSIM_WINDOW or W < SSIM_WINDOW:
        # image smaller than the window: global statistics
        mu_x, mu_y = x.mean(), y.mean()
        var_x, var_y = x.var(), y.var()
        cov = float(((x - mu_x) * (y - mu_y)).mean())
        return float(
            ((2 * mu_x * mu_y + c1) * (2 * cov + c2))
            / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2))
        )
    w = _gaussian_window()
    Hv, Wv = H - SSIM_WINDOW + 1, W - SSIM_WINDOW + 1
    mu_x = np.zeros((Hv, Wv))
    mu_y = np.zeros((Hv, Wv))
    xx = np.zeros((Hv, Wv))
    yy = np.zeros((Hv, Wv))
    xy = np.zeros((Hv, Wv))
    for dy in range(SSIM_WINDOW):
        for dx in range(SSIM_WINDOW):
            wv = w[dy, dx]
            xs = x[dy:dy + Hv, dx:dx + Wv]
            ys = y[dy:dy + Hv, dx:dx + Wv]
            mu_x += wv * xs
            mu_y += wv * ys
            xx += wv * xs * xs
            yy += wv * ys * ys
            xy += wv * xs * ys
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y
    ssim_map = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    return float(ssim_map.mean())


def ssim(a: Image, b: Image) -> float:
    """Mean single-scale SSIM over channels/bands."""
    _check(a, b)
    R = a.range_max
    return float(np.mean([_ssim_plane(a.data[c], b.data[c], R) for c in range(a.channels)]))


def quality(a: Image, b: Image, per_band: bool = False) -> QualityScore:
    return QualityScore(mse=mse(a, b), psnr=psnr(a, b, per_band=per_band), ssim=ssim(a, b))
