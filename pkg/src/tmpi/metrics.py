"""Image quality metrics: PSNR, SSIM and mean absolute error.

Metrics are evaluated on a centered crop (default 15% of each dimension
trimmed from every edge) to discount disocclusion borders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

__all__ = ["Metrics", "compute_metrics", "psnr", "ssim"]

# SSIM constants from Wang et al.
_K1, _K2 = 0.01, 0.03
_SIGMA = 1.5
_TRUNCATE = 5.0 / 1.5  # 11x11 window


@dataclass(frozen=True)
class Metrics:
    psnr: float  # dB; inf for identical inputs
    ssim: float
    l1: float


def _as_array(x) -> np.ndarray:
    arr = np.asarray(getattr(x, "data", x), dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return arr


def _center_crop(arr: np.ndarray, frac: float) -> np.ndarray:
    if frac == 0:
        return arr
    by = round(frac * arr.shape[0])
    bx = round(frac * arr.shape[1])
    return arr[by:arr.shape[0] - by, bx:arr.shape[1] - bx]


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    mse = float(np.mean((a - b) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _ssim_channel(a: np.ndarray, b: np.ndarray) -> float:
    c1, c2 = _K1 ** 2, _K2 ** 2
    blur = lambda x: gaussian_filter(x, _SIGMA, truncate=_TRUNCATE, mode="reflect")
    mu_a, mu_b = blur(a), blur(b)
    var_a = blur(a * a) - mu_a ** 2
    var_b = blur(b * b) - mu_b ** 2
    cov = blur(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    s = num / den
    # exclude the filter's boundary band from the mean when there is room
    pad = int(_TRUNCATE * _SIGMA + 0.5)
    if min(s.shape) > 2 * pad:
        s = s[pad:-pad, pad:-pad]
    return float(np.mean(s))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Gaussian-windowed SSIM, averaged over channels."""
    return float(np.mean([_ssim_channel(a[:, :, c], b[:, :, c])
                          for c in range(a.shape[2])]))


def compute_metrics(a, b, crop_fraction: float = 0.15) -> Metrics:
    """PSNR / SSIM / L1 between two images on a centered crop."""
    if not 0.0 <= crop_fraction < 0.5:
        raise ValueError("crop_fraction must be in [0, 0.5)")
    arr_a, arr_b = _as_array(a), _as_array(b)
    if arr_a.shape != arr_b.shape:
        raise ValueError(f"shape mismatch: {arr_a.shape} vs {arr_b.shape}")
    arr_a = _center_crop(arr_a, crop_fraction)
    arr_b = _center_crop(arr_b, crop_fraction)
    return Metrics(
        psnr=psnr(arr_a, arr_b),
        ssim=ssim(arr_a, arr_b),
        l1=float(np.mean(np.abs(arr_a - arr_b))),
    )
