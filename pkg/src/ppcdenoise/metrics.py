"""Image quality measures and the noise-subspace correlation study."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .calibration import UndefinedResultError
from .image import as_image


@dataclass
class MetricsReport:
    psnr: float
    ssim: float
    eki: float

    def as_row(self):
        return [self.psnr, self.ssim, self.eki]


def _pair(reference, test):
    reference = as_image(reference)
    test = as_image(test)
    if reference.shape != test.shape:
        raise ValueError(f"image shapes differ: {reference.shape} vs {test.shape}")
    return reference, test


def psnr(reference, test, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    reference, test = _pair(reference, test)
    mse = np.mean((reference - test) ** 2)
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


def _gaussian_window(size=11, sigma=1.5):
    x = np.arange(size) - (size - 1) / 2
    g = np.exp(-(x**2) / (2 * sigma**2))
    return g / g.sum()


def _filter_valid(img, g):
    # separable correlation over fully-covered positions only
    n = len(g)
    rows = sum(g[i] * img[i:img.shape[0] - n + 1 + i, :] for i in range(n))
    return sum(g[i] * rows[:, i:rows.shape[1] - n + 1 + i] for i in range(n))


def ssim(reference, test, data_range: float = 255.0, k1: float = 0.01, k2: float = 0.03) -> float:
    """Mean SSIM with an 11x11 Gaussian window (sigma 1.5) over valid positions."""
    reference, test = _pair(reference, test)
    if min(reference.shape) < 11:
        raise ValueError(f"SSIM needs both sides >= 11, got {reference.shape}")
    g = _gaussian_window()
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mu_x = _filter_valid(reference, g)
    mu_y = _filter_valid(test, g)
    sxx = _filter_valid(reference * reference, g) - mu_x**2
    syy = _filter_valid(test * test, g) - mu_y**2
    sxy = _filter_valid(reference * test, g) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


LAPLACIAN = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


def laplacian(image) -> np.ndarray:
    return ndimage.correlate(np.asarray(image, dtype=np.float64), LAPLACIAN, mode="nearest")


def pearson(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 2:
        raise ValueError("correlation needs at least two samples")
    da = a - a.mean()
    db = b - b.mean()
    sa = np.sum(da * da)
    sb = np.sum(db * db)
    if sa == 0 or sb == 0:
        raise UndefinedResultError("correlation undefined for constant input")
    r = np.sum(da * db) / math.sqrt(sa * sb)
    return float(min(1.0, max(-1.0, r)))


def eki(reference, test) -> float:
    """Edge keeping index: correlation of the Laplacians of both images."""
    reference, test = _pair(reference, test)
    if min(reference.shape) < 3:
        raise ValueError(f"EKI needs both sides >= 3, got {reference.shape}")
    return pearson(laplacian(reference), laplacian(test))


def evaluate(reference, test, clamp: bool = False) -> MetricsReport:
    """PSNR, SSIM and EKI of ``test`` against ``reference``.

    ``clamp`` limits ``test`` to [0, 255] first.
    """
    test = np.asarray(test, dtype=np.float64)
    if clamp:
        test = np.clip(test, 0.0, 255.0)
    return MetricsReport(psnr(reference, test), ssim(reference, test), eki(reference, test))


def noise_subspace_correlation(clean_coeffs, estimated_coeffs, noisy_coeffs, thresholds: dict,
                               scale: int) -> float:
    """Correlation of clean and estimated magnitudes where the noisy coefficient is below threshold.

    All orientations of the 0-based ``scale`` are pooled.
    """
    nscales = len(clean_coeffs)
    if not 1 <= scale < nscales - 1:
        raise ValueError(f"scale {scale} is not a coarser band scale (1..{nscales - 2})")
    clean_vals, est_vals = [], []
    for l, noisy in enumerate(noisy_coeffs[scale]):
        clean = clean_coeffs[scale][l]
        est = estimated_coeffs[scale][l]
        if not clean.shape == est.shape == noisy.shape:
            raise ValueError(f"wedge ({scale}, {l}) shapes differ")
        mask = np.abs(noisy) < thresholds[(scale, l)]
        clean_vals.append(np.abs(clean[mask]))
        est_vals.append(np.abs(est[mask]))
    clean_vals = np.concatenate(clean_vals)
    est_vals = np.concatenate(est_vals)
    if clean_vals.size < 2:
        raise UndefinedResultError(f"noise subspace at scale {scale} is empty")
    return pearson(clean_vals, est_vals)
