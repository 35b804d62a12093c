"""Coefficient-domain operators: hard-threshold partition, joint bilateral
magnitude estimation with phase retention, and bilateral filtering."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelParams:
    sigma_d: float
    sigma_r: float
    half_width: int | None = None

    def __post_init__(self):
        if not self.sigma_d > 0:
            raise ValueError(f"sigma_d must be positive, got {self.sigma_d}")
        if not self.sigma_r > 0:
            raise ValueError(f"sigma_r must be positive, got {self.sigma_r}")
        if self.half_width is None:
            object.__setattr__(self, "half_width", default_half_width(self.sigma_d))
        if self.half_width < 1:
            raise ValueError(f"half_width must be >= 1, got {self.half_width}")


def default_half_width(sigma_d: float) -> int:
    return max(1, math.ceil(3 * sigma_d))


@dataclass
class WedgePartition:
    """One wedge split at threshold ``lam`` into kept and noise-subspace parts."""

    coeffs: np.ndarray
    lam: float
    keep_mask: np.ndarray
    thresholded: np.ndarray
    noisy_mag: np.ndarray
    noisy_phase: np.ndarray


def partition_wedge(wedge, lam: float) -> WedgePartition:
    if lam < 0:
        raise ValueError(f"threshold must be non-negative, got {lam}")
    wedge = np.asarray(wedge, dtype=complex)
    mag = np.abs(wedge)
    keep = mag > lam
    # np.angle(0) == 0 and the range is (-pi, pi]
    phase = np.angle(wedge)
    return WedgePartition(wedge, lam, keep, np.where(keep, mag, 0.0), mag, phase)


def bilateral(data, guide, sigma_d: float, sigma_r: float, half_width: int) -> np.ndarray:
    """Joint bilateral filter of ``data`` steered by ``guide``.

    Range distances are moduli of guide differences, so complex guides are
    allowed. Windows are truncated at the array border and the weights
    renormalized over the in-bounds samples.
    """
    data = np.asarray(data)
    guide = np.asarray(guide)
    if data.shape != guide.shape:
        raise ValueError(f"data shape {data.shape} != guide shape {guide.shape}")
    rows, cols = data.shape
    num = np.zeros(data.shape, dtype=np.result_type(data.dtype, np.float64))
    den = np.zeros(data.shape)
    inv_d = 1.0 / (2.0 * sigma_d**2)
    inv_r = 1.0 / (2.0 * sigma_r**2)
    for dy in range(-half_width, half_width + 1):
        if abs(dy) >= rows:
            continue
        ty = slice(max(0, -dy), rows - max(0, dy))  # target positions U
        sy = slice(max(0, dy), rows - max(0, -dy))  # neighbours U + offset
        for dx in range(-half_width, half_width + 1):
            if abs(dx) >= cols:
                continue
            tx = slice(max(0, -dx), cols - max(0, dx))
            sx = slice(max(0, dx), cols - max(0, -dx))
            diff = guide[sy, sx] - guide[ty, tx]
            if np.iscomplexobj(diff):
                dist2 = diff.real**2 + diff.imag**2
            else:
                dist2 = diff * diff
            w = math.exp(-(dy * dy + dx * dx) * inv_d) * np.exp(-dist2 * inv_r)
            num[ty, tx] += w * data[sy, sx]
            den[ty, tx] += w
    return num / den


def jbf_magnitude(part: WedgePartition, params: KernelParams, guide: str = "magnitude") -> np.ndarray:
    """Estimate magnitudes from the thresholded ones, with range weights from the noisy wedge.

    ``guide="complex"`` measures range distance between complex noisy
    coefficients instead of between their magnitudes.
    """
    if guide == "magnitude":
        g = part.noisy_mag
    elif guide == "complex":
        g = part.coeffs
    else:
        raise ValueError(f"guide must be 'magnitude' or 'complex', got {guide!r}")
    return bilateral(part.thresholded, g, params.sigma_d, params.sigma_r, params.half_width)


def recombine(part: WedgePartition, estimated_mag) -> np.ndarray:
    """Kept coefficients unchanged; noise-subspace ones get the estimate with the noisy phase."""
    estimated_mag = np.asarray(estimated_mag)
    if estimated_mag.shape != part.coeffs.shape:
        raise ValueError(f"estimate shape {estimated_mag.shape} != wedge shape {part.coeffs.shape}")
    below = np.maximum(estimated_mag, 0.0) * np.exp(1j * part.noisy_phase)
    return np.where(part.keep_mask, part.coeffs, below)


def hard_threshold(wedge, lam: float) -> np.ndarray:
    wedge = np.asarray(wedge, dtype=complex)
    return np.where(np.abs(wedge) > lam, wedge, 0)


def bf_finest(wedge, params: KernelParams) -> np.ndarray:
    """Bilateral filter of complex coefficients, range distance = complex modulus."""
    wedge = np.asarray(wedge, dtype=complex)
    return bilateral(wedge, wedge, params.sigma_d, params.sigma_r, params.half_width)
