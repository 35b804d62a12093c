"""Linear-time box mean and the self-guided image filter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import as_image


@dataclass(frozen=True)
class GifParams:
    radius: int = 2
    epsilon: float = 0.0

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")


def _window_sums(a, r, axis):
    # running sums along one axis; windows truncated at the borders
    n = a.shape[axis]
    c = np.cumsum(a, axis=axis)
    pad = [(0, 0)] * a.ndim
    pad[axis] = (1, 0)
    c = np.pad(c, pad)
    idx = np.arange(n)
    hi = np.minimum(idx + r, n - 1) + 1
    lo = np.maximum(idx - r, 0)
    return np.take(c, hi, axis=axis) - np.take(c, lo, axis=axis)


def box_mean(image, radius: int) -> np.ndarray:
    """Mean over the (2r+1)^2 window clipped to the image; cost independent of r."""
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    image = np.asarray(image, dtype=np.float64)
    sums = _window_sums(_window_sums(image, radius, 0), radius, 1)
    counts = _window_sums(_window_sums(np.ones(image.shape), radius, 0), radius, 1)
    return sums / counts


def guided_filter_self(image, params: GifParams) -> np.ndarray:
    """Guided filter using the input as its own guide."""
    z = as_image(image)
    r, eps = params.radius, params.epsilon
    mu = box_mean(z, r)
    var = np.maximum(box_mean(z * z, r) - mu * mu, 0.0)
    denom = var + eps
    # a = 0 where the window is flat (and eps = 0), so the output is the local mean
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(denom > 0, var / denom, 0.0)
    b = (1.0 - a) * mu
    return box_mean(a, r) * z + box_mean(b, r)
