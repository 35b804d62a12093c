"""Corpus-level experiment drivers: noise-subspace correlations, sensitivity
curves and parameter sweeps. Used by the CLI and the acceptance tests."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import curvelet
from .calibration import (
    NoiseProfile,
    UndefinedResultError,
    cached_profile,
    empirical_sensitivity_curves,
    minmax_normalize,
    thresholds,
)
from .image import add_awgn, load_image
from .metrics import evaluate, noise_subspace_correlation
from .pipeline import CT_DEFAULT_K, DenoiseParams, ct_baseline, ct_coefficients, denoise_detailed

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".pgm")
DEFAULT_SIGMA_GRID = tuple(float(s) for s in range(5, 101, 5))


def list_corpus(directory, max_images: int | None = 8) -> list[Path]:
    """Image files of a corpus directory in name order, capped at ``max_images``."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {directory}")
    paths = sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if max_images is not None:
        if max_images < 1:
            raise ValueError(f"max_images must be >= 1, got {max_images}")
        paths = paths[:max_images]
    if not paths:
        raise ValueError(f"corpus is empty: {directory}")
    return paths


def load_corpus(directory, max_images: int | None = 8):
    return [(p.stem, load_image(p)) for p in list_corpus(directory, max_images)]


def _profile_for(image, params: DenoiseParams, trials: int, seed: int) -> NoiseProfile:
    height, width = image.shape
    config = params.fdct or curvelet.default_config(width, height)
    return cached_profile(width, height, config, trials=trials, seed=seed)


# ---------------------------------------------------------------------------
# noise-subspace correlation

@dataclass
class Table1Row:
    sigma: float
    gamma: int  # 1-based scale index
    ct_corr: float
    proposed_corr: float
    images: int
    undefined: int  # correlations left out of the averages because undefined (nan if all were)


def _subspace_pair(clean, noisy, sigma, params, profile, ct_k, protocol):
    config = profile.config
    clean_c = curvelet.forward(clean, config)
    noisy_c = curvelet.forward(noisy, config)
    if protocol == "retransform":
        prop = denoise_detailed(noisy, sigma, params, profile).output
        ct = ct_baseline(noisy, sigma, ct_k, profile)
        return clean_c, noisy_c, curvelet.forward(prop, config), curvelet.forward(ct, config)
    if protocol == "direct":
        prop_c = denoise_detailed(noisy, sigma, replace(params, use_gif=False), profile).coefficients
        ct_c = ct_coefficients(noisy_c, sigma, ct_k, profile)
        return clean_c, noisy_c, prop_c, ct_c
    raise ValueError(f"protocol must be 'retransform' or 'direct', got {protocol!r}")


def table1(images, sigmas, params: DenoiseParams | None = None, seed: int = 0,
           protocol: str = "retransform", ct_k: float | None = None, trials: int = 10) -> list[Table1Row]:
    """Corpus-averaged correlation of clean and estimated magnitudes in the noise subspace.

    ``images`` is a sequence of ``(name, array)``. The noise subspace at each
    wedge is ``|noisy| < k*sigma*sigma_go`` with ``k = params.k``; the CT
    baseline thresholds at the same level unless ``ct_k`` is given.
    """
    images = list(images)
    if not images:
        raise ValueError("corpus is empty")
    params = params or DenoiseParams()
    ct_k = params.k if ct_k is None else ct_k
    sums: dict = {}
    for sigma in sigmas:
        if not sigma > 0:
            raise ValueError(f"table sigmas must be positive, got {sigma}")
        for idx, (name, clean) in enumerate(images):
            profile = _profile_for(clean, params, trials, 0)
            noisy = add_awgn(clean, sigma, seed + idx)
            clean_c, noisy_c, prop_c, ct_c = _subspace_pair(clean, noisy, sigma, params, profile,
                                                            ct_k, protocol)
            lam = thresholds(profile, sigma, params.k, params.k_per_scale)
            for scale in range(1, len(clean_c) - 1):
                acc = sums.setdefault((sigma, scale), {"ct": [], "proposed": [], "undefined": 0})
                for method, est in (("ct", ct_c), ("proposed", prop_c)):
                    try:
                        acc[method].append(noise_subspace_correlation(clean_c, est, noisy_c, lam, scale))
                    except UndefinedResultError as exc:
                        log.warning("%s %s sigma=%g gamma=%d: %s", method, name, sigma, scale + 1, exc)
                        acc["undefined"] += 1
            log.info("table1 %s sigma=%g done", name, sigma)
    rows = []
    for (sigma, scale), acc in sorted(sums.items()):
        ct_mean = float(np.mean(acc["ct"])) if acc["ct"] else math.nan
        prop_mean = float(np.mean(acc["proposed"])) if acc["proposed"] else math.nan
        rows.append(Table1Row(float(sigma), scale + 1, ct_mean, prop_mean, len(images), acc["undefined"]))
    return rows


# ---------------------------------------------------------------------------
# sensitivity

@dataclass
class SensitivityTable:
    sigmas: np.ndarray
    magnitude: np.ndarray
    phase: np.ndarray
    per_image: dict


def corpus_sensitivity(images, sigma_grid=DEFAULT_SIGMA_GRID, seed: int = 0,
                       nscales: int | None = None, nangles: int = 16) -> SensitivityTable:
    """Per-image normalized sensitivity curves, averaged and renormalized to [0, 1]."""
    images = list(images)
    if not images:
        raise ValueError("corpus is empty")
    per_image = {}
    for idx, (name, img) in enumerate(images):
        height, width = img.shape
        config = curvelet.default_config(width, height)
        if nscales is not None or nangles != config.nangles_coarse:
            config = curvelet.FdctConfig(nscales or config.nscales, nangles, config.finest_mode)
        per_image[name] = empirical_sensitivity_curves(img, sigma_grid, config, seed + idx)
    curves = list(per_image.values())
    mag = minmax_normalize(np.mean([c.magnitude for c in curves], axis=0))
    phase = minmax_normalize(np.mean([c.phase for c in curves], axis=0))
    return SensitivityTable(curves[0].sigmas, mag, phase, per_image)


# ---------------------------------------------------------------------------
# parameter sweep

SWEEP_AXES = {
    "fine": ("sigma_d_fine", "k_r"),
    "coarse": ("sigma_d_coarse", "alpha"),
}


@dataclass
class SweepResult:
    names: tuple
    rows: list  # (p1, p2, mean psnr, mean ssim)

    def argmax(self):
        """Row with the highest mean PSNR; ties go to the first in emission order."""
        return max(self.rows, key=lambda r: r[2])


def sweep(images, sigma: float, axis: str, values1, values2, params: DenoiseParams | None = None,
          seed: int = 0, trials: int = 10) -> SweepResult:
    images = list(images)
    if not images:
        raise ValueError("corpus is empty")
    if axis not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {sorted(SWEEP_AXES)}, got {axis!r}")
    values1 = sorted(float(v) for v in values1)
    values2 = sorted(float(v) for v in values2)
    if not values1 or not values2:
        raise ValueError("sweep ranges must be non-empty")
    if min(values1[0], values2[0]) <= 0:
        raise ValueError("sweep values must be positive")
    params = params or DenoiseParams()
    name1, name2 = SWEEP_AXES[axis]
    noisy = [(clean, add_awgn(clean, sigma, seed + i), _profile_for(clean, params, trials, 0))
             for i, (_, clean) in enumerate(images)]
    rows = []
    for v1 in values1:
        for v2 in values2:
            p = replace(params, **{name1: v1, name2: v2})
            scores = [evaluate(clean, denoise_detailed(y, sigma, p, prof).output)
                      for clean, y, prof in noisy]
            rows.append((v1, v2, float(np.mean([s.psnr for s in scores])),
                         float(np.mean([s.ssim for s in scores]))))
    return SweepResult((name1, name2), rows)


# ---------------------------------------------------------------------------
# quality comparison

def compare_methods(images, sigma: float, params: DenoiseParams | None = None, seed: int = 0,
                    ct_k: float = CT_DEFAULT_K, trials: int = 10, clamp: bool = False):
    """``[(image, sigma, method, MetricsReport)]`` for noisy, ct and proposed outputs."""
    params = params or DenoiseParams()
    out = []
    for idx, (name, clean) in enumerate(images):
        profile = _profile_for(clean, params, trials, 0)
        noisy = add_awgn(clean, sigma, seed + idx)
        results = {
            "ct": ct_baseline(noisy, sigma, ct_k, profile),
            "noisy": noisy,
            "proposed": denoise_detailed(noisy, sigma, params, profile).output,
        }
        for method in sorted(results):
            out.append((name, sigma, method, evaluate(clean, results[method], clamp=clamp)))
    return sorted(out, key=lambda r: (r[0], r[1], r[2]))
