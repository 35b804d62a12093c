"""Noise calibration of curvelet wedges, thresholds and noise-sensitivity measures."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from . import curvelet
from .curvelet import CurveletCoeffs, FdctConfig
from .image import add_awgn, as_image, make_rng


class UndefinedResultError(ArithmeticError):
    """A measure is mathematically undefined for the given inputs."""


@dataclass
class NoiseProfile:
    """Standard deviation of each wedge's coefficients for unit white noise.

    ``sigma_go`` maps 0-based ``(scale, orientation)`` to the std of the
    complex coefficients, i.e. ``sqrt(var(re) + var(im))`` pooled over all
    coefficients of the wedge and all trials.
    """

    sigma_go: dict
    width: int
    height: int
    config: FdctConfig
    trials: int
    seed: int

    def matches(self, width: int, height: int, config: FdctConfig) -> bool:
        return (self.width, self.height, self.config) == (width, height, config)

    def __getitem__(self, key):
        return self.sigma_go[key]


def monte_carlo_profile(width: int, height: int, config: FdctConfig, trials: int = 10,
                        seed: int = 0, noise_std: float = 1.0) -> NoiseProfile:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = make_rng(seed)
    sums = {}
    sq_sums = {}
    counts = {}
    # trials are accumulated in index order, so the result is schedule independent
    for _ in range(trials):
        noise = noise_std * rng.standard_normal((height, width))
        coeffs = curvelet.forward(noise, config)
        for j, l, arr in coeffs.wedges():
            key = (j, l)
            sums[key] = sums.get(key, 0.0) + arr.sum()
            sq_sums[key] = sq_sums.get(key, 0.0) + np.sum(arr.real**2 + arr.imag**2)
            counts[key] = counts.get(key, 0) + arr.size
    sigma_go = {}
    for key, n in counts.items():
        mean = sums[key] / n
        var = sq_sums[key] / n - abs(mean) ** 2
        sigma_go[key] = math.sqrt(max(var, 0.0))
    return NoiseProfile(sigma_go, width, height, config, trials, seed)


def thresholds(profile: NoiseProfile, sigma: float, k: float = 2.0, per_scale=None) -> dict:
    """Per-wedge thresholds ``k * sigma * sigma_go``.

    ``per_scale`` optionally maps a 0-based scale to its own constant,
    overriding ``k`` there.
    """
    if sigma < 0:
        raise ValueError(f"noise sigma must be non-negative, got {sigma}")
    per_scale = per_scale or {}
    out = {}
    for (j, l), s in profile.sigma_go.items():
        kj = per_scale.get(j, k)
        if kj <= 0:
            raise ValueError(f"threshold constant must be positive, got {kj}")
        out[(j, l)] = kj * sigma * s
    return out


def threshold_for(table: dict, j: int, l: int) -> float:
    try:
        return table[(j, l)]
    except KeyError:
        raise KeyError(f"no threshold for wedge (scale {j}, orientation {l})") from None


# ---------------------------------------------------------------------------
# profile cache

def cache_dir() -> Path:
    env = os.environ.get("CURVELET_CACHE_DIR")
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "ppcdenoise"


def profile_path(width, height, config: FdctConfig, trials, seed, directory=None) -> Path:
    directory = Path(directory) if directory is not None else cache_dir()
    name = (f"profile_{width}x{height}_s{config.nscales}_a{config.nangles_coarse}"
            f"_{config.finest_mode}_t{trials}_seed{seed}.csv")
    return directory / name


_META = ["width", "height", "nscales", "nangles", "finest_mode", "trials", "seed"]


def save_profile(profile: NoiseProfile, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cfg = profile.config
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(_META)
        w.writerow([profile.width, profile.height, cfg.nscales, cfg.nangles_coarse,
                    cfg.finest_mode, profile.trials, profile.seed])
        w.writerow(["gamma", "o", "sigma_go"])
        for (j, l) in sorted(profile.sigma_go):
            w.writerow([j + 1, l + 1, repr(profile.sigma_go[(j, l)])])


def load_profile(path) -> NoiseProfile:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3 or rows[0] != _META or rows[2] != ["gamma", "o", "sigma_go"]:
        raise ValueError(f"{path}: not a noise profile file")
    meta = dict(zip(_META, rows[1]))
    config = FdctConfig(int(meta["nscales"]), int(meta["nangles"]), meta["finest_mode"])
    sigma_go = {(int(g) - 1, int(o) - 1): float(s) for g, o, s in rows[3:]}
    profile = NoiseProfile(sigma_go, int(meta["width"]), int(meta["height"]), config,
                           int(meta["trials"]), int(meta["seed"]))
    expected = {(j, l) for j in range(config.nscales) for l in range(config.nangles(j))}
    if set(sigma_go) != expected:
        raise ValueError(f"{path}: profile entries do not match the transform configuration")
    return profile


def cached_profile(width, height, config: FdctConfig, trials=10, seed=0,
                   recalibrate=False, directory=None) -> NoiseProfile:
    """Load a profile from the cache, computing and storing it when absent."""
    path = profile_path(width, height, config, trials, seed, directory)
    if path.exists() and not recalibrate:
        try:
            return load_profile(path)
        except (ValueError, KeyError, IndexError):
            pass
    profile = monte_carlo_profile(width, height, config, trials, seed)
    try:
        save_profile(profile, path)
    except OSError:
        pass
    return profile


# ---------------------------------------------------------------------------
# analytic sensitivity

@dataclass(frozen=True)
class SensitivityInputs:
    mag_z: float
    mag_n: float
    phase_z: float
    phase_n: float

    def __post_init__(self):
        if self.mag_z < 0 or self.mag_n < 0:
            raise ValueError("magnitudes must be non-negative")
        if self.mag_z == 0 and self.mag_n == 0:
            raise ValueError("signal and noise magnitudes cannot both be zero")


def _noisy_power(s: SensitivityInputs) -> float:
    p = s.mag_z**2 + s.mag_n**2 + 2 * s.mag_z * s.mag_n * math.cos(s.phase_z - s.phase_n)
    if p <= 1e-300:
        raise UndefinedResultError("noisy coefficient is zero: signal and noise cancel")
    return p


def magnitude_sensitivity(s: SensitivityInputs) -> float:
    """Derivative of the noisy magnitude with respect to the noise magnitude."""
    p = _noisy_power(s)
    value = (s.mag_n + s.mag_z * math.cos(s.phase_z - s.phase_n)) / math.sqrt(p)
    return min(1.0, max(-1.0, value))  # |value| <= 1 analytically; guards rounding


def phase_sensitivity(s: SensitivityInputs) -> float:
    """Derivative of the noisy phase with respect to the noise magnitude."""
    p = _noisy_power(s)
    return s.mag_z * math.sin(s.phase_n - s.phase_z) / p


# ---------------------------------------------------------------------------
# empirical sensitivity

@dataclass
class SensitivityCurves:
    """Sensitivity between consecutive noise levels, reported at the upper level."""

    sigmas: np.ndarray
    magnitude: np.ndarray  # min-max normalized
    phase: np.ndarray
    raw_magnitude: np.ndarray
    raw_phase: np.ndarray


def minmax_normalize(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def wrap_phase(angle):
    """Map angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - angle, 2 * np.pi)


def _flatten(coeffs: CurveletCoeffs) -> np.ndarray:
    return np.concatenate([arr.ravel() for _, _, arr in coeffs.wedges()])


def empirical_sensitivity_curves(image, sigma_grid, config: FdctConfig | None = None,
                                 seed: int = 0) -> SensitivityCurves:
    """Magnitude and phase sensitivity of an image's coefficients to AWGN.

    One unit-variance noise field is drawn from ``seed`` and scaled to each
    level. For levels ``s_i < s_{i+1}`` the raw sensitivity is the mean
    absolute change of the measure over all coefficients divided by the
    mean absolute change of the pure-noise coefficient magnitudes.
    """
    image = as_image(image)
    grid = np.asarray(sigma_grid, dtype=np.float64)
    if grid.ndim != 1 or len(grid) < 3:
        raise ValueError("sigma grid needs at least 3 levels")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("sigma grid must be strictly increasing")
    height, width = image.shape
    config = config or curvelet.default_config(width, height)

    unit = add_awgn(np.zeros_like(image), 1.0, seed)
    clean_c = _flatten(curvelet.forward(image, config))
    noise_c = _flatten(curvelet.forward(unit, config))
    noise_mag = np.abs(noise_c)

    mags, phases = [], []
    for s in grid:
        y = clean_c + s * noise_c  # linearity of the transform
        mags.append(np.abs(y))
        phases.append(np.angle(y))

    raw_mag, raw_phase = [], []
    for i in range(len(grid) - 1):
        denom = np.mean(np.abs((grid[i + 1] - grid[i]) * noise_mag))
        if denom <= 0:
            raise UndefinedResultError(f"pure-noise magnitude change is zero between levels {i} and {i + 1}")
        raw_mag.append(np.mean(np.abs(mags[i + 1] - mags[i])) / denom)
        raw_phase.append(np.mean(np.abs(wrap_phase(phases[i + 1] - phases[i]))) / denom)
    raw_mag = np.array(raw_mag)
    raw_phase = np.array(raw_phase)
    return SensitivityCurves(grid[1:], minmax_normalize(raw_mag), minmax_normalize(raw_phase),
                             raw_mag, raw_phase)


def trend_slope(x, y) -> float:
    """Least-squares slope of ``y`` against ``x``."""
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


# ---------------------------------------------------------------------------
# coefficient distributions

def coefficient_pdf(coeffs: CurveletCoeffs, scale: int, orientation: int, bins: int = 64,
                    part: str = "real"):
    """Normalized histogram of one wedge's real parts or magnitudes.

    Returns ``(density, edges)``; ``sum(density * diff(edges)) == 1``.
    """
    if bins < 8:
        raise ValueError(f"need at least 8 bins, got {bins}")
    try:
        arr = coeffs[scale][orientation]
    except IndexError:
        raise IndexError(f"no wedge at scale {scale}, orientation {orientation}") from None
    if arr.size == 0:
        raise ValueError("empty wedge")
    if part == "real":
        values = arr.real.ravel()
    elif part == "magnitude":
        values = np.abs(arr).ravel()
    else:
        raise ValueError(f"part must be 'real' or 'magnitude', got {part!r}")
    density, edges = np.histogram(values, bins=bins, density=True)
    return density, edges


def excess_kurtosis(values) -> float:
    return float(stats.kurtosis(np.asarray(values, dtype=np.float64).ravel(), fisher=True))
