"""Phase-preserving curvelet-domain image denoising."""

from .calibration import NoiseProfile, UndefinedResultError, cached_profile, monte_carlo_profile, thresholds
from .curvelet import CurveletCoeffs, FdctConfig, default_config, forward, inverse
from .image import ImageFormatError, add_awgn, load_image, save_image
from .metrics import MetricsReport, eki, evaluate, psnr, ssim
from .pipeline import DenoiseParams, ct_baseline, denoise, gif_ablation

__all__ = [
    "CurveletCoeffs", "DenoiseParams", "FdctConfig", "ImageFormatError", "MetricsReport",
    "NoiseProfile", "UndefinedResultError", "add_awgn", "cached_profile", "ct_baseline",
    "default_config", "denoise", "eki", "evaluate", "forward", "gif_ablation", "inverse",
    "load_image", "monte_carlo_profile", "psnr", "save_image", "ssim", "thresholds",
]
