"""Command-line interface.

    ppcdenoise denoise --in noisy.png --sigma 40 --out out.png [--reference clean.png]
    ppcdenoise baseline --in noisy.png --sigma 40 --out ct.png
    ppcdenoise calibrate --width 512 --height 512
    ppcdenoise metrics --in out.png --reference clean.png
    ppcdenoise sensitivity --corpus DIR --csv sens.csv
    ppcdenoise pdf --in img.png --scale 3 --orientation 1 --csv pdf.csv
    ppcdenoise table1 --corpus DIR --sigmas 10,25,50 --csv table1.csv
    ppcdenoise sweep --corpus DIR --sigma 50 --axis fine --p1 0.5,1.27,2 --p2 1,3.5,11

Scale and orientation indices on the command line and in CSV files are 1-based.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from contextlib import contextmanager
from pathlib import Path

from . import calibration, curvelet, experiments, metrics
from .calibration import UndefinedResultError
from .image import ImageFormatError, add_awgn, load_image, save_image
from .pipeline import CT_DEFAULT_K, DenoiseParams, ct_baseline, denoise

log = logging.getLogger("ppcdenoise")

METRICS_HEADER = ["image", "sigma", "method", "psnr", "ssim", "eki"]


class CliError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _non_negative(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.6f}"


@contextmanager
def _csv_out(path):
    if path is None or path == "-":
        yield csv.writer(sys.stdout, lineterminator="\n")
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        yield csv.writer(fh, lineterminator="\n")


# ---------------------------------------------------------------------------
# shared option groups

def _add_transform(p):
    p.add_argument("--nscales", type=int, help="number of scales (default from image size)")
    p.add_argument("--nangles", type=int, default=16, help="orientations at the second scale")
    p.add_argument("--trials", type=int, default=10, help="Monte Carlo trials for the noise profile")
    p.add_argument("--recalibrate", action="store_true", help="recompute the cached noise profile")
    p.add_argument("--auto-calibrate", action=argparse.BooleanOptionalAction, default=True,
                   help="compute a missing noise profile instead of failing")


def _add_params(p):
    d = DenoiseParams()
    p.add_argument("--k", type=float, default=d.k, help="threshold multiple")
    p.add_argument("--alpha", type=float, default=d.alpha, help="JBF range fraction")
    p.add_argument("--sigma-d-coarse", type=float, default=d.sigma_d_coarse)
    p.add_argument("--kr", type=float, default=None, help="BF range multiple (default 3.5 / 11)")
    p.add_argument("--sigma-d-fine", type=float, default=d.sigma_d_fine)
    p.add_argument("--k1", type=float, default=d.k1, help="GIF regularizer multiple")
    p.add_argument("--gif-radius", type=int, default=d.gif_radius)
    p.add_argument("--gif-eps-squared", action="store_true", help="use (k1*sigma)^2 as GIF epsilon")


def _add_noise(p):
    p.add_argument("--sigma", type=_non_negative, required=True, help="noise standard deviation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--add-noise", action="store_true",
                   help="treat --in as clean and add seeded AWGN of --sigma first")


def _config(args, width, height):
    base = curvelet.default_config(width, height)
    config = curvelet.FdctConfig(args.nscales or base.nscales, args.nangles, base.finest_mode)
    config.check_shape((height, width))
    return config


def _profile(args, width, height):
    config = _config(args, width, height)
    path = calibration.profile_path(width, height, config, args.trials, 0)
    if not path.exists() and not args.auto_calibrate and not args.recalibrate:
        raise CliError(f"no noise profile at {path}; run 'calibrate' or pass --auto-calibrate")
    return calibration.cached_profile(width, height, config, trials=args.trials,
                                      recalibrate=args.recalibrate)


def _params(args, config=None) -> DenoiseParams:
    return DenoiseParams(k=args.k, alpha=args.alpha, sigma_d_coarse=args.sigma_d_coarse, k_r=args.kr,
                         sigma_d_fine=args.sigma_d_fine, k1=args.k1, gif_radius=args.gif_radius,
                         gif_eps_squared=args.gif_eps_squared, fdct=config)


def _input(args):
    img = load_image(args.input)
    if args.add_noise:
        img = add_awgn(img, args.sigma, args.seed)
    return img


def _report(args, method, output):
    if args.reference is None:
        return
    ref = load_image(args.reference)
    rep = metrics.evaluate(ref, output)
    print("psnr,ssim,eki")
    print(",".join(_fmt(v) for v in rep.as_row()))
    if args.csv:
        with _csv_out(args.csv) as w:
            w.writerow(METRICS_HEADER)
            w.writerow([Path(args.input).stem, f"{args.sigma:g}", method, *map(_fmt, rep.as_row())])


# ---------------------------------------------------------------------------
# commands

def cmd_denoise(args) -> int:
    noisy = _input(args)
    height, width = noisy.shape
    profile = _profile(args, width, height)
    out = denoise(noisy, args.sigma, _params(args, profile.config), profile)
    save_image(out, args.out)
    log.info("wrote %s", args.out)
    _report(args, "proposed", out)
    return 0


def cmd_baseline(args) -> int:
    noisy = _input(args)
    height, width = noisy.shape
    profile = _profile(args, width, height)
    out = ct_baseline(noisy, args.sigma, args.k, profile)
    save_image(out, args.out)
    log.info("wrote %s", args.out)
    _report(args, "ct", out)
    return 0


def cmd_calibrate(args) -> int:
    if args.input is not None:
        height, width = load_image(args.input).shape
    elif args.width and args.height:
        width, height = args.width, args.height
    else:
        raise CliError("calibrate needs --in or both --width and --height")
    config = _config(args, width, height)
    profile = calibration.cached_profile(width, height, config, trials=args.trials, seed=args.seed,
                                         recalibrate=args.recalibrate)
    path = calibration.profile_path(width, height, config, args.trials, args.seed)
    if args.csv:
        calibration.save_profile(profile, args.csv)
        path = Path(args.csv)
    print(path)
    return 0


def cmd_metrics(args) -> int:
    ref = load_image(args.reference)
    test = load_image(args.input)
    rep = metrics.evaluate(ref, test, clamp=args.clamp)
    with _csv_out(args.csv) as w:
        w.writerow(METRICS_HEADER)
        sigma = "" if args.sigma is None else f"{args.sigma:g}"
        w.writerow([Path(args.input).stem, sigma, args.method, *map(_fmt, rep.as_row())])
    return 0


def cmd_sensitivity(args) -> int:
    images = experiments.load_corpus(args.corpus, args.max_images)
    grid = args.sigma_grid or list(experiments.DEFAULT_SIGMA_GRID)
    table = experiments.corpus_sensitivity(images, grid, seed=args.seed, nscales=args.nscales,
                                           nangles=args.nangles)
    with _csv_out(args.csv) as w:
        w.writerow(["sigma", "mag_sens", "phase_sens"])
        for s, m, p in zip(table.sigmas, table.magnitude, table.phase):
            w.writerow([f"{s:g}", _fmt(m), _fmt(p)])
    return 0


def cmd_pdf(args) -> int:
    img = load_image(args.input)
    if args.sigma:
        img = add_awgn(img, args.sigma, args.seed)
    height, width = img.shape
    coeffs = curvelet.forward(img, _config(args, width, height))
    if not 1 <= args.scale <= len(coeffs):
        raise CliError(f"--scale must be in 1..{len(coeffs)}")
    if not 1 <= args.orientation <= len(coeffs[args.scale - 1]):
        raise CliError(f"--orientation must be in 1..{len(coeffs[args.scale - 1])}")
    density, edges = calibration.coefficient_pdf(coeffs, args.scale - 1, args.orientation - 1,
                                                 args.bins, args.part)
    wedge = coeffs[args.scale - 1][args.orientation - 1]
    values = wedge.real if args.part == "real" else abs(wedge)
    log.info("excess kurtosis %.4f", calibration.excess_kurtosis(values))
    with _csv_out(args.csv) as w:
        w.writerow(["bin_left", "bin_right", "density"])
        for lo, hi, d in zip(edges[:-1], edges[1:], density):
            w.writerow([f"{lo:.6g}", f"{hi:.6g}", f"{d:.6g}"])
    return 0


def cmd_table1(args) -> int:
    images = experiments.load_corpus(args.corpus, args.max_images)
    rows = experiments.table1(images, args.sigmas, _params(args), seed=args.seed,
                              protocol=args.protocol, ct_k=args.ct_k, trials=args.trials)
    with _csv_out(args.csv) as w:
        w.writerow(["sigma", "gamma", "ct_corr", "proposed_corr"])
        for r in rows:
            w.writerow([f"{r.sigma:g}", r.gamma, _fmt(r.ct_corr), _fmt(r.proposed_corr)])
    undefined = sum(r.undefined for r in rows)
    if undefined:
        log.warning("%d correlations were undefined and left out of the averages", undefined)
    return 0


def cmd_sweep(args) -> int:
    images = experiments.load_corpus(args.corpus, args.max_images)
    result = experiments.sweep(images, args.sigma, args.axis, args.p1, args.p2, _params(args),
                               seed=args.seed, trials=args.trials)
    with _csv_out(args.csv) as w:
        w.writerow(["p1", "p2", "psnr", "ssim"])
        for p1, p2, ps, ss in result.rows:
            w.writerow([f"{p1:g}", f"{p2:g}", _fmt(ps), _fmt(ss)])
    best = result.argmax()
    print(f"argmax {result.names[0]}={best[0]:g} {result.names[1]}={best[1]:g} "
          f"psnr={best[2]:.4f} ssim={best[3]:.4f}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(prog="ppcdenoise", description="Phase-preserving curvelet denoising",
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    _sub_add = sub.add_parser
    sub.add_parser = lambda *a, **kw: _sub_add(*a, parents=[common], **kw)

    for name, fn, help_ in (("denoise", cmd_denoise, "run the proposed denoiser"),
                            ("baseline", cmd_baseline, "curvelet hard thresholding")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--reference", help="clean image; prints psnr,ssim,eki")
        p.add_argument("--csv", help="also write a metrics CSV row here")
        _add_noise(p)
        _add_transform(p)
        _add_params(p)
        if name == "baseline":
            p.set_defaults(k=CT_DEFAULT_K)
        p.set_defaults(func=fn)

    p = sub.add_parser("calibrate", help="compute and cache a noise profile")
    p.add_argument("--in", dest="input", help="take the size from this image")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="also write the profile here")
    _add_transform(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("metrics", help="PSNR, SSIM and EKI of an image against a reference")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--sigma", type=_non_negative)
    p.add_argument("--method", default="external")
    p.add_argument("--clamp", action="store_true", help="clip the test image to [0, 255] first")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("sensitivity", help="magnitude and phase noise sensitivity over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-images", type=int, default=8)
    p.add_argument("--sigma-grid", type=_float_list)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nscales", type=int)
    p.add_argument("--nangles", type=int, default=16)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("pdf", help="histogram of one wedge's coefficients")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--orientation", type=int, default=1)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--part", choices=["real", "magnitude"], default="real")
    p.add_argument("--sigma", type=_non_negative, default=0.0, help="add seeded AWGN first")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nscales", type=int)
    p.add_argument("--nangles", type=int, default=16)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_pdf)

    p = sub.add_parser("table1", help="noise-subspace correlations, CT vs proposed")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-images", type=int, default=8)
    p.add_argument("--sigmas", type=_float_list, default=[10.0, 25.0, 50.0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--protocol", choices=["retransform", "direct"], default="retransform")
    p.add_argument("--ct-k", type=float, help="CT threshold multiple (default --k)")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--csv")
    _add_params(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("sweep", help="mean PSNR/SSIM over a parameter grid")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-images", type=int, default=8)
    p.add_argument("--sigma", type=_non_negative, required=True)
    p.add_argument("--axis", choices=sorted(experiments.SWEEP_AXES), default="fine",
                   help="fine: (sigma_d_fine, k_r); coarse: (sigma_d_coarse, alpha)")
    p.add_argument("--p1", type=_float_list, required=True)
    p.add_argument("--p2", type=_float_list, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--csv")
    _add_params(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CliError, ValueError, ImageFormatError, UndefinedResultError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # any other module failure still exits nonzero with a message
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
