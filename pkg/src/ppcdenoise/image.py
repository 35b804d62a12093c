"""Grayscale image handling: validation, file I/O, resizing and seeded AWGN.

Images are plain 2D ``float64`` numpy arrays in nominal [0, 255] range.
Values are never clamped during processing, only when written to disk.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

BT601 = (0.299, 0.587, 0.114)


class ImageFormatError(ValueError):
    """Raised for unreadable, unsupported or malformed image files."""


def as_image(pixels) -> np.ndarray:
    """Validate and convert to a finite 2D float64 array."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image must be a non-empty 2D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or Inf values")
    return arr


def rgb_to_luma(rgb) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    return rgb[..., 0] * BT601[0] + rgb[..., 1] * BT601[1] + rgb[..., 2] * BT601[2]


def _read_pgm(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    magic = raw[:2]
    if magic not in (b"P2", b"P5"):
        raise ImageFormatError(f"{path}: not a P2/P5 PGM file")

    # header: magic, width, height, maxval; '#' comments allowed between tokens
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(raw):
            raise ImageFormatError(f"{path}: truncated PGM header")
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise ImageFormatError(f"{path}: malformed PGM header") from exc
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: invalid PGM dimensions {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"{path}: unsupported PGM maxval {maxval} (only 8-bit)")

    if magic == b"P5":
        data = raw[pos + 1:pos + 1 + width * height]
        if len(data) != width * height:
            raise ImageFormatError(f"{path}: truncated PGM raster")
        pixels = np.frombuffer(data, dtype=np.uint8)
    else:
        values = raw[pos:].split()
        if len(values) < width * height:
            raise ImageFormatError(f"{path}: truncated PGM raster")
        pixels = np.array([int(v) for v in values[:width * height]])
        if pixels.min() < 0 or pixels.max() > maxval:
            raise ImageFormatError(f"{path}: PGM sample outside [0, {maxval}]")
    return pixels.reshape(height, width).astype(np.float64)


def _read_png(path: Path) -> np.ndarray:
    try:
        with PILImage.open(path) as im:
            mode = im.mode
            if mode in ("L", "P"):
                if mode == "P":
                    im = im.convert("RGB")
                    return rgb_to_luma(np.asarray(im))
                return np.asarray(im, dtype=np.float64)
            if mode in ("RGB", "RGBA"):
                return rgb_to_luma(np.asarray(im.convert("RGB")))
            if mode == "LA":
                return np.asarray(im.convert("L"), dtype=np.float64)
    except OSError as exc:
        raise ImageFormatError(f"{path}: cannot read PNG ({exc})") from exc
    raise ImageFormatError(f"{path}: unsupported PNG mode {mode!r} (need 8-bit gray or RGB)")


def load_image(path: str | os.PathLike) -> np.ndarray:
    """Read an 8-bit PGM (P2/P5) or PNG as a float64 luma image.

    Color PNGs are converted with BT.601 weights.
    """
    path = Path(path)
    if not path.is_file():
        raise ImageFormatError(f"{path}: no such file")
    ext = path.suffix.lower()
    if ext == ".pgm":
        return _read_pgm(path)
    if ext == ".png":
        return _read_png(path)
    raise ImageFormatError(f"{path}: unsupported extension {ext!r} (use .pgm or .png)")


def quantize(image) -> np.ndarray:
    """Clamp to [0, 255] and round half-up to uint8."""
    arr = np.asarray(image, dtype=np.float64)
    return np.floor(np.clip(arr, 0.0, 255.0) + 0.5).astype(np.uint8)


def save_image(image, path: str | os.PathLike) -> None:
    """Write as binary PGM (P5) or PNG, chosen by extension."""
    path = Path(path)
    data = quantize(as_image(image))
    ext = path.suffix.lower()
    if ext == ".pgm":
        height, width = data.shape
        with open(path, "wb") as fh:
            fh.write(b"P5\n%d %d\n255\n" % (width, height))
            fh.write(data.tobytes())
    elif ext == ".png":
        PILImage.fromarray(data, mode="L").save(path)
    else:
        raise ImageFormatError(f"{path}: unsupported extension {ext!r} (use .pgm or .png)")


def resize_bilinear(image, new_width: int, new_height: int) -> np.ndarray:
    """Bilinear resize with corner-aligned sample grids and edge clamping."""
    image = as_image(image)
    if new_width < 1 or new_height < 1:
        raise ValueError(f"target size must be at least 1x1, got {new_width}x{new_height}")
    height, width = image.shape
    if (new_height, new_width) == (height, width):
        return image.copy()

    def coords(n_src, n_dst):
        if n_dst == 1:
            return np.zeros(1)
        return np.arange(n_dst) * ((n_src - 1) / (n_dst - 1))

    ys = coords(height, new_height)
    xs = coords(width, new_width)
    y0 = np.clip(np.floor(ys).astype(int), 0, height - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    x1 = np.minimum(x0 + 1, width - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]

    top = image[np.ix_(y0, x0)] * (1 - wx) + image[np.ix_(y0, x1)] * wx
    bottom = image[np.ix_(y1, x0)] * (1 - wx) + image[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bottom * wy


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; the noise stream is fixed for a given seed and numpy release."""
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def add_awgn(image, sigma: float, seed: int) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise of std ``sigma``. The result is not clamped."""
    image = as_image(image)
    if sigma < 0:
        raise ValueError(f"noise sigma must be non-negative, got {sigma}")
    noise = make_rng(seed).standard_normal(image.shape)
    return image + sigma * noise
