"""Fast discrete curvelet transform, wrapping variant.

The frequency plane is split by smooth Meyer-type windows: separable
lowpass profiles define dyadic radial bands, and each band is cut into
angular wedges by a partition of unity along the pseudo-polar (concentric
square) angle. The squared windows sum to one at every frequency sample,
so with orthonormal FFTs the transform is a Parseval tight frame.

Each wedge is periodized ("wrapped") onto a small rectangle before its
inverse FFT. The rectangle is chosen so the periodization is injective on
the wedge support, which makes the adjoint an exact inverse.

Coefficient layout: ``coeffs[j][l]`` with ``j = 0`` the lowpass scale and
``j = nscales - 1`` the finest. Orientation ``l`` runs counter-clockwise
starting at the -45 degree diagonal; wedges ``l`` and ``l + n/2`` cover
antipodal frequencies and hold complex-conjugate coefficients for real
input.
"""

from __future__ import annotations

import functools
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

WAVELET = "wavelet"
CURVELET = "curvelet"


@dataclass(frozen=True)
class FdctConfig:
    """Transform geometry.

    ``nscales`` counts every scale including the lowpass; ``nangles_coarse``
    is the wedge count at the second-coarsest scale and doubles every other
    scale towards the finest.
    """

    nscales: int
    nangles_coarse: int = 16
    finest_mode: str = WAVELET

    def __post_init__(self):
        if self.nscales < 2:
            raise ValueError(f"nscales must be >= 2, got {self.nscales}")
        if self.nangles_coarse not in (8, 16, 32):
            raise ValueError(f"nangles_coarse must be 8, 16 or 32, got {self.nangles_coarse}")
        if self.finest_mode not in (WAVELET, CURVELET):
            raise ValueError(f"finest_mode must be 'wavelet' or 'curvelet', got {self.finest_mode!r}")

    def nangles(self, j: int) -> int:
        """Number of wedges at 0-based scale ``j``."""
        if j == 0:
            return 1
        if j == self.nscales - 1 and self.finest_mode == WAVELET:
            return 1
        return self.nangles_coarse * 2 ** math.ceil((j - 1) / 2)

    def check_shape(self, shape) -> None:
        height, width = shape
        if min(height, width) < 32:
            raise ValueError(f"image too small for the curvelet transform: {width}x{height} (min side 32)")
        limit = math.ceil(math.log2(min(height, width))) - 2
        if self.nscales > limit:
            raise ValueError(f"nscales={self.nscales} too large for {width}x{height} (max {limit})")


def default_config(width: int, height: int) -> FdctConfig:
    if min(width, height) < 32:
        raise ValueError(f"image too small for the curvelet transform: {width}x{height} (min side 32)")
    return FdctConfig(nscales=math.ceil(math.log2(min(width, height))) - 3)


def meyer_nu(x):
    """Smooth step, 0 for x <= 0 and 1 for x >= 1, with nu(x) + nu(1 - x) = 1."""
    x = np.clip(x, 0.0, 1.0)
    return x**4 * (35 - 84 * x + 70 * x**2 - 20 * x**3)


def _lowpass_profile(t):
    # 1 on |t| <= 1, smooth decay to 0 at |t| = 2
    t = np.abs(t)
    # cos(pi/2) is not exactly 0, so the support edge is enforced explicitly
    return np.where(t >= 2.0, 0.0, np.cos(0.5 * np.pi * meyer_nu(t - 1.0)))


def _angle_coordinate(xi, eta):
    """Position along the unit-square perimeter in [0, 8), counter-clockwise.

    0 at the -45 degree diagonal; antipodal frequencies differ by exactly 4.
    ``xi`` is the (vertical) row frequency, ``eta`` the column frequency.
    """
    u = np.zeros(np.broadcast(xi, eta).shape)
    axi, aeta = np.abs(xi), np.abs(eta)
    with np.errstate(divide="ignore", invalid="ignore"):
        east = (eta > 0) & (axi <= aeta)
        north = (xi > 0) & (aeta < axi)
        west = (eta < 0) & (axi <= aeta)
        south = (xi < 0) & (aeta < axi)
        u = np.where(east, 1 + xi / eta, u)
        u = np.where(north, 3 - eta / xi, u)
        u = np.where(west, 5 + xi / eta, u)
        u = np.where(south, 7 - eta / xi, u)
    return np.mod(u, 8.0)


ANGULAR_TRANSITION = 0.5  # half-width of the angular roll-off, in wedge widths


def _angular_window(u, l, n):
    """Wedge ``l`` of an ``n``-piece periodic partition of unity on [0, 8)."""
    width = 8.0 / n
    half = width * ANGULAR_TRANSITION
    start = l * width
    # offset from the wedge's left tick, folded into [-4, 4)
    d = np.mod(u - start + 4.0, 8.0) - 4.0
    rise = np.sin(0.5 * np.pi * meyer_nu((d + half) / (2 * half)))
    fall = np.cos(0.5 * np.pi * meyer_nu((d - width + half) / (2 * half)))
    v = np.where(d < half, rise, np.where(d > width - half, fall, 1.0))
    v = np.where((d <= -half) | (d >= width + half), 0.0, v)
    return v


@dataclass
class WedgeWindow:
    """Frequency support of one wedge and its wrapping onto a rectangle."""

    scale: int
    orientation: int
    shape: tuple
    support: np.ndarray  # flat indices into the (unshifted) image spectrum
    weights: np.ndarray  # window values on the support
    wrap: np.ndarray  # flat indices into the wrapped rectangle
    partner: int  # orientation of the conjugate wedge (itself if self-paired)


@dataclass
class WindowSet:
    config: FdctConfig
    shape: tuple
    wedges: list = field(default_factory=list)  # wedges[j][l]

    def squared_sum(self) -> np.ndarray:
        """Sum of squared windows on the full frequency grid."""
        total = np.zeros(self.shape[0] * self.shape[1])
        for scale in self.wedges:
            for w in scale:
                np.add.at(total, w.support, w.weights**2)
        return total.reshape(self.shape)


def _frequency_grid(n):
    # integer frequencies in FFT order; the two representatives differ only at Nyquist
    k = np.fft.fftfreq(n, d=1.0 / n).round().astype(int)
    k_alt = k.copy()
    if n % 2 == 0:
        k_alt[k == -n // 2] = n // 2
    return k, k_alt


def _make_wedge(scale, orientation, partner, flat, py, px, weights, full_shape=None):
    keep = weights > 0
    flat, py, px, weights = flat[keep], py[keep], px[keep], weights[keep]
    if full_shape is not None:
        rows, cols = full_shape
    else:
        rows_a = py.max() - py.min() + 1
        cols_a = _max_span(py, px)
        cols_b = px.max() - px.min() + 1
        rows_b = _max_span(px, py)
        if rows_a * cols_a <= rows_b * cols_b:
            rows, cols = rows_a, cols_a
        else:
            rows, cols = rows_b, cols_b
    wrap = np.mod(py, rows) * cols + np.mod(px, cols)
    if len(np.unique(wrap)) != len(wrap):
        raise RuntimeError(f"wedge ({scale}, {orientation}) wrapping is not injective")
    return WedgeWindow(scale, orientation, (int(rows), int(cols)), flat, weights, wrap, partner)


def _max_span(key, value):
    """Largest (max - min + 1) of ``value`` within groups of equal ``key``."""
    order = np.lexsort((value, key))
    key, value = key[order], value[order]
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    ends = np.r_[starts[1:], len(key)] - 1
    return int(np.max(value[ends] - value[starts]) + 1)


@functools.lru_cache(maxsize=16)
def build_windows(config: FdctConfig, width: int, height: int) -> WindowSet:
    """Construct every wedge window for a ``height x width`` image."""
    config.check_shape((height, width))
    nscales = config.nscales
    ky, ky_alt = _frequency_grid(height)
    kx, kx_alt = _frequency_grid(width)
    KY, KX = np.meshgrid(ky, kx, indexing="ij")
    xi = KY / (height / 2.0)
    eta = KX / (width / 2.0)

    # nested separable lowpass profiles; the finest one is flat up to 1/3 of Nyquist
    def lowpass(j):
        s = (1.0 / 3.0) * 2.0 ** (j - (nscales - 2))
        return _lowpass_profile(xi / s) * _lowpass_profile(eta / s)

    phis = [lowpass(j) for j in range(nscales - 1)]
    radial = [phis[0]]
    for j in range(1, nscales - 1):
        radial.append(np.sqrt(np.maximum(phis[j] ** 2 - phis[j - 1] ** 2, 0.0)))
    radial.append(np.sqrt(np.maximum(1.0 - phis[-1] ** 2, 0.0)))

    # angular coordinates of both Nyquist representatives
    reps = []
    for ya in (ky, ky_alt):
        for xa in (kx, kx_alt):
            YA, XA = np.meshgrid(ya, xa, indexing="ij")
            reps.append((YA, XA, _angle_coordinate(YA / (height / 2.0), XA / (width / 2.0))))

    windows = WindowSet(config, (height, width))
    for j in range(nscales):
        rad = radial[j].ravel()
        band = np.flatnonzero(rad > 0)
        n = config.nangles(j)
        if n == 1:
            full = (height, width) if j == nscales - 1 else None
            w = _make_wedge(j, 0, 0, band, KY.ravel()[band], KX.ravel()[band], rad[band], full)
            windows.wedges.append([w])
            continue
        us = np.stack([r[2].ravel()[band] for r in reps])
        ys = np.stack([r[0].ravel()[band] for r in reps])
        xs = np.stack([r[1].ravel()[band] for r in reps])
        # samples whose representatives disagree must always be examined
        ambiguous = np.flatnonzero(np.any(us != us[0], axis=0))
        order = np.argsort(us[0], kind="stable")
        u_sorted = us[0][order]
        span = 8.0 / n
        scale_wedges = []
        for l in range(n):
            lo, hi = l * span - span * ANGULAR_TRANSITION, (l + 1) * span + span * ANGULAR_TRANSITION
            segments = [(lo, hi)] if lo >= 0 and hi <= 8 else [(lo % 8, 8.0), (0.0, hi % 8)]
            cand = [order[np.searchsorted(u_sorted, a, "left"):np.searchsorted(u_sorted, b, "right")]
                    for a, b in segments]
            cand = np.unique(np.concatenate(cand + [ambiguous]))
            v = _angular_window(us[:, cand], l, n)
            keep = np.any(v > 0, axis=0)
            active, v = cand[keep], v[:, keep]
            # Nyquist samples are placed at the representative nearest the wedge
            pick = np.argmax(v, axis=0)
            weights = rad[band][active] * np.sqrt(np.mean(v**2, axis=0))
            py = ys[pick, active]
            px = xs[pick, active]
            scale_wedges.append(
                _make_wedge(j, l, (l + n // 2) % n, band[active], py, px, weights)
            )
        windows.wedges.append(scale_wedges)
    return windows


class CurveletCoeffs:
    """Complex wedge coefficients, indexed ``coeffs[j][l]``."""

    def __init__(self, data, shape, config: FdctConfig):
        self.data = data
        self.shape = tuple(shape)
        self.config = config

    def __getitem__(self, j):
        return self.data[j]

    def __len__(self):
        return len(self.data)

    def __iter__(self):
        return iter(self.data)

    def wedges(self):
        """Yield ``(j, l, array)`` for every wedge."""
        for j, scale in enumerate(self.data):
            for l, arr in enumerate(scale):
                yield j, l, arr

    def map(self, fn):
        """New coefficients with ``fn(j, l, array)`` applied to every wedge."""
        return CurveletCoeffs(
            [[fn(j, l, arr) for l, arr in enumerate(scale)] for j, scale in enumerate(self.data)],
            self.shape,
            self.config,
        )

    def copy(self):
        return self.map(lambda j, l, arr: arr.copy())

    def __add__(self, other):
        return CurveletCoeffs(
            [[a + b for a, b in zip(sa, sb)] for sa, sb in zip(self.data, other.data)],
            self.shape,
            self.config,
        )

    def __mul__(self, scalar):
        return self.map(lambda j, l, arr: arr * scalar)

    __rmul__ = __mul__


def forward(image, config: FdctConfig | None = None) -> CurveletCoeffs:
    """Curvelet coefficients of a 2D image."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ValueError(f"expected a 2D image, got shape {image.shape}")
    height, width = image.shape
    if config is None:
        config = default_config(width, height)
    windows = build_windows(config, width, height)
    spectrum = np.fft.fft2(image, norm="ortho").ravel()
    data = []
    for scale in windows.wedges:
        row = []
        for w in scale:
            buf = np.zeros(w.shape[0] * w.shape[1], dtype=complex)
            buf[w.wrap] = spectrum[w.support] * w.weights
            row.append(np.fft.ifft2(buf.reshape(w.shape), norm="ortho"))
        data.append(row)
    return CurveletCoeffs(data, (height, width), config)


def inverse(coeffs: CurveletCoeffs, config: FdctConfig | None = None, real: bool = False):
    """Adjoint (and exact inverse) of :func:`forward`.

    Returns a complex image unless ``real`` is set, in which case the
    imaginary residue is discarded.
    """
    config = config or coeffs.config
    height, width = coeffs.shape
    windows = build_windows(config, width, height)
    if len(coeffs.data) != len(windows.wedges):
        raise ValueError(f"coefficients have {len(coeffs.data)} scales, config expects {len(windows.wedges)}")
    spectrum = np.zeros(height * width, dtype=complex)
    for j, (scale, wscale) in enumerate(zip(coeffs.data, windows.wedges)):
        if len(scale) != len(wscale):
            raise ValueError(f"scale {j}: {len(scale)} wedges, config expects {len(wscale)}")
        for l, (arr, w) in enumerate(zip(scale, wscale)):
            if arr.shape != w.shape:
                raise ValueError(f"wedge ({j}, {l}) has shape {arr.shape}, expected {w.shape}")
            buf = np.fft.fft2(arr, norm="ortho").ravel()
            spectrum[w.support] += w.weights * buf[w.wrap]
    out = np.fft.ifft2(spectrum.reshape(height, width), norm="ortho")
    return out.real if real else out


def coeff_energy(coeffs: CurveletCoeffs) -> float:
    return float(sum(np.sum(np.abs(arr) ** 2) for _, _, arr in coeffs.wedges()))


def zeros_like(coeffs: CurveletCoeffs) -> CurveletCoeffs:
    return coeffs.map(lambda j, l, arr: np.zeros_like(arr))


def conjugate_partner(config: FdctConfig, j: int, l: int) -> int:
    n = config.nangles(j)
    return l if n == 1 else (l + n // 2) % n


_HEADER = struct.Struct("<4I")


def dump_coefficients(coeffs: CurveletCoeffs, directory) -> list:
    """Write one binary file per wedge.

    Layout: little-endian uint32 header (scale, orientation, rows, cols),
    1-based scale and orientation, then rows*cols interleaved float64
    (re, im) pairs in row-major order.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for j, l, arr in coeffs.wedges():
        path = directory / f"wedge_{j + 1:02d}_{l + 1:03d}.bin"
        pairs = np.empty(arr.shape + (2,), dtype="<f8")
        pairs[..., 0] = arr.real
        pairs[..., 1] = arr.imag
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(j + 1, l + 1, arr.shape[0], arr.shape[1]))
            fh.write(pairs.tobytes())
        paths.append(path)
    return paths


def load_wedge(path):
    """Read one dumped wedge; returns ``(scale, orientation, array)`` with 1-based indices."""
    raw = Path(path).read_bytes()
    scale, orientation, rows, cols = _HEADER.unpack_from(raw)
    pairs = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if pairs.size != rows * cols * 2:
        raise ValueError(f"{path}: payload size does not match header {rows}x{cols}")
    pairs = pairs.reshape(rows, cols, 2)
    return scale, orientation, pairs[..., 0] + 1j * pairs[..., 1]
