import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppcdenoise import curvelet as C
from ppcdenoise.calibration import UndefinedResultError
from ppcdenoise.metrics import (
    MetricsReport,
    eki,
    evaluate,
    laplacian,
    noise_subspace_correlation,
    pearson,
    psnr,
    ssim,
)


def test_psnr_examples(rng):
    img = rng.random((16, 16)) * 255
    assert psnr(img, img) == math.inf
    assert psnr(img, img + 1) == pytest.approx(20 * math.log10(255), abs=1e-12)
    assert psnr(img, img + 1) == pytest.approx(48.1308, abs=1e-4)
    with pytest.raises(ValueError):
        psnr(img, img[:-1])


def test_ssim_examples(lena):
    assert ssim(lena, lena) == pytest.approx(1.0, abs=1e-12)
    assert ssim(lena, 255 - lena) < 0.5
    with pytest.raises(ValueError):
        ssim(np.zeros((10, 20)), np.zeros((10, 20)))
    with pytest.raises(ValueError):
        ssim(lena, lena[:, :-1])


def _ssim_oracle(x, y):
    # direct evaluation at each valid window position
    g = np.exp(-((np.arange(11) - 5) ** 2) / (2 * 1.5**2))
    g = np.outer(g, g) / np.outer(g, g).sum()
    c1, c2 = (0.01 * 255) ** 2, (0.03 * 255) ** 2
    vals = []
    for i in range(x.shape[0] - 10):
        for j in range(x.shape[1] - 10):
            a, b = x[i:i + 11, j:j + 11], y[i:i + 11, j:j + 11]
            mx, my = (g * a).sum(), (g * b).sum()
            vx, vy = (g * a * a).sum() - mx**2, (g * b * b).sum() - my**2
            cxy = (g * a * b).sum() - mx * my
            vals.append((2 * mx * my + c1) * (2 * cxy + c2) / ((mx**2 + my**2 + c1) * (vx + vy + c2)))
    return np.mean(vals)


def test_ssim_oracle(rng):
    x = rng.random((16, 14)) * 255
    y = x + rng.standard_normal(x.shape) * 20
    assert ssim(x, y) == pytest.approx(_ssim_oracle(x, y), abs=1e-12)


def test_eki_examples(rng):
    a = rng.random((8, 8)) * 255
    b = rng.random((8, 8)) * 255
    assert eki(a, a) == pytest.approx(1.0)
    assert eki(a, a + 17.0) == pytest.approx(1.0)
    assert psnr(a, a + 17.0) < 30
    # direct oracle: replicate-border Laplacian by explicit indexing, then Pearson
    def lap(m):
        p = np.pad(m, 1, mode="edge")
        return p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:] - 4 * m
    la, lb = lap(a).ravel(), lap(b).ravel()
    want = np.sum((la - la.mean()) * (lb - lb.mean())) / np.sqrt(
        np.sum((la - la.mean()) ** 2) * np.sum((lb - lb.mean()) ** 2))
    assert eki(a, b) == pytest.approx(want, abs=1e-12)
    np.testing.assert_allclose(laplacian(a), lap(a), atol=1e-12)
    with pytest.raises(UndefinedResultError):
        eki(np.full((8, 8), 3.0), a)
    with pytest.raises(ValueError):
        eki(np.zeros((2, 2)), np.zeros((2, 2)))


def test_pearson_examples():
    a = np.array([1.0, 2.0, 3.0])
    assert pearson(a, a) == pytest.approx(1)
    assert pearson(a, -a) == pytest.approx(-1)
    assert pearson(a, [1, 2, 4]) == pytest.approx(0.98198, abs=1e-5)
    with pytest.raises(UndefinedResultError):
        pearson(a, [2, 2, 2])
    with pytest.raises(ValueError):
        pearson([1.0], [2.0])
    with pytest.raises(ValueError):
        pearson(a, [1, 2])


@settings(max_examples=50, deadline=None)
@given(st.integers(11, 24), st.integers(11, 24), st.integers(0, 2**31), st.floats(0, 80))
def test_symmetry_and_ranges(h, w, seed, noise):
    rng = np.random.default_rng(seed)
    a = rng.random((h, w)) * 255
    b = a + rng.standard_normal((h, w)) * noise
    assert psnr(a, b) == psnr(b, a)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)
    assert eki(a, b) == pytest.approx(eki(b, a), abs=1e-12)
    r = evaluate(a, b)
    assert -1 - 1e-12 <= r.ssim <= 1 + 1e-12
    assert -1 - 1e-12 <= r.eki <= 1 + 1e-12


def test_evaluate_clamp(rng):
    a = rng.random((16, 16)) * 255
    b = a + 100
    assert evaluate(a, b, clamp=True).psnr > evaluate(a, b).psnr
    assert isinstance(evaluate(a, a), MetricsReport)
    assert evaluate(a, a).as_row()[1:] == pytest.approx([1, 1])


@pytest.fixture(scope="module")
def coeff_sets():
    rng = np.random.default_rng(5)
    clean = rng.random((64, 64)) * 255
    cfg = C.default_config(64, 64)
    cc = C.forward(clean, cfg)
    nc = C.forward(clean + rng.standard_normal((64, 64)) * 25, cfg)
    lam = {(j, l): 10.0 for j in range(cfg.nscales) for l in range(cfg.nangles(j))}
    return cc, nc, lam


def test_noise_subspace_correlation(coeff_sets):
    cc, nc, lam = coeff_sets
    assert noise_subspace_correlation(cc, cc, nc, lam, 1) == pytest.approx(1.0)
    zeros = C.zeros_like(cc)
    with pytest.raises(UndefinedResultError):
        noise_subspace_correlation(cc, zeros, nc, lam, 1)
    with pytest.raises(ValueError):
        noise_subspace_correlation(cc, cc, nc, lam, 0)
    with pytest.raises(ValueError):
        noise_subspace_correlation(cc, cc, nc, lam, 2)
    empty = {k: 0.0 for k in lam}
    with pytest.raises(UndefinedResultError):
        noise_subspace_correlation(cc, cc, nc, empty, 1)
    # mask is strict: |noisy| < lambda
    r = noise_subspace_correlation(cc, nc, nc, lam, 1)
    assert -1 <= r <= 1
