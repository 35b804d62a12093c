import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppcdenoise.spatial import GifParams, box_mean, guided_filter_self


def brute_box(img, r):
    h, w = img.shape
    out = np.empty_like(img)
    for y in range(h):
        for x in range(w):
            out[y, x] = img[max(0, y - r):y + r + 1, max(0, x - r):x + r + 1].mean()
    return out


def brute_gif(img, r, eps):
    """Per-window linear model, then average of all models covering each pixel."""
    h, w = img.shape
    a = np.zeros_like(img)
    b = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            win = img[max(0, y - r):y + r + 1, max(0, x - r):x + r + 1]
            mu, var = win.mean(), win.var()
            a[y, x] = var / (var + eps) if var + eps > 0 else 0.0
            b[y, x] = (1 - a[y, x]) * mu
    return brute_box(a, r) * img + brute_box(b, r)


def test_params_validation():
    with pytest.raises(ValueError):
        GifParams(0, 1.0)
    with pytest.raises(ValueError):
        GifParams(1, -1.0)
    with pytest.raises(ValueError):
        box_mean(np.zeros((3, 3)), 0)


@pytest.mark.parametrize("r", [1, 2, 4])
def test_box_mean_oracle(r, rng):
    img = rng.random((16, 16)) * 255
    np.testing.assert_allclose(box_mean(img, r), brute_box(img, r), rtol=0, atol=1e-10)


def test_box_mean_examples():
    np.testing.assert_allclose(box_mean(np.full((7, 5), 3.3), 2), 3.3, atol=1e-12)
    imp = np.zeros((7, 7))
    imp[3, 3] = 1
    out = box_mean(imp, 1)
    np.testing.assert_allclose(out[2:5, 2:5], 1 / 9)
    assert np.count_nonzero(np.abs(out) > 1e-15) == 9


@pytest.mark.parametrize("seed", range(20))
def test_filters_match_oracle_random(seed):
    rng = np.random.default_rng(seed)
    img = rng.random(tuple(rng.integers(1, 12, 2))) * 255
    r = int(rng.integers(1, 4))
    eps = float(rng.uniform(0, 500))
    np.testing.assert_allclose(box_mean(img, r), brute_box(img, r), atol=1e-10)
    np.testing.assert_allclose(guided_filter_self(img, GifParams(r, eps)), brute_gif(img, r, eps), atol=1e-10)


def test_gif_ramp_oracle():
    ramp = np.add.outer(np.arange(5.0), 2 * np.arange(5.0))
    np.testing.assert_allclose(guided_filter_self(ramp, GifParams(1, 4.0)), brute_gif(ramp, 1, 4.0), atol=1e-10)


def test_gif_constant_and_identity(rng):
    np.testing.assert_allclose(guided_filter_self(np.full((9, 9), 77.0), GifParams(2, 10.0)), 77.0, atol=1e-12)
    noise = rng.random((20, 20)) * 255
    np.testing.assert_allclose(guided_filter_self(noise, GifParams(2, 0.0)), noise, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 15), st.integers(1, 15), st.integers(1, 3), st.floats(0, 1e4), st.integers(0, 2**31))
def test_gif_bounded(h, w, r, eps, seed):
    img = np.random.default_rng(seed).random((h, w)) * 255
    out = guided_filter_self(img, GifParams(r, eps))
    assert out.min() >= img.min() - 1e-9 and out.max() <= img.max() + 1e-9


def test_gif_monotone_in_epsilon(rng):
    noise = rng.standard_normal((64, 64)) * 20 + 128
    smooth = box_mean(noise, 2)
    dists = [np.linalg.norm(guided_filter_self(noise, GifParams(2, e)) - smooth) for e in (1, 10, 100, 1000, 1e5)]
    assert all(a > b for a, b in zip(dists, dists[1:]))


def test_variance_clamped_on_large_offsets():
    img = np.full((6, 6), 1e8)
    img[0, 0] += 1e-8
    out = guided_filter_self(img, GifParams(1, 0.0))
    assert np.all(np.isfinite(out))
