import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppcdenoise.coeff_filters import (
    KernelParams,
    bf_finest,
    bilateral,
    hard_threshold,
    jbf_magnitude,
    partition_wedge,
    recombine,
)


def brute_bilateral(data, guide, sd, sr, hw):
    """Direct double loop over targets and in-bounds neighbours."""
    rows, cols = data.shape
    out = np.zeros(data.shape, dtype=np.result_type(data.dtype, float))
    for y in range(rows):
        for x in range(cols):
            num = 0
            den = 0.0
            for yy in range(max(0, y - hw), min(rows, y + hw + 1)):
                for xx in range(max(0, x - hw), min(cols, x + hw + 1)):
                    w = math.exp(-((yy - y) ** 2 + (xx - x) ** 2) / (2 * sd * sd))
                    w *= math.exp(-abs(guide[yy, xx] - guide[y, x]) ** 2 / (2 * sr * sr))
                    num += w * data[yy, xx]
                    den += w
            out[y, x] = num / den
    return out


def _wedge(rng, shape, scale=3.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def test_kernel_params_validation():
    assert KernelParams(1.27, 2.0).half_width == 4
    assert KernelParams(1.9, 1.0).half_width == 6
    for bad in (dict(sigma_d=0, sigma_r=1), dict(sigma_d=1, sigma_r=0), dict(sigma_d=1, sigma_r=1, half_width=0)):
        with pytest.raises(ValueError):
            KernelParams(**bad)


def test_partition_examples():
    w = np.array([[5.0, 3.0], [0.0, -4.5j]])
    p = partition_wedge(w, 4.0)
    np.testing.assert_array_equal(p.keep_mask, [[True, False], [False, True]])
    np.testing.assert_array_equal(p.thresholded, [[5, 0], [0, 4.5]])
    assert p.noisy_phase[1, 0] == 0
    assert p.noisy_phase[1, 1] == pytest.approx(-np.pi / 2)
    p0 = partition_wedge(w, 0.0)
    np.testing.assert_array_equal(p0.keep_mask, [[True, True], [False, True]])
    pall = partition_wedge(w, 10.0)
    assert not pall.keep_mask.any() and not pall.thresholded.any()
    with pytest.raises(ValueError):
        partition_wedge(w, -1)


def test_phase_range(rng):
    p = partition_wedge(-np.ones((2, 2)) + 0j, 0.0)
    assert np.all(p.noisy_phase == np.pi)
    q = partition_wedge(_wedge(rng, (20, 20)), 1.0)
    assert np.all(q.noisy_phase > -np.pi) and np.all(q.noisy_phase <= np.pi)


def test_jbf_oracle_3x3(rng):
    part = partition_wedge(_wedge(rng, (3, 3)), 3.0)
    got = jbf_magnitude(part, KernelParams(1.0, 1.0, 1))
    want = brute_bilateral(part.thresholded, part.noisy_mag, 1.0, 1.0, 1)
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


def test_bf_oracle_4x4(rng):
    w = _wedge(rng, (4, 4), 1.5)
    got = bf_finest(w, KernelParams(1.27, 2.0, 2))
    np.testing.assert_allclose(got, brute_bilateral(w, w, 1.27, 2.0, 2), rtol=0, atol=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_filters_match_oracle_random(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(rng.integers(1, 9, 2))
    w = _wedge(rng, shape)
    sd, sr = rng.uniform(0.5, 2.5), rng.uniform(0.5, 6)
    hw = int(rng.integers(1, 4))
    part = partition_wedge(w, rng.uniform(0, 5))
    np.testing.assert_allclose(jbf_magnitude(part, KernelParams(sd, sr, hw)),
                               brute_bilateral(part.thresholded, part.noisy_mag, sd, sr, hw), atol=1e-10)
    np.testing.assert_allclose(jbf_magnitude(part, KernelParams(sd, sr, hw), guide="complex"),
                               brute_bilateral(part.thresholded, part.coeffs, sd, sr, hw), atol=1e-10)
    np.testing.assert_allclose(bf_finest(w, KernelParams(sd, sr, hw)),
                               brute_bilateral(w, w, sd, sr, hw), atol=1e-10)


def test_jbf_constant_and_zero_data(rng):
    w = _wedge(rng, (6, 7))
    part = partition_wedge(w, 0.0)
    part.thresholded[:] = 2.5
    np.testing.assert_allclose(jbf_magnitude(part, KernelParams(1.9, 0.3)), 2.5, atol=1e-12)
    part.thresholded[:] = 0
    np.testing.assert_array_equal(jbf_magnitude(part, KernelParams(1.9, 0.3)), 0)
    with pytest.raises(ValueError):
        jbf_magnitude(part, KernelParams(1, 1), guide="phase")


def test_bf_constant_and_flat_kernel_limit(rng):
    c = np.full((5, 5), 2 - 3j)
    np.testing.assert_allclose(bf_finest(c, KernelParams(1.0, 1.0)), c, atol=1e-12)
    w = _wedge(rng, (3, 3))
    out = bf_finest(w, KernelParams(1e6, 1e6, 1))
    assert out[1, 1] == pytest.approx(w.mean(), abs=1e-9)
    assert out[0, 0] == pytest.approx(w[:2, :2].mean(), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**31), st.floats(0.3, 3), st.floats(0.1, 10))
def test_convexity_and_transpose_equivariance(h, w, seed, sd, sr):
    rng = np.random.default_rng(seed)
    wedge = _wedge(rng, (h, w))
    params = KernelParams(sd, sr)
    part = partition_wedge(wedge, 2.0)
    est = jbf_magnitude(part, params)
    assert est.min() >= part.thresholded.min() - 1e-12
    assert est.max() <= part.thresholded.max() + 1e-12
    bf = bf_finest(wedge, params)
    for f in (np.real, np.imag):
        assert f(bf).min() >= f(wedge).min() - 1e-12 and f(bf).max() <= f(wedge).max() + 1e-12
    np.testing.assert_allclose(bf_finest(wedge.T, params), bf.T, atol=1e-12)
    np.testing.assert_allclose(jbf_magnitude(partition_wedge(wedge.T, 2.0), params), est.T, atol=1e-12)
    np.testing.assert_array_equal(recombine(partition_wedge(wedge.T, 2.0), est.T), recombine(part, est).T)


def test_recombine_examples():
    y = 3 * np.exp(1j * np.pi / 4)
    w = np.array([[y, 10 + 0j]])
    part = partition_wedge(w, 5.0)
    out = recombine(part, np.array([[2.0, 99.0]]))
    assert out[0, 0] == pytest.approx(2 * np.exp(1j * np.pi / 4))
    assert out[0, 1] == 10
    np.testing.assert_array_equal(recombine(partition_wedge(w, 0.0), np.zeros((1, 2))), w)
    assert recombine(part, np.array([[-1.0, 0.0]]))[0, 0] == 0
    with pytest.raises(ValueError):
        recombine(part, np.zeros((2, 2)))


def test_recombine_preserves_phase(rng):
    w = _wedge(rng, (10, 10))
    part = partition_wedge(w, 4.0)
    out = recombine(part, rng.uniform(0.1, 3, w.shape))
    below = ~part.keep_mask
    np.testing.assert_allclose(np.angle(out[below]), part.noisy_phase[below], atol=1e-12)


def test_recombine_with_thresholded_is_hard_threshold(rng):
    w = _wedge(rng, (12, 9))
    part = partition_wedge(w, 4.0)
    np.testing.assert_array_equal(recombine(part, part.thresholded), hard_threshold(w, 4.0))


def test_bilateral_shape_mismatch():
    with pytest.raises(ValueError):
        bilateral(np.zeros((2, 2)), np.zeros((2, 3)), 1, 1, 1)
