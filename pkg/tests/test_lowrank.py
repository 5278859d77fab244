"""Weighted singular value thresholding against an independent SVD oracle,
plus the image-space regularization pass."""

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from glr.lowrank import WnnmParams, glr_regularize, wnnm_prox
from glr.patches import gather_group


def oracle_wnnm(m, params):
    """Weighted SVT via scipy's gesvd driver (different LAPACK routine than
    the production path's gesdd)."""
    u, s, vt = scipy.linalg.svd(m, full_matrices=False,
                                lapack_driver="gesvd")
    k = m.shape[1]
    if params.uniform_weight is not None:
        w = np.full_like(s, params.uniform_weight)
    else:
        sig_hat = np.sqrt(np.maximum(s ** 2 - k * params.noise_sigma ** 2, 0.0))
        w = (params.c_weight * np.sqrt(k) * params.noise_sigma ** 2
             / (sig_hat + params.eps))
    return (u * np.maximum(s - w, 0.0)) @ vt


def numerical_rank(m):
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int((s > 1e-8 * s[0]).sum())


def test_wnnm_zero_matrix():
    out = wnnm_prox(np.zeros((6, 4)), WnnmParams(noise_sigma=0.1))
    assert np.array_equal(out, np.zeros((6, 4)))


def test_wnnm_zero_noise_identity(rng):
    m = rng.standard_normal((12, 8))
    out = wnnm_prox(m, WnnmParams(noise_sigma=0.0))
    np.testing.assert_allclose(out, m, atol=1e-10)


def test_wnnm_rank1_closed_form():
    u = np.zeros((5, 1))
    u[0] = 1.0
    v = np.ones((1, 4)) / 2.0
    sigma = 3.0
    m = sigma * u @ v
    params = WnnmParams(noise_sigma=0.2)
    k = 4
    sig_hat = np.sqrt(max(sigma ** 2 - k * params.noise_sigma ** 2, 0.0))
    w = params.c_weight * np.sqrt(k) * params.noise_sigma ** 2 / (sig_hat + params.eps)
    expected = max(sigma - w, 0.0) * u @ v
    np.testing.assert_allclose(wnnm_prox(m, params), expected, atol=1e-12)


def test_wnnm_matches_independent_svd_oracle(rng):
    for _ in range(20):
        m = rng.standard_normal((int(rng.integers(2, 20)),
                                 int(rng.integers(2, 20))))
        params = WnnmParams(noise_sigma=float(rng.random() * 0.5))
        np.testing.assert_allclose(wnnm_prox(m, params),
                                   oracle_wnnm(m, params), atol=1e-8)


def test_wnnm_uniform_weight_is_plain_svt(rng):
    m = rng.standard_normal((10, 6))
    out = wnnm_prox(m, WnnmParams(uniform_weight=0.5))
    np.testing.assert_allclose(out, oracle_wnnm(m, WnnmParams(uniform_weight=0.5)),
                               atol=1e-10)
    # soft thresholding shrinks every singular value by exactly 0.5
    s_in = np.linalg.svd(m, compute_uv=False)
    s_out = np.linalg.svd(out, compute_uv=False)
    np.testing.assert_allclose(s_out, np.maximum(s_in - 0.5, 0.0), atol=1e-10)


def test_wnnm_rejects_non_finite():
    m = np.ones((3, 3))
    m[1, 1] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        wnnm_prox(m, WnnmParams())


def test_wnnm_params_validation():
    with pytest.raises(ValueError):
        WnnmParams(c_weight=0.0)
    with pytest.raises(ValueError):
        WnnmParams(eps=0.0)
    with pytest.raises(ValueError):
        WnnmParams(noise_sigma=-1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 1.0))
def test_wnnm_rank_monotone_and_nonexpansive(seed, sigma):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((int(rng.integers(2, 15)), int(rng.integers(2, 15))))
    out = wnnm_prox(m, WnnmParams(noise_sigma=sigma))
    assert numerical_rank(out) <= numerical_rank(m)
    norm_in = np.linalg.norm(m, 2)
    assert np.linalg.norm(out, 2) <= norm_in + 1e-12 * norm_in


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_wnnm_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((8, 5))
    q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    lhs = wnnm_prox(q @ m, WnnmParams(noise_sigma=0.3))
    rhs = q @ wnnm_prox(m, WnnmParams(noise_sigma=0.3))
    np.testing.assert_allclose(lhs, rhs, atol=1e-8)


def test_regularize_empty_groups_identity(rng):
    x = rng.random((8, 8, 1))
    out = glr_regularize(x, [], WnnmParams(noise_sigma=0.1))
    assert np.array_equal(out, x)
    assert out is not x


def test_regularize_constant_image_unchanged():
    x = np.full((10, 10, 1), 0.6)
    g = gather_group(x, [(0, 0), (2, 2), (4, 4)], 4)
    out = glr_regularize(x, [g], WnnmParams(noise_sigma=0.0))
    np.testing.assert_allclose(out, x, atol=1e-10)


def test_regularize_locality(rng):
    x = rng.random((12, 12, 1))
    g = gather_group(x, [(0, 0), (1, 1)], 4)
    out = glr_regularize(x, [g], WnnmParams(noise_sigma=0.2))
    covered = np.zeros((12, 12, 1), dtype=bool)
    covered[0:5, 0:5, :] = True
    assert np.array_equal(out[~covered], x[~covered])


def test_regularize_denoises_low_rank_stack(rng):
    # clean image made of one repeated patch; noisy version must improve
    patch = rng.random((4, 4, 1))
    clean = np.tile(patch, (3, 3, 1))
    noisy = clean + 0.1 * rng.standard_normal(clean.shape)
    anchors = [(r, c) for r in (0, 4, 8) for c in (0, 4, 8)]
    g = gather_group(noisy, anchors, 4)
    out = glr_regularize(noisy, [g], WnnmParams(noise_sigma=0.1))
    assert np.mean((out - clean) ** 2) < np.mean((noisy - clean) ** 2)
