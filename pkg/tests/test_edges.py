"""Sobel gradients, binarized edge maps, corner detection, exemplar anchors."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glr.edges import (SOBEL_H, SOBEL_V, binarize_gradients, detect_corners,
                       select_exemplars, sobel_gradients)
from glr.scenes import one_textured_quadrant


def naive_sobel(img, kernel):
    h, w, c = img.shape
    out = np.zeros_like(img)
    for ch in range(c):
        # edge-replicate padding, then valid 3x3 correlation
        pad = np.pad(img[:, :, ch], 1, mode="edge")
        for r in range(h):
            for col in range(w):
                out[r, col, ch] = (pad[r:r + 3, col:col + 3] * kernel).sum()
    return out


def test_sobel_constant_is_zero():
    gh, gv = sobel_gradients(np.full((5, 5, 2), 3.7))
    np.testing.assert_allclose(gh, 0.0, atol=1e-12)
    np.testing.assert_allclose(gv, 0.0, atol=1e-12)


def test_sobel_vertical_step():
    x = np.zeros((7, 8, 1))
    x[:, 4:, 0] = 1.0
    gh, gv = sobel_gradients(x)
    # response of 4 on the two columns straddling the step, zero elsewhere
    expected = np.zeros(8)
    expected[3:5] = 4.0
    for r in range(7):
        assert np.array_equal(gh[r, :, 0], expected)
    assert np.abs(gv).max() == 0.0


def test_sobel_matches_loop_oracle(rng):
    img = rng.random((7, 7, 2))
    gh, gv = sobel_gradients(img)
    np.testing.assert_allclose(gh, naive_sobel(img, SOBEL_H), atol=1e-12)
    np.testing.assert_allclose(gv, naive_sobel(img, SOBEL_V), atol=1e-12)


def test_sobel_rejects_tiny_image():
    with pytest.raises(ValueError, match="too small"):
        sobel_gradients(np.zeros((2, 5, 1)))


def test_binarize_sign_cases():
    gh = np.array([[[0.5]], [[-0.5]], [[0.1]]])
    gv = np.zeros_like(gh)
    e = binarize_gradients(gh, gv, th=0.3, relative=False)
    assert e.h_pos[0, 0, 0] == 1 and e.h_neg[0, 0, 0] == 0
    assert e.h_pos[1, 0, 0] == 0 and e.h_neg[1, 0, 0] == 1
    assert e.h_pos[2, 0, 0] == 0 and e.h_neg[2, 0, 0] == 0


def test_binarize_subthreshold_all_zero():
    gh = np.full((3, 3, 1), 0.2)
    gv = np.full((3, 3, 1), -0.2)
    e = binarize_gradients(gh, gv, th=0.3, relative=False)
    for m in e.as_tuple():
        assert np.array_equal(m, np.zeros((3, 3, 1)))


def test_binarize_negative_threshold_rejected():
    z = np.zeros((3, 3, 1))
    with pytest.raises(ValueError, match="nonnegative"):
        binarize_gradients(z, z, th=-0.1)


def test_binarize_relative_threshold_scale_invariant(rng):
    gh = rng.standard_normal((6, 6, 1))
    gv = rng.standard_normal((6, 6, 1))
    a = binarize_gradients(gh, gv, th=0.2)
    b = binarize_gradients(5.0 * gh, 5.0 * gv, th=0.2)
    for ma, mb in zip(a.as_tuple(), b.as_tuple()):
        assert np.array_equal(ma, mb)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_binarize_binary_and_disjoint(seed, th):
    rng = np.random.default_rng(seed)
    gh = rng.standard_normal((5, 5, 2))
    gv = rng.standard_normal((5, 5, 2))
    e = binarize_gradients(gh, gv, th=th)
    for m in e.as_tuple():
        assert set(np.unique(m)) <= {0.0, 1.0}
    assert np.all(e.h_pos * e.h_neg == 0)
    assert np.all(e.v_pos * e.v_neg == 0)


def test_corners_constant_image_empty():
    assert detect_corners(np.full((16, 16, 1), 0.5)) == []


def test_corners_white_square_vertices():
    img = np.zeros((32, 32, 1))
    img[10:20, 12:22, 0] = 1.0
    top4 = detect_corners(img, max_n=4, nms_radius=3)
    for v in [(10, 12), (10, 21), (19, 12), (19, 21)]:
        d = min(max(abs(v[0] - r), abs(v[1] - c)) for r, c in top4)
        assert d <= 1


def test_corners_max_n_one_is_global_strongest():
    img = np.zeros((32, 32, 1))
    img[10:20, 12:22, 0] = 1.0
    best = detect_corners(img, max_n=1, nms_radius=3)
    all_c = detect_corners(img, max_n=50, nms_radius=3)
    assert best == all_c[:1]


def test_corners_invariant_to_constant_offset(rng):
    img = rng.random((24, 24, 1))
    assert detect_corners(img) == detect_corners(img + 0.37)


def test_corners_nms_chebyshev_separation(rng):
    img = rng.random((32, 32, 2))
    for rad in (2, 4, 7):
        cs = detect_corners(img, max_n=100, nms_radius=rad)
        for i, (r1, c1) in enumerate(cs):
            for r2, c2 in cs[i + 1:]:
                assert max(abs(r1 - r2), abs(c1 - c2)) > rad


def test_select_exemplars_pure_grid():
    ex = select_exemplars([], (20, 20), 4, uniform_interval=8)
    assert ex.anchors == [(0, 0), (0, 8), (0, 16), (8, 0), (8, 8), (8, 16),
                          (16, 0), (16, 8), (16, 16)]
    assert all(t == "uniform" for t in ex.tags)


def test_select_exemplars_boundary_clamp():
    ex = select_exemplars([(0, 0), (19, 19)], (20, 20), 8)
    assert ex.anchors == [(0, 0), (12, 12)]
    assert ex.tags == ["corner", "corner"]


def test_select_exemplars_dedup():
    ex = select_exemplars([(0, 0), (1, 1), (2, 2)], (20, 20), 8)
    # all clamp to (0, 0) except the shifted ones that dedup
    assert len(set(ex.anchors)) == len(ex.anchors)


def test_select_exemplars_patch_too_large():
    with pytest.raises(ValueError, match="exceeds"):
        select_exemplars([], (6, 6), 8)


def test_corner_mode_fewer_anchors_on_quadrant_scene():
    x = one_textured_quadrant(64, 64, seed=0)
    corners = detect_corners(x, max_n=512, nms_radius=4)
    corner_set = select_exemplars(corners, (64, 64), 8)
    uniform_set = select_exemplars([], (64, 64), 8, uniform_interval=6)
    assert len(corner_set) < len(uniform_set)
