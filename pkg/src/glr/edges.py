"""Sobel gradients, sign-split binary edge maps, and corner-seeded exemplars.

The gradient of the working image is split by sign and thresholded into
four binary maps (horizontal/vertical x positive/negative). Exemplar
patches are anchored at Shi-Tomasi corners of the channel-averaged
gradient magnitude, optionally unioned with a coarse uniform grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate, uniform_filter

# Horizontal-gradient Sobel kernel (responds to vertical edges); the
# vertical kernel is its transpose.
SOBEL_H = np.array([[-1.0, 0.0, 1.0],
                    [-2.0, 0.0, 2.0],
                    [-1.0, 0.0, 1.0]])
SOBEL_V = SOBEL_H.T.copy()


@dataclass
class EdgeMaps:
    """Four binary (H, W, C) maps: gradient sign x direction."""

    h_pos: np.ndarray
    h_neg: np.ndarray
    v_pos: np.ndarray
    v_neg: np.ndarray

    def as_tuple(self):
        return (self.h_pos, self.h_neg, self.v_pos, self.v_neg)

    @property
    def shape(self):
        return self.h_pos.shape


@dataclass
class ExemplarSet:
    """Patch anchors (top-left) with their provenance tag."""

    anchors: list[tuple[int, int]]
    tags: list[str]
    patch_size: int

    def __len__(self) -> int:
        return len(self.anchors)


def sobel_gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel Sobel correlation with edge-replicate borders."""
    img = np.asarray(img, dtype=np.float64)
    h, w, c = img.shape
    if h < 3 or w < 3:
        raise ValueError(f"image {h}x{w} too small for 3x3 Sobel")
    gh = np.empty_like(img)
    gv = np.empty_like(img)
    for ch in range(c):
        gh[:, :, ch] = correlate(img[:, :, ch], SOBEL_H, mode="nearest")
        gv[:, :, ch] = correlate(img[:, :, ch], SOBEL_V, mode="nearest")
    return gh, gv


def binarize_gradients(gh: np.ndarray, gv: np.ndarray, th: float = 0.2,
                       relative: bool = True) -> EdgeMaps:
    """Threshold sign-split (rectified) gradients into four binary maps.

    With ``relative=True`` (default) the threshold is ``th`` times the
    per-map maximum absolute gradient; otherwise ``th`` is absolute.
    """
    if th < 0:
        raise ValueError(f"threshold must be nonnegative, got {th}")
    if gh.shape != gv.shape:
        raise ValueError(f"gradient shapes differ: {gh.shape} vs {gv.shape}")
    th_h = th * np.abs(gh).max() if relative else th
    th_v = th * np.abs(gv).max() if relative else th
    return EdgeMaps(
        h_pos=(np.maximum(gh, 0.0) > th_h).astype(np.float64),
        h_neg=(np.maximum(-gh, 0.0) > th_h).astype(np.float64),
        v_pos=(np.maximum(gv, 0.0) > th_v).astype(np.float64),
        v_neg=(np.maximum(-gv, 0.0) > th_v).astype(np.float64),
    )


def _shi_tomasi_response(mag: np.ndarray) -> np.ndarray:
    """Min-eigenvalue corner score of the structure tensor, 3x3 window."""
    gx = correlate(mag, SOBEL_H, mode="nearest")
    gy = correlate(mag, SOBEL_V, mode="nearest")
    sxx = uniform_filter(gx * gx, size=3, mode="nearest")
    syy = uniform_filter(gy * gy, size=3, mode="nearest")
    sxy = uniform_filter(gx * gy, size=3, mode="nearest")
    tr = sxx + syy
    disc = np.sqrt((sxx - syy) ** 2 + 4.0 * sxy ** 2)
    return 0.5 * (tr - disc)


def detect_corners(img: np.ndarray, max_n: int = 512, nms_radius: int = 4,
                   quality: float = 0.01) -> list[tuple[int, int]]:
    """Shi-Tomasi corners of the channel-averaged gradient magnitude.

    Returns at most ``max_n`` corners, strongest first, after greedy
    non-max suppression at Chebyshev radius ``nms_radius``. Ties break
    row-major. Blank images yield an empty list.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    gh, gv = sobel_gradients(img)
    mag = np.sqrt(gh ** 2 + gv ** 2).mean(axis=2)
    resp = _shi_tomasi_response(mag)
    rmax = resp.max()
    if rmax <= 0:
        return []
    rows, cols = np.nonzero(resp >= quality * rmax)
    scores = resp[rows, cols]
    # strongest first, ties row-major
    order = np.lexsort((cols, rows, -scores))
    picked: list[tuple[int, int]] = []
    for idx in order:
        r, c = int(rows[idx]), int(cols[idx])
        if any(max(abs(r - pr), abs(c - pc)) <= nms_radius for pr, pc in picked):
            continue
        picked.append((r, c))
        if len(picked) == max_n:
            break
    return picked


def select_exemplars(corners, shape: tuple[int, int], patch_size: int,
                     uniform_interval: int | None = None) -> ExemplarSet:
    """Turn corner points into patch anchors, optionally adding a grid.

    Corners become anchors centered on the corner (clamped in-bounds,
    deduplicated). ``uniform_interval`` adds a uniform grid of anchors at
    that stride, tagged "uniform".
    """
    h, w = shape
    p = patch_size
    if p > min(h, w):
        raise ValueError(f"patch size {p} exceeds image {h}x{w}")
    seen: set[tuple[int, int]] = set()
    anchors: list[tuple[int, int]] = []
    tags: list[str] = []
    for r, c in corners:
        a = (min(max(int(r) - p // 2, 0), h - p),
             min(max(int(c) - p // 2, 0), w - p))
        if a not in seen:
            seen.add(a)
            anchors.append(a)
            tags.append("corner")
    if uniform_interval is not None:
        if uniform_interval < 1:
            raise ValueError("uniform_interval must be >= 1")
        for r in range(0, h - p + 1, uniform_interval):
            for c in range(0, w - p + 1, uniform_interval):
                if (r, c) not in seen:
                    seen.add((r, c))
                    anchors.append((r, c))
                    tags.append("uniform")
    return ExemplarSet(anchors=anchors, tags=tags, patch_size=p)
