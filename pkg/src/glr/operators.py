"""Sensing operators: CACTI temporal compression, masked-Fourier sampling,
and MSFA mosaicing. Each bundles forward, adjoint, and the diagonal of
Phi Phi^T (in the measurement domain), which the solvers exploit for
closed-form projections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class SensingOperator:
    kind: str
    forward: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray]
    gram_diag: np.ndarray          # measurement-domain diag of Phi Phi^T
    x_shape: tuple[int, int, int]
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# CACTI: y = sum_t A_t * x_t

def bernoulli_masks(h: int, w: int, t: int, seed: int = 0,
                    density: float = 0.5) -> np.ndarray:
    """Seeded i.i.d. Bernoulli masks, shape (H, W, T)."""
    rng = np.random.default_rng(seed)
    return (rng.random((h, w, t)) < density).astype(np.float64)


def cacti_forward(x: np.ndarray, masks: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != masks.shape:
        raise ValueError(f"frame shape {x.shape} != mask shape {masks.shape}")
    return (masks * x).sum(axis=2, keepdims=True)


def cacti_adjoint(y: np.ndarray, masks: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 3:
        y = y[:, :, 0]
    return masks * y[:, :, None]


def cacti_operator(masks: np.ndarray) -> SensingOperator:
    masks = np.asarray(masks, dtype=np.float64)
    h, w, t = masks.shape
    return SensingOperator(
        kind="cacti",
        forward=lambda x: cacti_forward(x, masks),
        adjoint=lambda y: cacti_adjoint(y, masks),
        gram_diag=(masks ** 2).sum(axis=2, keepdims=True),
        x_shape=(h, w, t),
        meta={"masks": masks},
    )


# ---------------------------------------------------------------------------
# Masked Fourier: y = M F(x), unitary 2-D DFT

def fourier_forward(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 3:
        x = x[:, :, 0]
    if x.shape != mask.shape:
        raise ValueError(f"image shape {x.shape} != mask shape {mask.shape}")
    return mask * np.fft.fft2(x, norm="ortho")


def fourier_adjoint(y: np.ndarray, mask: np.ndarray) -> np.ndarray:
    out = np.fft.ifft2(mask * y, norm="ortho")
    return out.real[:, :, None]


def fourier_operator(mask: np.ndarray) -> SensingOperator:
    mask = np.asarray(mask, dtype=np.float64)
    h, w = mask.shape
    return SensingOperator(
        kind="fourier",
        forward=lambda x: fourier_forward(x, mask),
        adjoint=lambda y: fourier_adjoint(y, mask),
        gram_diag=mask.copy(),   # unitary DFT: identity on sampled bins
        x_shape=(h, w, 1),
        meta={"mask": mask, "sampling_ratio": float(mask.mean())},
    )


def radial_mask(h: int, w: int, num_lines: int) -> np.ndarray:
    """Binary Fourier sampling mask of radial spokes through DC.

    Spokes at angles k*pi/num_lines are rasterized by Bresenham on the
    centered grid, the result is symmetrized under 180-degree rotation,
    and DC is always on. Returned in unshifted (fft) index order.
    """
    if num_lines < 1:
        raise ValueError("num_lines must be >= 1")
    centered = np.zeros((h, w), dtype=bool)
    cy, cx = h // 2, w // 2
    reach = int(np.ceil(np.hypot(h, w)))
    for k in range(num_lines):
        ang = k * np.pi / num_lines
        ey = int(round(reach * np.sin(ang)))
        ex = int(round(reach * np.cos(ang)))
        for py, px in _bresenham(0, 0, ey, ex):
            r, c = cy + py, cx + px
            if 0 <= r < h and 0 <= c < w:
                centered[r, c] = True
            r2, c2 = cy - py, cx - px
            if 0 <= r2 < h and 0 <= c2 < w:
                centered[r2, c2] = True
    # symmetrize about the spectrum center (conjugate symmetry for real x)
    flipped = np.zeros_like(centered)
    ys, xs = np.nonzero(centered)
    for r, c in zip(ys, xs):
        r2, c2 = 2 * cy - r, 2 * cx - c
        if 0 <= r2 < h and 0 <= c2 < w:
            flipped[r2, c2] = True
    centered |= flipped
    centered[cy, cx] = True
    return np.fft.ifftshift(centered).astype(np.float64)


def _bresenham(y0: int, x0: int, y1: int, x1: int):
    """Integer line rasterization from (y0, x0) to (y1, x1), inclusive."""
    dy, dx = abs(y1 - y0), abs(x1 - x0)
    sy = 1 if y1 >= y0 else -1
    sx = 1 if x1 >= x0 else -1
    err = dx - dy
    y, x = y0, x0
    while True:
        yield y, x
        if y == y1 and x == x1:
            return
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x += sx
        if e2 < dx:
            err += dx
            y += sy


# ---------------------------------------------------------------------------
# MSFA mosaicing: y = sum_i A_i * x_i with orthogonal partition masks

def _check_partition(masks: np.ndarray) -> None:
    c = masks.shape[2]
    for i in range(c):
        for j in range(i + 1, c):
            if np.any(masks[:, :, i] * masks[:, :, j] != 0):
                raise ValueError(f"MSFA masks {i} and {j} are not orthogonal")
    if not np.array_equal(masks.sum(axis=2), np.ones(masks.shape[:2])):
        raise ValueError("MSFA masks do not partition the sensor (sum != 1)")


def msfa_forward(x: np.ndarray, masks: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != masks.shape:
        raise ValueError(f"scene shape {x.shape} != mask shape {masks.shape}")
    return (masks * x).sum(axis=2, keepdims=True)


def msfa_adjoint(y: np.ndarray, masks: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 3:
        y = y[:, :, 0]
    return masks * y[:, :, None]


def msfa_operator(masks: np.ndarray) -> SensingOperator:
    masks = np.asarray(masks, dtype=np.float64)
    _check_partition(masks)
    h, w, c = masks.shape
    return SensingOperator(
        kind="msfa",
        forward=lambda x: msfa_forward(x, masks),
        adjoint=lambda y: msfa_adjoint(y, masks),
        gram_diag=np.ones((h, w, 1)),
        x_shape=(h, w, c),
        meta={"masks": masks},
    )


MSFA_KINDS = ("bayer-like-2x2", "periodic-3x3", "periodic-4x4", "custom-tile")


def msfa_pattern(kind: str, channels: int, h: int, w: int,
                 tile: np.ndarray | None = None) -> np.ndarray:
    """Build periodic MSFA partition masks, shape (H, W, C).

    Periodic kinds assign each cell of a k x k tile a distinct channel
    (row-major) and repeat it; custom-tile takes an explicit channel-index
    grid with every channel in 0..C-1.
    """
    if kind not in MSFA_KINDS:
        raise ValueError(f"unknown MSFA kind {kind!r}")
    if kind == "custom-tile":
        if tile is None:
            raise ValueError("custom-tile requires a tile grid")
        tile = np.asarray(tile, dtype=np.int64)
        if tile.min() < 0 or tile.max() >= channels:
            raise ValueError("tile indices out of range")
    else:
        k = {"bayer-like-2x2": 2, "periodic-3x3": 3, "periodic-4x4": 4}[kind]
        if channels != k * k:
            raise ValueError(f"{kind} requires C = {k * k}, got {channels}")
        tile = np.arange(k * k, dtype=np.int64).reshape(k, k)
    th, tw = tile.shape
    reps = (-(-h // th), -(-w // tw))
    grid = np.tile(tile, reps)[:h, :w]
    masks = np.zeros((h, w, channels))
    for ch in range(channels):
        masks[:, :, ch] = grid == ch
    return masks
