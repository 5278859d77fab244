"""Seeded synthetic test scenes used by the demo subcommand and the
acceptance suite."""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter


def textured_background(h: int, w: int, seed: int = 0,
                        period: int = 12) -> np.ndarray:
    """Globally self-repeating texture: a periodic weave plus a gentle
    random shading field."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    weave = np.sin(2 * np.pi * yy / period) * np.sin(2 * np.pi * xx / period)
    shade = gaussian_filter(rng.random((h, w)), 4.0)
    return np.clip(0.4 + 0.2 * weave + 0.1 * shade, 0.0, 1.0)


def moving_square_video(h: int, w: int, t: int, seed: int = 0,
                        square: int | None = None) -> np.ndarray:
    """Bright square translating over a shared textured background."""
    sq = square or max(h // 6, 4)
    bg = textured_background(h, w, seed)
    x = np.repeat(bg[:, :, None], t, axis=2)
    step = max(1, h // 20)
    for k in range(t):
        r = min(h // 4 + k * step, h - sq)
        c = min(w // 4 + k * step, w - sq)
        x[r:r + sq, c:c + sq, k] = 0.95
    return np.clip(x, 0.0, 1.0)


def piecewise_phantom(h: int, w: int, seed: int = 0,
                      n_motifs: int = 30) -> np.ndarray:
    """Piecewise-smooth phantom with dense gradients and strong global
    self-similarity: repeated soft-edged cross motifs over a smooth
    random shading field, shape (H, W, 1)."""
    rng = np.random.default_rng(seed)
    bg = gaussian_filter(rng.standard_normal((h, w)), 6.0)
    x = 0.35 + 0.15 * bg / max(np.abs(bg).max(), 1e-12)
    m = max(7, min(h, w) // 12) | 1   # odd motif size
    arm = m // 4
    cross = np.zeros((m, m))
    cross[m // 2 - arm // 2:m // 2 + arm // 2 + 1, :] = 1.0
    cross[:, m // 2 - arm // 2:m // 2 + arm // 2 + 1] = 1.0
    cross = gaussian_filter(cross, 0.8)
    pos: set[tuple[int, int]] = set()
    tries = 0
    while len(pos) < n_motifs and tries < 10000:
        tries += 1
        r, c = rng.integers(0, h - m), rng.integers(0, w - m)
        if all(abs(r - pr) > m + 1 or abs(c - pc) > m + 1 for pr, pc in pos):
            pos.add((int(r), int(c)))
    for r, c in sorted(pos):
        x[r:r + m, c:c + m] += 0.4 * cross
    return np.clip(x, 0.0, 1.0)[:, :, None]


def multispectral_scene(h: int, w: int, c: int, seed: int = 0) -> np.ndarray:
    """Multichannel scene: the cross-motif phantom shared across channels,
    mixed with a smooth shading field under smooth per-channel weights."""
    rng = np.random.default_rng(seed)
    base = piecewise_phantom(h, w, seed)[:, :, 0]
    sh = gaussian_filter(rng.random((h, w)), 6.0)
    sh = 0.2 + 0.5 * (sh - sh.min()) / (sh.max() - sh.min() + 1e-12)
    x = np.empty((h, w, c))
    for ch in range(c):
        a = np.clip(0.55 + 0.4 * np.cos(2 * np.pi * ch / max(c, 1) + 0.7),
                    0.15, 0.95)
        x[:, :, ch] = np.clip(a * base + (1 - a) * sh, 0.0, 1.0)
    return x


def one_textured_quadrant(h: int, w: int, seed: int = 0,
                          channels: int = 1) -> np.ndarray:
    """Mostly-smooth scene with fine structure only in the top-left
    quadrant (used by the corner-economy checks)."""
    rng = np.random.default_rng(seed)
    x = np.full((h, w), 0.3)
    x += 0.1 * gaussian_filter(rng.random((h, w)), 8.0)
    qh, qw = h // 2, w // 2
    yy, xx = np.mgrid[0:qh, 0:qw]
    x[:qh, :qw] += 0.3 * (np.sin(2 * np.pi * yy / 8) * np.sin(2 * np.pi * xx / 8) > 0)
    x = np.clip(x, 0.0, 1.0)
    return np.repeat(x[:, :, None], channels, axis=2)


SCENES = {
    "cacti-square": moving_square_video,
    "phantom": piecewise_phantom,
    "multispectral": multispectral_scene,
    "quadrant": one_textured_quadrant,
}
