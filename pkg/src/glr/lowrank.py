"""Weighted nuclear norm minimization (WNNM) on patch groups and the
image-space low-rank regularization pass.

Each group matrix is shrunk by one-pass weighted singular value
thresholding; denoised patches are scattered back and averaged where
they overlap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from glr.patches import PatchGroup, scatter_group


@dataclass
class WnnmParams:
    c_weight: float = 2.0 * np.sqrt(2.0)
    eps: float = 1e-16
    noise_sigma: float = 0.0
    uniform_weight: float | None = None  # test hook: plain SVT at this level

    def __post_init__(self):
        if self.c_weight <= 0:
            raise ValueError("c_weight must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


def _fix_svd_signs(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic sign convention: first nonzero entry of each left
    singular vector made nonnegative."""
    for j in range(u.shape[1]):
        col = u[:, j]
        nz = np.nonzero(np.abs(col) > 1e-14)[0]
        if nz.size and col[nz[0]] < 0:
            u[:, j] = -col
            vt[j, :] = -vt[j, :]
    return u, vt


def wnnm_prox(m: np.ndarray, params: WnnmParams) -> np.ndarray:
    """Weighted singular value thresholding of one group matrix.

    Signal singular values are estimated as sqrt(max(s^2 - K*sigma^2, 0))
    for a K-column group; each weight is c*sqrt(K)*sigma^2 over the
    estimate, and singular values shrink by their weight.
    """
    m = np.asarray(m, dtype=np.float64)
    if not np.isfinite(m).all():
        raise ValueError("non-finite entries in group matrix")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    u, vt = _fix_svd_signs(u, vt)
    k = m.shape[1]
    if params.uniform_weight is not None:
        w = np.full_like(s, params.uniform_weight)
    else:
        sig_hat = np.sqrt(np.maximum(s ** 2 - k * params.noise_sigma ** 2, 0.0))
        w = params.c_weight * np.sqrt(k) * params.noise_sigma ** 2 / (sig_hat + params.eps)
    s_new = np.maximum(s - w, 0.0)
    return (u * s_new) @ vt


def glr_regularize(x: np.ndarray, groups: list[PatchGroup],
                   params: WnnmParams) -> np.ndarray:
    """Low-rank shrinkage of every group, scattered back into the image.

    Covered pixels get the count-normalized average of their denoised
    patches; uncovered pixels pass through unchanged.
    """
    x = np.asarray(x, dtype=np.float64)
    if not groups:
        return x.copy()
    acc = np.zeros_like(x)
    cnt = np.zeros_like(x)
    for g in groups:
        den = PatchGroup(patch_size=g.patch_size, positions=g.positions,
                         matrix=wnnm_prox(g.matrix, params))
        scatter_group(acc, cnt, den)
    out = x.copy()
    covered = cnt > 0
    out[covered] = acc[covered] / cnt[covered]
    return out
