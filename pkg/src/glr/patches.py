"""Patch gather/scatter primitives shared by the matching and low-rank stages.

A patch group stacks K similar P x P x C patches as columns of a
(P*P*C) x K matrix; column 0 is always the exemplar itself. Patches
vectorize row-major with channels last, so a block copied out of an
(H, W, C) array flattens with plain ``ravel()``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PatchGroup:
    """Similar patches gathered from one exemplar.

    matrix column j holds the vectorized patch anchored (top-left) at
    positions[j]. ``padded`` counts trailing columns that repeat the
    exemplar because too few admissible matches existed.
    """

    patch_size: int
    positions: list[tuple[int, int]]
    matrix: np.ndarray
    padded: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.matrix.shape[1]


def _check_anchor(h: int, w: int, p: int, pos: tuple[int, int], idx: int) -> None:
    r, c = pos
    if not (0 <= r <= h - p and 0 <= c <= w - p):
        raise ValueError(f"anchor {idx} at {pos} out of bounds for patch size {p} "
                         f"in {h}x{w} image")


def gather_group(img: np.ndarray, positions, patch_size: int) -> PatchGroup:
    """Extract patches at the given top-left anchors into a PatchGroup."""
    img = np.asarray(img, dtype=np.float64)
    h, w, c = img.shape
    p = patch_size
    positions = [tuple(map(int, pos)) for pos in positions]
    for i, pos in enumerate(positions):
        _check_anchor(h, w, p, pos, i)
    mat = np.empty((p * p * c, len(positions)), dtype=np.float64)
    for j, (r, col) in enumerate(positions):
        mat[:, j] = img[r:r + p, col:col + p, :].ravel()
    return PatchGroup(patch_size=p, positions=positions, matrix=mat)


def scatter_group(acc: np.ndarray, cnt: np.ndarray, group: PatchGroup) -> None:
    """Add each patch of the group into the accumulator, in place.

    ``cnt`` is incremented by one at every (pixel, channel) a patch covers;
    acc/cnt (where cnt > 0) reconstitutes the image when all groups agree.
    """
    if acc.shape != cnt.shape:
        raise ValueError(f"accumulator shape {acc.shape} != counter shape {cnt.shape}")
    h, w, c = acc.shape
    p = group.patch_size
    for j, (r, col) in enumerate(group.positions):
        _check_anchor(h, w, p, (r, col), j)
        acc[r:r + p, col:col + p, :] += group.matrix[:, j].reshape(p, p, c)
        cnt[r:r + p, col:col + p, :] += 1.0
