"""Patch matching: local block matching and global matching via batched
valid cross-correlation of binary edge maps.

Global matching scores every valid patch position against each exemplar
by the number of overlapping edge pixels, summed over the four sign-split
direction maps. The correlation has three interchangeable backends
(direct, im2col+matmul, FFT) that agree exactly on binary inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import correlate2d

from glr.edges import EdgeMaps, ExemplarSet
from glr.patches import PatchGroup, gather_group

MODES = ("bm-uniform", "bm-corner", "bm-corner-uniform", "gm")
BACKENDS = ("direct", "im2col", "fft")


@dataclass
class MatchConfig:
    patch_size: int = 8
    group_size: int = 64
    bm_window: int = 20          # local search radius for block matching
    bm_stride: int = 1
    exemplar_stride: int = 6     # vanilla uniform exemplar grid stride
    mode: str = "gm"
    min_separation: int | None = None   # default ceil(P/4)
    backend: str = "im2col"
    edge_threshold: float = 0.2
    max_corners: int = 512
    corner_quality: float = 0.01
    nms_radius: int | None = None       # default ceil(P/2)
    rerank_pixel: bool = False          # pixel-MSE re-rank of GM candidates

    def __post_init__(self):
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")
        if self.patch_size < 2:
            raise ValueError("patch_size must be >= 2")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.mode.startswith("bm") and self.bm_window < self.patch_size:
            raise ValueError("bm_window must be >= patch_size for bm modes")

    @property
    def sep(self) -> int:
        if self.min_separation is not None:
            return self.min_separation
        return -(-self.patch_size // 4)

    @property
    def nms(self) -> int:
        if self.nms_radius is not None:
            return self.nms_radius
        return -(-self.patch_size // 2)


@dataclass
class SimilarityHeatMap:
    """(H-P+1, W-P+1, N) overlap-count scores, one slice per exemplar."""

    values: np.ndarray
    anchors: list[tuple[int, int]]
    patch_size: int


def _xcorr_direct(x: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    h, w, c = x.shape
    n, p, _, _ = kernels.shape
    out = np.zeros((h - p + 1, w - p + 1, n))
    for j in range(n):
        for ch in range(c):
            out[:, :, j] += correlate2d(x[:, :, ch], kernels[j, :, :, ch],
                                        mode="valid")
    return out


def _xcorr_im2col(x: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    h, w, c = x.shape
    n, p, _, _ = kernels.shape
    # windows: (H-P+1, W-P+1, P, P, C) view, flattened to columns
    win = sliding_window_view(x, (p, p), axis=(0, 1))  # (oh, ow, c, p, p)
    win = win.transpose(0, 1, 3, 4, 2)                 # (oh, ow, p, p, c)
    cols = win.reshape(-1, p * p * c)
    kmat = kernels.reshape(n, p * p * c)
    return (cols @ kmat.T).reshape(h - p + 1, w - p + 1, n)


def _next_pow2(n: int) -> int:
    m = 1
    while m < n:
        m *= 2
    return m


def _xcorr_fft(x: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    h, w, c = x.shape
    n, p, _, _ = kernels.shape
    fh, fw = _next_pow2(h + p - 1), _next_pow2(w + p - 1)
    fx = np.fft.fft2(x, s=(fh, fw), axes=(0, 1))        # (fh, fw, c)
    fk = np.fft.fft2(kernels, s=(fh, fw), axes=(1, 2))  # (n, fh, fw, c)
    # correlation = multiply by conjugated kernel spectrum, sum channels
    spec = (fx[None] * np.conj(fk)).sum(axis=3)
    full = np.fft.ifft2(spec, axes=(1, 2)).real          # (n, fh, fw)
    return full[:, :h - p + 1, :w - p + 1].transpose(1, 2, 0)


def xcorr2_valid_batch(x: np.ndarray, kernels, backend: str = "im2col") -> np.ndarray:
    """Valid 2-D cross-correlation of ``x`` (H, W, C) with N (P, P, C)
    kernels, channels summed. Returns (H-P+1, W-P+1, N)."""
    x = np.asarray(x, dtype=np.float64)
    kernels = np.asarray(kernels, dtype=np.float64)
    if kernels.ndim == 3:
        kernels = kernels[None]
    n, p, q, c = kernels.shape
    if p != q:
        raise ValueError("kernels must be square")
    h, w, xc = x.shape
    if c != xc:
        raise ValueError(f"channel mismatch: input {xc}, kernels {c}")
    if p > h or p > w:
        raise ValueError(f"kernel {p}x{p} larger than input {h}x{w}")
    if backend == "direct":
        return _xcorr_direct(x, kernels)
    if backend == "im2col":
        return _xcorr_im2col(x, kernels)
    if backend == "fft":
        return _xcorr_fft(x, kernels)
    raise ValueError(f"unknown backend {backend!r}")


def similarity_heatmap(edge: EdgeMaps, exemplars: ExemplarSet,
                       backend: str = "im2col") -> SimilarityHeatMap:
    """Edge-overlap heat map: sum of the four per-map correlations of each
    exemplar's edge patches against the full edge maps."""
    p = exemplars.patch_size
    if backend == "im2col":
        # fuse the four maps into one 4C-channel correlation; float32 is
        # exact here (overlap counts stay far below 2**24)
        x = np.concatenate(edge.as_tuple(), axis=2).astype(np.float32)
        kernels = np.stack([x[r:r + p, c:c + p, :]
                            for r, c in exemplars.anchors])
        h, w, c = x.shape
        n = kernels.shape[0]
        win = sliding_window_view(x, (p, p), axis=(0, 1))
        cols = win.transpose(0, 1, 3, 4, 2).reshape(-1, p * p * c)
        heat = (cols @ kernels.reshape(n, p * p * c).T)
        heat = heat.reshape(h - p + 1, w - p + 1, n).astype(np.float64)
    else:
        heat = None
        for m in edge.as_tuple():
            kernels = np.stack([m[r:r + p, c:c + p, :]
                                for r, c in exemplars.anchors])
            part = xcorr2_valid_batch(m, kernels, backend=backend)
            heat = part if heat is None else heat + part
    # binary inputs give exact integer counts; round kills FFT noise
    heat = np.rint(heat)
    return SimilarityHeatMap(values=heat, anchors=list(exemplars.anchors),
                             patch_size=p)


def top_k_positions(slice2d: np.ndarray, anchor: tuple[int, int], k: int,
                    min_separation: int) -> tuple[list[tuple[int, int]], int]:
    """Pick the K best positions of one heat-map slice.

    The exemplar's own anchor occupies slot 0. Remaining slots take the
    highest scores (ties row-major), skipping positions within
    ``min_separation`` Chebyshev distance of an already-chosen one. If the
    slice runs out, separation is relaxed to 0; any still-missing slots
    repeat the anchor and are reported as padding.
    """
    oh, ow = slice2d.shape
    vals = slice2d.ravel()

    def run(flat_order, limited):
        # a position is admissible iff it lies outside every chosen
        # position's Chebyshev ball of radius sep; track the union of those
        # balls in a flat byte mask so each candidate test is O(1)
        chosen = [anchor]
        idxs = flat_order.tolist()
        for sep in (min_separation, 0):
            if len(chosen) >= k:
                break
            blocked = bytearray(oh * ow)

            def block(r, c):
                lo, hi = max(0, c - sep), min(ow, c + sep + 1)
                row = b"\x01" * (hi - lo)
                for rr in range(max(0, r - sep), min(oh, r + sep + 1)):
                    blocked[rr * ow + lo:rr * ow + hi] = row

            for pr, pc in chosen:
                block(pr, pc)
            for idx in idxs:
                if len(chosen) >= k:
                    break
                if blocked[idx]:
                    continue
                r, c = divmod(idx, ow)
                chosen.append((r, c))
                block(r, c)
        if limited and len(chosen) < k:
            return None  # candidate pool too small; caller retries unlimited
        return chosen

    # ascending flat index is row-major order, so a stable descending-value
    # sort reproduces the full (score desc, row, col) ranking exactly
    chosen = None
    m = k * (2 * min_separation + 1) ** 2 + 1
    if m < vals.size:
        # rank only the top-m scores plus every score tied with the cutoff;
        # each chosen position blocks at most (2*sep+1)**2 candidates, so a
        # pool of m always fills the group
        part = np.argpartition(-vals, m - 1)[:m]
        cutoff = vals[part].min()
        cand = np.nonzero(vals >= cutoff)[0]
        order = cand[np.argsort(-vals[cand], kind="stable")]
        chosen = run(order, limited=True)
    if chosen is None:
        chosen = run(np.argsort(-vals, kind="stable"), limited=False)
    padded = k - len(chosen)
    chosen.extend([anchor] * padded)
    return chosen, padded


def global_match(x: np.ndarray, exemplars: ExemplarSet, cfg: MatchConfig,
                 edge: EdgeMaps) -> list[PatchGroup]:
    """Group the top-K most structurally similar patches per exemplar,
    ranked by the edge-overlap heat map; patches gathered from ``x``."""
    heat = similarity_heatmap(edge, exemplars, backend=cfg.backend)
    groups = []
    for n, anchor in enumerate(exemplars.anchors):
        positions, padded = top_k_positions(heat.values[:, :, n], anchor,
                                            cfg.group_size, cfg.sep)
        if cfg.rerank_pixel:
            ref = gather_group(x, [anchor], cfg.patch_size).matrix[:, 0]
            cand = gather_group(x, positions, cfg.patch_size)
            d = ((cand.matrix - ref[:, None]) ** 2).sum(axis=0)
            order = [0] + sorted(range(1, len(positions)),
                                 key=lambda j: (d[j], positions[j]))
            positions = [positions[j] for j in order]
        g = gather_group(x, positions, cfg.patch_size)
        g.padded = padded
        groups.append(g)
    return groups


def block_match(x: np.ndarray, exemplars: ExemplarSet,
                cfg: MatchConfig) -> list[PatchGroup]:
    """Classic local KNN block matching by squared pixel distance."""
    x = np.asarray(x, dtype=np.float64)
    h, w, c = x.shape
    p = cfg.patch_size
    win = sliding_window_view(x, (p, p), axis=(0, 1))  # (oh, ow, c, p, p)
    groups = []
    for r0, c0 in exemplars.anchors:
        ref = win[r0, c0]
        rlo, rhi = max(0, r0 - cfg.bm_window), min(h - p, r0 + cfg.bm_window)
        clo, chi = max(0, c0 - cfg.bm_window), min(w - p, c0 + cfg.bm_window)
        rows = np.arange(rlo, rhi + 1, cfg.bm_stride)
        cols = np.arange(clo, chi + 1, cfg.bm_stride)
        cand = win[np.ix_(rows, cols)]
        d = ((cand - ref) ** 2).sum(axis=(2, 3, 4)).ravel()
        rr = np.repeat(rows, len(cols))
        cc = np.tile(cols, len(rows))
        own = (rr == r0) & (cc == c0)
        d, rr, cc = d[~own], rr[~own], cc[~own]
        order = np.lexsort((cc, rr, d))[:cfg.group_size - 1]
        positions = [(r0, c0)] + [(int(rr[i]), int(cc[i])) for i in order]
        padded = cfg.group_size - len(positions)
        positions.extend([(r0, c0)] * padded)
        g = gather_group(x, positions, p)
        g.padded = max(padded, 0)
        groups.append(g)
    return groups
