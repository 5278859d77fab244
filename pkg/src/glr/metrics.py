"""PSNR / SSIM quality metrics and the matching benchmark harness."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from glr.edges import binarize_gradients, select_exemplars, sobel_gradients
from glr.matching import MatchConfig, block_match, global_match

PSNR_CAP_DB = 100.0


@dataclass
class MetricResult:
    psnr_db: float
    ssim: float
    psnr_per_channel: list[float]
    ssim_per_channel: list[float]


def psnr(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB, capped at 100 when MSE is zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if peak <= 0:
        raise ValueError("peak must be positive")
    mse = np.mean((a - b) ** 2)
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(peak ** 2 / mse), PSNR_CAP_DB)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    ax = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    w = np.outer(g, g)
    return w / w.sum()


def _ssim_channel(a: np.ndarray, b: np.ndarray, peak: float,
                  win: np.ndarray) -> float:
    from numpy.lib.stride_tricks import sliding_window_view
    s = win.shape[0]
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    wa = sliding_window_view(a, (s, s))
    wb = sliding_window_view(b, (s, s))
    mu_a = (wa * win).sum(axis=(2, 3))
    mu_b = (wb * win).sum(axis=(2, 3))
    var_a = (wa ** 2 * win).sum(axis=(2, 3)) - mu_a ** 2
    var_b = (wb ** 2 * win).sum(axis=(2, 3)) - mu_b ** 2
    cov = (wa * wb * win).sum(axis=(2, 3)) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray, peak: float = 1.0,
         win_size: int = 11, win_sigma: float = 1.5) -> float:
    """Mean SSIM over all valid Gaussian windows, averaged over channels."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    h, w = a.shape[:2]
    if h < win_size or w < win_size:
        raise ValueError(f"image {h}x{w} smaller than {win_size}x{win_size} window")
    win = _gaussian_window(win_size, win_sigma)
    vals = [_ssim_channel(a[:, :, c], b[:, :, c], peak, win)
            for c in range(a.shape[2])]
    return float(np.mean(vals))


def evaluate(a: np.ndarray, b: np.ndarray, peak: float = 1.0) -> MetricResult:
    pc = [psnr(a[:, :, c:c + 1], b[:, :, c:c + 1], peak)
          for c in range(a.shape[2])]
    win = _gaussian_window()
    sc = [_ssim_channel(a[:, :, c], b[:, :, c], peak, win)
          for c in range(a.shape[2])]
    return MetricResult(psnr_db=psnr(a, b, peak), ssim=ssim(a, b, peak),
                        psnr_per_channel=pc, ssim_per_channel=sc)


# ---------------------------------------------------------------------------
# Matching benchmark

BENCH_COLUMNS = ["mode", "H", "W", "C", "P", "N_exemplars", "K",
                 "t_match_ms", "t_total_ms"]


def _timed_match(x: np.ndarray, cfg: MatchConfig, seed: int,
                 n_exemplars: int) -> tuple[float, float, int]:
    """One matching pass; returns (match ms, total ms, exemplar count).

    Total time includes the edge-map / exemplar preparation GM needs;
    match time covers the search itself. Exemplar anchors come from a
    fixed uniform grid so BM and GM rank the same workload.
    """
    h, w, _ = x.shape
    t0 = time.perf_counter()
    stride = max(1, int(np.sqrt((h - cfg.patch_size + 1)
                                * (w - cfg.patch_size + 1) / n_exemplars)))
    ex = select_exemplars([], (h, w), cfg.patch_size, uniform_interval=stride)
    gh, gv = sobel_gradients(x)
    edge = binarize_gradients(gh, gv, cfg.edge_threshold)
    t1 = time.perf_counter()
    if cfg.mode == "gm":
        global_match(x, ex, cfg, edge)
    else:
        block_match(x, ex, cfg)
    t2 = time.perf_counter()
    return (t2 - t1) * 1e3, (t2 - t0) * 1e3, len(ex)


def bench_matching(sizes, channels, modes, repeats: int = 3,
                   patch_size: int = 8, group_size: int = 32,
                   n_exemplars: int = 256, seed: int = 0) -> str:
    """Median wall time per matching mode over a grid of configurations.

    Returns a CSV string with one row per (size, channels, mode) plus
    bm/gm ratio rows when both modes are present.
    """
    rng = np.random.default_rng(seed)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(BENCH_COLUMNS + ["ratio_vs_gm"])
    for hw in sizes:
        for c in channels:
            x = rng.random((hw, hw, c))
            row_times = {}
            for mode in modes:
                cfg = MatchConfig(mode=mode, patch_size=patch_size,
                                  group_size=group_size)
                tm, tt, nex = [], [], 0
                for _ in range(repeats):
                    m, t, nex = _timed_match(x, cfg, seed, n_exemplars)
                    tm.append(m)
                    tt.append(t)
                row_times[mode] = (float(np.median(tm)), float(np.median(tt)), nex)
            for mode in modes:
                m, t, nex = row_times[mode]
                ratio = ""
                if "gm" in row_times and row_times["gm"][0] > 0:
                    ratio = f"{m / row_times['gm'][0]:.3f}"
                writer.writerow([mode, hw, hw, c, patch_size, nex,
                                 group_size, f"{m:.3f}", f"{t:.3f}", ratio])
    return buf.getvalue()
