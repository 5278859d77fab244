"""Global low-rank (GLR) optimization for compressive image reconstruction.

Images and volumes are plain numpy arrays of shape (H, W, C), float64,
row-major with channels last. CACTI video treats time as the channel axis.
"""

from glr.patches import PatchGroup, gather_group, scatter_group
from glr.edges import EdgeMaps, ExemplarSet, sobel_gradients, binarize_gradients, \
    detect_corners, select_exemplars
from glr.matching import MatchConfig, SimilarityHeatMap, xcorr2_valid_batch, \
    global_match, block_match
from glr.lowrank import WnnmParams, wnnm_prox, glr_regularize
from glr.operators import SensingOperator, cacti_operator, fourier_operator, \
    msfa_operator, radial_mask, msfa_pattern, bernoulli_masks
from glr.solvers import SolverConfig, ReconReport, gap_solve, admm_solve, \
    regularize_dispatch, tv_denoise
from glr.metrics import MetricResult, psnr, ssim, bench_matching
from glr.tensorio import read_tensor, write_tensor, TensorFileError

__all__ = [
    "PatchGroup", "gather_group", "scatter_group",
    "EdgeMaps", "ExemplarSet", "sobel_gradients", "binarize_gradients",
    "detect_corners", "select_exemplars",
    "MatchConfig", "SimilarityHeatMap", "xcorr2_valid_batch",
    "global_match", "block_match",
    "WnnmParams", "wnnm_prox", "glr_regularize",
    "SensingOperator", "cacti_operator", "fourier_operator", "msfa_operator",
    "radial_mask", "msfa_pattern", "bernoulli_masks",
    "SolverConfig", "ReconReport", "gap_solve", "admm_solve",
    "regularize_dispatch", "tv_denoise",
    "MetricResult", "psnr", "ssim", "bench_matching",
    "read_tensor", "write_tensor", "TensorFileError",
]
