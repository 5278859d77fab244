"""Command-line interface.

Subcommands: demo, simulate, reconstruct, mask gen, metrics, bench.
Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from glr import scenes
from glr.config import ConfigError, OperatorSpec, parse_run_config
from glr.metrics import bench_matching, psnr, ssim
from glr.operators import bernoulli_masks, msfa_pattern, radial_mask
from glr.solvers import solve
from glr.tensorio import TensorFileError, read_tensor, read_tile_file, \
    write_tensor


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_png(path: str, t: np.ndarray, peak: float = 1.0) -> None:
    from PIL import Image
    if t.ndim == 3 and t.shape[2] not in (1, 3):
        raise ConfigError("PNG preview needs a 1- or 3-channel tensor")
    arr = np.clip(t / peak, 0.0, 1.0)
    arr = (arr * 255.0 + 0.5).astype(np.uint8)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    Image.fromarray(arr).save(path)


def cmd_demo(args) -> int:
    if args.scene not in scenes.SCENES:
        raise ConfigError(f"unknown scene {args.scene!r}; "
                          f"choose from {sorted(scenes.SCENES)}")
    if args.scene == "cacti-square":
        x = scenes.moving_square_video(args.height, args.width, args.frames,
                                       seed=args.seed)
    elif args.scene == "phantom":
        x = scenes.piecewise_phantom(args.height, args.width, seed=args.seed)
    elif args.scene == "multispectral":
        x = scenes.multispectral_scene(args.height, args.width, args.channels,
                                       seed=args.seed)
    else:
        x = scenes.one_textured_quadrant(args.height, args.width,
                                         seed=args.seed,
                                         channels=args.channels)
    write_tensor(args.out, x)
    if args.png:
        _write_png(args.png, x[:, :, :1])
    _progress(f"wrote {args.scene} scene {x.shape} to {args.out}")
    return 0


def _operator_from_args(args, x_shape=None) -> tuple:
    h = args.height
    w = args.width
    if x_shape is not None:
        h, w = x_shape[0], x_shape[1]
    spec = OperatorSpec(kind=args.model, mask_path=args.mask,
                        frames=getattr(args, "frames", 8),
                        num_lines=getattr(args, "num_lines", 30),
                        msfa_kind=getattr(args, "msfa_kind", "periodic-4x4"),
                        tile_path=getattr(args, "tile", None),
                        channels=getattr(args, "channels", 16),
                        height=h, width=w, mask_seed=args.seed)
    try:
        return spec.build(), spec
    except (ValueError, TensorFileError) as e:
        raise ConfigError(str(e)) from e


def cmd_simulate(args) -> int:
    x = read_tensor(args.scene)
    if args.model == "cacti":
        args.frames = x.shape[2]
    elif args.model == "msfa":
        args.channels = x.shape[2]
    op, _ = _operator_from_args(args, x_shape=x.shape)
    if op.x_shape != x.shape:
        raise ConfigError(f"scene shape {x.shape} does not match operator "
                          f"shape {op.x_shape}")
    y = op.forward(x)
    write_tensor(args.out, np.ascontiguousarray(y))
    if args.save_mask:
        key = "mask" if args.model == "fourier" else "masks"
        write_tensor(args.save_mask, op.meta[key])
    _progress(f"simulated {args.model} measurement {y.shape} to {args.out}")
    return 0


def cmd_mask_gen(args) -> int:
    if args.kind == "radial":
        m = radial_mask(args.height, args.width, args.num_lines)
    elif args.kind == "msfa":
        tile = read_tile_file(args.tile) if args.tile else None
        kind = "custom-tile" if args.tile else args.msfa_kind
        try:
            m = msfa_pattern(kind, args.channels, args.height, args.width,
                             tile=tile)
        except ValueError as e:
            raise ConfigError(str(e)) from e
    elif args.kind == "cacti-bernoulli":
        m = bernoulli_masks(args.height, args.width, args.frames,
                            seed=args.seed)
    else:
        raise ConfigError(f"unknown mask kind {args.kind!r}")
    write_tensor(args.out, m)
    _progress(f"wrote {args.kind} mask {m.shape} to {args.out}")
    return 0


def cmd_reconstruct(args) -> int:
    try:
        run = parse_run_config(Path(args.config).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    if args.seed is not None:
        run.solver.seed = args.seed
    if args.iters is not None:
        run.solver.max_iters = args.iters
    if args.algorithm:
        run.solver.algorithm = args.algorithm
    if args.regularizer:
        run.solver.regularizer = args.regularizer
    try:
        op = run.operator.build()
    except (ValueError, TensorFileError) as e:
        raise ConfigError(str(e)) from e
    y = read_tensor(args.measurement)
    ref = read_tensor(args.ref) if args.ref else None
    _progress(f"reconstructing with {run.solver.algorithm}+"
              f"{run.solver.regularizer}, {run.solver.max_iters} iterations")
    x, report = solve(op, y, run.solver, ref=ref)
    write_tensor(args.out, x)
    if args.report:
        Path(args.report).write_text(report.to_csv())
    if args.trace:
        Path(args.trace).write_text(report.to_jsonl())
    if args.png:
        _write_png(args.png, x[:, :, :1], peak=run.solver.peak)
    if ref is not None:
        _progress(f"final PSNR {report.final_psnr:.2f} dB")
    _progress(f"wrote reconstruction {x.shape} to {args.out}")
    return 0


def cmd_metrics(args) -> int:
    a = read_tensor(args.ref)
    b = read_tensor(args.test)
    if a.shape != b.shape:
        raise ConfigError(f"shape mismatch: {a.shape} vs {b.shape}")
    p = psnr(a, b, peak=args.peak)
    s = ssim(a, b, peak=args.peak)
    print(json.dumps({"psnr_db": p, "ssim": s}))
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    channels = [int(c) for c in args.channels.split(",")]
    modes = args.modes.split(",")
    csv_text = bench_matching(sizes, channels, modes, repeats=args.repeats,
                              patch_size=args.patch_size,
                              n_exemplars=args.exemplars, seed=args.seed)
    if args.out:
        Path(args.out).write_text(csv_text)
        _progress(f"wrote benchmark CSV to {args.out}")
    else:
        print(csv_text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="glr",
                                 description="Global low-rank compressive "
                                             "image reconstruction")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("demo", help="generate a seeded synthetic scene")
    p.add_argument("--scene", default="cacti-square")
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--frames", type=int, default=4)
    p.add_argument("--channels", type=int, default=6)
    p.add_argument("--out", required=True)
    p.add_argument("--png")
    add_common(p)
    p.set_defaults(fn=cmd_demo)

    p = sub.add_parser("simulate", help="apply a sensing model to a scene")
    p.add_argument("--model", required=True,
                   choices=["cacti", "fourier", "msfa"])
    p.add_argument("--scene", required=True)
    p.add_argument("--mask", help="tensor file with masks")
    p.add_argument("--num-lines", type=int, default=30)
    p.add_argument("--msfa-kind", default="periodic-4x4")
    p.add_argument("--tile")
    p.add_argument("--out", required=True)
    p.add_argument("--save-mask")
    add_common(p)
    p.set_defaults(fn=cmd_simulate, height=0, width=0)

    p = sub.add_parser("mask", help="mask utilities")
    msub = p.add_subparsers(dest="mask_command", required=True)
    g = msub.add_parser("gen", help="generate a sampling mask")
    g.add_argument("--kind", required=True,
                   choices=["radial", "msfa", "cacti-bernoulli"])
    g.add_argument("--height", type=int, required=True)
    g.add_argument("--width", type=int, required=True)
    g.add_argument("--num-lines", type=int, default=30)
    g.add_argument("--msfa-kind", default="periodic-4x4")
    g.add_argument("--channels", type=int, default=16)
    g.add_argument("--tile")
    g.add_argument("--frames", type=int, default=8)
    g.add_argument("--out", required=True)
    add_common(g)
    g.set_defaults(fn=cmd_mask_gen)

    p = sub.add_parser("reconstruct", help="solve the inverse problem")
    p.add_argument("--config", required=True)
    p.add_argument("--measurement", required=True)
    p.add_argument("--ref")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--trace")
    p.add_argument("--png")
    p.add_argument("--iters", type=int)
    p.add_argument("--algorithm", choices=["gap", "admm"])
    p.add_argument("--regularizer")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(fn=cmd_reconstruct)

    p = sub.add_parser("metrics", help="PSNR/SSIM of test vs reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--peak", type=float, default=1.0)
    add_common(p)
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("bench", help="matching benchmark suite")
    p.add_argument("--sizes", default="128")
    p.add_argument("--channels", default="1,3,6")
    p.add_argument("--modes", default="gm,bm-uniform")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--patch-size", type=int, default=8)
    p.add_argument("--exemplars", type=int, default=256)
    p.add_argument("--out")
    p.add_argument("--plot-data", action="store_true",
                   help="alias for CSV output (plot-ready)")
    add_common(p)
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ConfigError, TensorFileError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
