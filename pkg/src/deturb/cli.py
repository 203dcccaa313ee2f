"""Single command-line entry point for the toolkit.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numeric
failure. Every failure prints one line ``error: <category>: <detail>`` to
standard error. All randomness of a generating subcommand flows from its
``--seed`` flag, and effective parameter values (including sampled
defaults) are echoed to a ``params.json`` sidecar next to the outputs.
"""

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import UnidentifiedImageError

from . import dataset as dataset_mod
from . import io as io_mod
from .image import as_frames, as_image, to_grayscale
from .metrics import psnr, sharpness, ssim
from .simulate import (
    DEFAULT_BLUR_RANGE,
    DEFAULT_STRENGTH_RANGE,
    NOISE_MODES,
    SequenceSpec,
    SimParams,
    distort_blur,
)
from .subsample import SubsampleParams, fuse, subsample
from .tensorfile import TensorFormatError, write_tensor

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the CLI contract wants 1.
    def error(self, message):
        print(f"error: usage: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _range_pair(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) == 1:
        lo = hi = float(parts[0])
    elif len(parts) == 2:
        lo, hi = float(parts[0]), float(parts[1])
    else:
        raise ValueError(f"expected LO:HI, got {text!r}")
    if not (0 <= lo <= hi):
        raise ValueError(f"range must satisfy 0 <= lo <= hi, got {text!r}")
    return lo, hi


def _seed(text: str) -> int:
    value = int(text)
    if not (0 <= value < 2**64):
        raise ValueError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deturb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", parents=[], help="distort one clean image into a frame sequence")
    p.add_argument("--input", required=True, help="clean source PNG")
    p.add_argument("--out", required=True, help="output directory for frame_NNNN.png")
    p.add_argument("--frames", type=int, default=20, help="number of frames to generate")
    p.add_argument("--strength-range", type=_range_pair, default=DEFAULT_STRENGTH_RANGE,
                   metavar="LO:HI", help="per-frame distortion strength sampling range")
    p.add_argument("--blur-range", type=_range_pair, default=DEFAULT_BLUR_RANGE,
                   metavar="LO:HI", help="per-frame blur constant sampling range")
    p.add_argument("--strength", type=float, default=None, help="pin the strength for every frame")
    p.add_argument("--blur", type=float, default=None, help="pin the blur constant for every frame")
    p.add_argument("--iterations", type=int, default=1000, help="patch iterations per frame")
    p.add_argument("--patch-half", type=int, default=32, help="half-width of noise patches")
    p.add_argument("--smooth-sigma", type=float, default=8.0, help="field smoothing sigma")
    p.add_argument("--noise-mode", choices=NOISE_MODES, default="per_pixel")
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("subsample", help="select sharp frames and fuse a reference image")
    p.add_argument("--frames", required=True, help="directory of PNG frames")
    p.add_argument("--out", required=True, help="fused reference PNG")
    p.add_argument("--selected", required=True, help="text file of chosen frame indices")
    p.add_argument("--lambda", dest="sharpness_weight", type=float, default=1.0)
    p.add_argument("--tau", dest="size_reward", type=float, default=0.5)
    p.add_argument("--rho", dest="size_decay", type=float, default=0.1)
    p.add_argument("--epsilon", dest="tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=50)
    p.set_defaults(func=_cmd_subsample)

    p = sub.add_parser("fuse", help="average frames, optionally restricted to selected indices")
    p.add_argument("--frames", required=True, help="directory of PNG frames")
    p.add_argument("--out", required=True, help="output PNG")
    p.add_argument("--selected", default=None, help="index file (one per line); default all frames")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("metrics", help="PSNR/SSIM/sharpness of a restored image vs ground truth")
    p.add_argument("--restored", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("dataset", help="batch-generate a training dataset from a config file")
    p.add_argument("--config", required=True, help="TOML file with DatasetConfig keys")
    p.add_argument("--seed", type=_seed, default=None, help="override the config seed")
    p.set_defaults(func=_cmd_dataset)

    p = sub.add_parser("export-tensor", help="export frames or an image as a tensor file")
    p.add_argument("--frames", default=None, help="directory of PNG frames")
    p.add_argument("--image", default=None, help="single PNG to export as (c, h, w)")
    p.add_argument("--out", required=True)
    p.add_argument("--gray", action="store_true", help="convert to single channel first")
    p.add_argument("--subsample", action="store_true", help="select frames before stacking")
    p.add_argument("--m-cap", type=int, default=20, help="fixed frame arity with --subsample")
    p.add_argument("--lambda", dest="sharpness_weight", type=float, default=1.0)
    p.add_argument("--tau", dest="size_reward", type=float, default=0.5)
    p.add_argument("--rho", dest="size_decay", type=float, default=0.1)
    p.set_defaults(func=_cmd_export_tensor)

    return parser


def _cmd_simulate(args) -> int:
    img = io_mod.read_image(args.input)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = SequenceSpec.uniform(
        args.frames,
        args.seed,
        strength=args.strength,
        blur=args.blur,
        iterations=args.iterations,
        patch_half=args.patch_half,
        smooth_sigma=args.smooth_sigma,
        noise_mode=args.noise_mode,
        strength_range=tuple(args.strength_range),
        blur_range=tuple(args.blur_range),
    )
    sidecar = {"seed": args.seed, "frames": []}
    for i, params in enumerate(spec.per_frame, start=1):
        effective = params.resolved()
        frame = distort_blur(img, effective)
        io_mod.write_image(frame, out_dir / f"frame_{i:04d}.png")
        record = dataclasses.asdict(effective)
        record["frame"] = i
        sidecar["frames"].append(record)
    with open(out_dir / "params.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def _subsample_params(args) -> SubsampleParams:
    kwargs = {
        "sharpness_weight": args.sharpness_weight,
        "size_reward": args.size_reward,
        "size_decay": args.size_decay,
    }
    if hasattr(args, "tol"):
        kwargs["tol"] = args.tol
        kwargs["max_iter"] = args.max_iter
    return SubsampleParams(**kwargs)


def _cmd_subsample(args) -> int:
    frames = io_mod.read_frame_dir(args.frames)
    result = subsample(frames, _subsample_params(args))
    io_mod.write_image(result.reference, args.out)
    Path(args.selected).write_text(
        "".join(f"{i}\n" for i in result.indices), encoding="utf-8"
    )
    for value in result.energy_trace:
        print(repr(value))
    return EXIT_OK


def _read_indices(path) -> list[int]:
    lines = Path(path).read_text(encoding="utf-8").split()
    return [int(token) for token in lines]


def _cmd_fuse(args) -> int:
    frames = io_mod.read_frame_dir(args.frames)
    indices = (
        _read_indices(args.selected)
        if args.selected is not None
        else list(range(len(frames)))
    )
    io_mod.write_image(fuse(frames, indices), args.out)
    return EXIT_OK


def _cmd_metrics(args) -> int:
    restored = io_mod.read_image(args.restored)
    truth = io_mod.read_image(args.truth)
    print(
        f"psnr={psnr(restored, truth):.6g} "
        f"ssim={ssim(restored, truth):.6g} "
        f"sharpness={sharpness(restored):.6g}"
    )
    return EXIT_OK


def _cmd_dataset(args) -> int:
    cfg = dataset_mod.load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    entries = dataset_mod.build_dataset(cfg)
    print(f"wrote {len(entries)} sequences to {cfg.output_dir}")
    return EXIT_OK


def _cmd_export_tensor(args) -> int:
    if (args.frames is None) == (args.image is None):
        raise ValueError("exactly one of --frames or --image is required")
    if args.image is not None:
        img = io_mod.read_image(args.image)
        if args.gray:
            img = to_grayscale(img)
        data = np.transpose(as_image(img), (2, 0, 1)).astype(np.float32)
    else:
        frames = io_mod.read_frame_dir(args.frames)
        if args.gray:
            frames = as_frames([to_grayscale(f) for f in frames])
        if args.subsample:
            data = dataset_mod.subsample_to_tensor(
                frames, _subsample_params(args), args.m_cap
            )
        else:
            data = np.transpose(frames, (0, 3, 1, 2)).astype(np.float32)
    write_tensor(data, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help exits 0; usage errors exit 1
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (TensorFormatError, dataset_mod.ConfigError, UnidentifiedImageError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"error: numeric: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
