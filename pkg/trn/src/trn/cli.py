"""Command-line interface: train on a manifest, restore from a tensor stack."""

import argparse
import dataclasses
import sys

from .tensorio import TensorFormatError
from .train import TrainParams, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trn")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("train", help="train the restorer on manifest-listed tensors")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="directory for checkpoints and loss trace")
    for field in dataclasses.fields(TrainParams):
        flag = "--" + field.name.replace("_", "-")
        if field.name == "depth":
            p.add_argument(flag, type=int, default=None)
        else:
            p.add_argument(flag, type=type(field.default), default=field.default)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("restore", help="restore one image from a frame-stack tensor")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--tensor", required=True)
    p.add_argument("--out", required=True, help="output PNG")
    p.set_defaults(func=_cmd_restore)
    return parser


def _cmd_train(args) -> int:
    names = [f.name for f in dataclasses.fields(TrainParams)]
    params = TrainParams(**{name: getattr(args, name) for name in names})
    checkpoint = train(params, args.manifest, args.out)
    print(f"checkpoint written to {checkpoint}")
    return 0


def _cmd_restore(args) -> int:
    from .restore import restore

    restore(args.checkpoint, args.tensor, args.out)
    print(f"restored image written to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (TensorFormatError, RuntimeError, OSError) as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
