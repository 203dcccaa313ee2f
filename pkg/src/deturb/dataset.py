"""Batch dataset generation and the tensor-export boundary.

Turns a directory of clean PNGs into many distorted sequences, serialized
as tensor files plus a tab-separated manifest::

    <sequence_path>\t<target_path>\t<train|test>

Paths in the manifest are relative to the manifest's directory. Sequence
tensors have dims ``(frames, channels, height, width)``; targets are the
clean image as ``(channels, height, width)``.
"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .image import as_frames, resize, to_grayscale
from .io import read_image
from .simulate import SimParams, SequenceSpec, gen_sequence
from .subsample import SubsampleParams, frame_costs, subsample
from .tensorfile import write_tensor

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.tsv"


class ConfigError(Exception):
    """Unusable dataset configuration file."""


@dataclass(frozen=True)
class DatasetConfig:
    """Batch-generation settings; keys map 1:1 onto the TOML config file."""

    input_dir: str
    output_dir: str
    image_size: int = 256
    sequences_per_image: int = 100
    frames_per_sequence: int = 20
    seed: int = 0
    split: float = 0.8
    # Simulator overrides, mainly for small desk-scale builds.
    patch_half: int = 32
    iterations: int = 1000
    smooth_sigma: float = 8.0
    color: bool = False

    def __post_init__(self):
        if self.sequences_per_image < 1:
            raise ValueError("sequences_per_image must be >= 1")
        if self.frames_per_sequence < 1:
            raise ValueError("frames_per_sequence must be >= 1")
        if not (0.0 < self.split < 1.0):
            raise ValueError("split must lie in (0, 1)")
        if self.image_size <= 2 * self.patch_half:
            raise ValueError(
                f"image_size {self.image_size} must exceed twice the patch margin "
                f"{self.patch_half}"
            )


@dataclass(frozen=True)
class ManifestEntry:
    sequence_path: str
    target_path: str
    split: str


def load_config(path) -> DatasetConfig:
    """Parse a TOML config file carrying DatasetConfig keys verbatim."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    known = set(DatasetConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    try:
        return DatasetConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _frame_stack(frames: np.ndarray) -> np.ndarray:
    # (n, h, w, c) -> (n, c, h, w) float32 for serialization.
    return np.transpose(frames, (0, 3, 1, 2)).astype(np.float32)


def write_manifest(entries, path) -> None:
    lines = [f"{e.sequence_path}\t{e.target_path}\t{e.split}\n" for e in entries]
    Path(path).write_text("".join(lines), encoding="utf-8")


def read_manifest(path) -> list[ManifestEntry]:
    entries = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3 or parts[2] not in ("train", "test"):
            raise ValueError(f"{path}:{lineno}: malformed manifest line {line!r}")
        entries.append(ManifestEntry(*parts))
    return entries


def build_dataset(cfg: DatasetConfig) -> list[ManifestEntry]:
    """Generate all sequences and targets, write tensors and the manifest.

    Fully deterministic in (input images, config): per-sequence seeds are
    derived from the config seed and the image/sequence indices, and the
    train/test assignment from the config seed alone.
    """
    input_dir = Path(cfg.input_dir)
    output_dir = Path(cfg.output_dir)
    sources = sorted(input_dir.glob("*.png"))
    if not sources:
        raise FileNotFoundError(f"no PNG images found in {input_dir}")
    output_dir.mkdir(parents=True, exist_ok=True)

    pairs: list[tuple[str, str]] = []
    for img_idx, src in enumerate(sources):
        try:
            img = read_image(src)
        except OSError as exc:
            logger.warning("skipping unreadable image %s: %s", src, exc)
            continue
        img = resize(img, cfg.image_size, cfg.image_size)
        if not cfg.color:
            img = to_grayscale(img)
        target_name = f"{src.stem}_target.trnt"
        write_tensor(
            np.transpose(img, (2, 0, 1)).astype(np.float32),
            output_dir / target_name,
        )
        for seq_idx in range(cfg.sequences_per_image):
            frame_seeds = np.random.SeedSequence(
                [cfg.seed, 0, img_idx, seq_idx]
            ).generate_state(cfg.frames_per_sequence, dtype=np.uint64)
            spec = SequenceSpec(
                per_frame=tuple(
                    SimParams(
                        seed=int(s),
                        patch_half=cfg.patch_half,
                        iterations=cfg.iterations,
                        smooth_sigma=cfg.smooth_sigma,
                    )
                    for s in frame_seeds
                )
            )
            frames = gen_sequence(img, spec)
            seq_name = f"{src.stem}_seq{seq_idx:04d}.trnt"
            write_tensor(_frame_stack(frames), output_dir / seq_name)
            pairs.append((seq_name, target_name))
    if not pairs:
        raise FileNotFoundError(f"no readable PNG images in {input_dir}")

    split_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 1]))
    n_train = int(round(cfg.split * len(pairs)))
    train_slots = set(split_rng.permutation(len(pairs))[:n_train].tolist())
    entries = [
        ManifestEntry(seq, target, "train" if i in train_slots else "test")
        for i, (seq, target) in enumerate(pairs)
    ]
    write_manifest(entries, output_dir / MANIFEST_NAME)
    with open(output_dir / "params.json", "w", encoding="utf-8") as fh:
        json.dump(asdict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return entries


def subsample_to_tensor(
    frames, params: SubsampleParams, m_cap: int
) -> np.ndarray:
    """Select frames with the subsampler and stack them at fixed arity.

    Keeps the ``min(|J|, m_cap)`` lowest-cost selected frames in ascending
    index order; if fewer than ``m_cap`` frames were selected, the
    lowest-cost ones are repeated cyclically so the output always has
    ``m_cap`` frames. Returns a ``(m_cap, c, h, w)`` float32 array.
    """
    if m_cap < 1:
        raise ValueError("m_cap must be >= 1")
    stack = as_frames(frames)
    result = subsample(stack, params)
    costs = frame_costs(result.reference, stack, result.quality, params)
    by_cost = sorted(result.indices, key=lambda k: (costs[k], k))
    chosen = sorted(by_cost[:m_cap])
    if len(chosen) < m_cap:
        pads = [by_cost[i % len(by_cost)] for i in range(m_cap - len(chosen))]
        chosen = chosen + pads
    return _frame_stack(stack[chosen])
