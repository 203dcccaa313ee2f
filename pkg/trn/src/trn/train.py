"""WGAN-l1 training loop over manifest-listed tensor files.

Each generator step is preceded by ``critic_steps_per_gen`` critic updates;
the critic minimizes the Wasserstein estimate with a gradient penalty and
has every parameter clipped into ``[-clip, clip]`` after each update. The
generator minimizes the negated critic score plus ``l1_weight`` times the
mean absolute reconstruction error. Both use adaptive-moment gradient
descent with the configured rates. A loss-trace line is appended per
generator step, and checkpoints are written atomically.
"""

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .losses import critic_loss, generator_loss
from .models import Critic, Generator, clip_weights
from .tensorio import read_manifest, read_tensor

MAX_DEPTH = 6  # pooling stages of the full-scale network

TRACE_NAME = "loss_trace.txt"
CHECKPOINT_NAME = "checkpoint.pt"


@dataclass(frozen=True)
class TrainParams:
    """Optimization hyperparameters; defaults are the toy-scale settings."""

    learning_rate: float = 1e-4
    beta1: float = 0.5
    beta2: float = 0.99
    critic_steps_per_gen: int = 3
    gp_weight: float = 10.0
    l1_weight: float = 1000.0
    clip: float = 0.01
    batch_size: int = 1
    m_frames: int = 4
    image_size: int = 32
    epochs: int = 1
    seed: int = 0
    base_channels: int = 8
    depth: int | None = None  # None: fit to image_size, capped at MAX_DEPTH
    checkpoint_every: int = 500

    def __post_init__(self):
        positive = {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "gp_weight": self.gp_weight,
            "l1_weight": self.l1_weight,
            "clip": self.clip,
            "batch_size": self.batch_size,
            "m_frames": self.m_frames,
            "image_size": self.image_size,
            "base_channels": self.base_channels,
            "checkpoint_every": self.checkpoint_every,
        }
        for name, value in positive.items():
            if not (value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if self.critic_steps_per_gen < 1:
            raise ValueError("critic_steps_per_gen must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


def fit_depth(height: int, width: int, cap: int = MAX_DEPTH) -> int:
    """Deepest pooling count (up to ``cap``) that divides both dimensions."""
    depth = 0
    while (
        depth < cap
        and height % 2 ** (depth + 1) == 0
        and width % 2 ** (depth + 1) == 0
        and min(height, width) // 2 ** (depth + 1) >= 1
    ):
        depth += 1
    if depth < 1:
        raise ValueError(f"image size {height}x{width} not divisible by 2")
    return depth


class _SampleCache:
    """Lazily loaded (sequence, target) tensor pairs with format validation."""

    def __init__(self, rows, m_frames: int):
        self.rows = rows
        self.m_frames = m_frames
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def __len__(self):
        return len(self.rows)

    def load(self, idx: int) -> tuple[np.ndarray, np.ndarray]:
        if idx not in self._cache:
            row = self.rows[idx]
            try:
                seq = read_tensor(row.sequence_path)
            except Exception as exc:
                raise RuntimeError(f"{row.sequence_path}: {exc}") from exc
            try:
                target = read_tensor(row.target_path)
            except Exception as exc:
                raise RuntimeError(f"{row.target_path}: {exc}") from exc
            if seq.ndim != 4:
                raise RuntimeError(f"{row.sequence_path}: expected rank-4 sequence, got rank {seq.ndim}")
            if target.ndim != 3 or target.shape != seq.shape[1:]:
                raise RuntimeError(
                    f"{row.target_path}: target shape {target.shape} does not match "
                    f"sequence frames {seq.shape[1:]}"
                )
            if seq.shape[0] < self.m_frames:
                raise RuntimeError(
                    f"{row.sequence_path}: {seq.shape[0]} frames < m_frames {self.m_frames}"
                )
            self._cache[idx] = (seq, target)
        return self._cache[idx]


def _make_batch(cache: _SampleCache, indices, m_frames: int, rng: np.random.Generator):
    inputs = []
    targets = []
    for idx in indices:
        seq, target = cache.load(int(idx))
        chosen = rng.choice(seq.shape[0], size=m_frames, replace=False)
        chosen.sort()
        stack = seq[chosen]  # (m, c, h, w)
        inputs.append(stack.reshape(-1, *stack.shape[2:]))  # (m*c, h, w)
        targets.append(target)
    return (
        torch.from_numpy(np.stack(inputs)),
        torch.from_numpy(np.stack(targets)),
    )


def _save_checkpoint(path: Path, generator, critic, params: TrainParams,
                     arch: dict, step: int) -> None:
    payload = {
        "generator": generator.state_dict(),
        "critic": critic.state_dict(),
        "params": dataclasses.asdict(params),
        "arch": arch,
        "step": step,
    }
    tmp = path.with_name(f".{path.name}.tmp.{os.getpid()}")
    torch.save(payload, tmp)
    os.replace(tmp, path)


def train(params: TrainParams, manifest_path, out_dir) -> Path:
    """Train on the manifest's train split; returns the final checkpoint path."""
    manifest_path = Path(manifest_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = [r for r in read_manifest(manifest_path) if r.split == "train"]
    if not rows:
        raise RuntimeError(f"{manifest_path}: no train rows")
    cache = _SampleCache(rows, params.m_frames)
    seq0, target0 = cache.load(0)
    _, channels, height, width = seq0.shape
    depth = params.depth if params.depth is not None else fit_depth(height, width)
    if height % 2**depth or width % 2**depth:
        raise RuntimeError(
            f"{rows[0].sequence_path}: size {height}x{width} not divisible by {2 ** depth}"
        )

    torch.manual_seed(params.seed)
    generator = Generator(
        in_channels=params.m_frames * channels,
        out_channels=channels,
        base_channels=params.base_channels,
        depth=depth,
    )
    critic = Critic(in_channels=channels, base_channels=params.base_channels)
    opt_g = torch.optim.Adam(
        generator.parameters(), lr=params.learning_rate,
        betas=(params.beta1, params.beta2),
    )
    opt_d = torch.optim.Adam(
        critic.parameters(), lr=params.learning_rate,
        betas=(params.beta1, params.beta2),
    )
    arch = {
        "depth": depth,
        "base_channels": params.base_channels,
        "widths": generator.widths,
        "in_channels": generator.in_channels,
        "out_channels": generator.out_channels,
        "m_frames": params.m_frames,
    }

    rng = np.random.default_rng(params.seed)
    trace_path = out_dir / TRACE_NAME
    checkpoint_path = out_dir / CHECKPOINT_NAME
    step = 0
    with open(trace_path, "w", encoding="utf-8") as trace:
        for _ in range(params.epochs):
            order = rng.permutation(len(rows))
            for start in range(0, len(order), params.batch_size):
                gen_indices = order[start : start + params.batch_size]

                last_d = 0.0
                for _ in range(params.critic_steps_per_gen):
                    critic_indices = rng.integers(0, len(rows), size=len(gen_indices))
                    inputs, targets = _make_batch(
                        cache, critic_indices, params.m_frames, rng
                    )
                    with torch.no_grad():
                        fake = generator(inputs)
                    loss_d = critic_loss(targets, fake, critic, params.gp_weight)
                    opt_d.zero_grad()
                    loss_d.backward()
                    opt_d.step()
                    clip_weights(critic, params.clip)
                    last_d = float(loss_d.detach())

                inputs, targets = _make_batch(cache, gen_indices, params.m_frames, rng)
                restored = generator(inputs)
                loss_g = generator_loss(
                    critic(restored), restored, targets, params.l1_weight
                )
                opt_g.zero_grad()
                loss_g.backward()
                opt_g.step()

                step += 1
                l1 = float(torch.mean(torch.abs(targets - restored)).detach())
                trace.write(f"{step}\t{last_d:.8g}\t{float(loss_g.detach()):.8g}\t{l1:.8g}\n")
                trace.flush()
                if step % params.checkpoint_every == 0:
                    _save_checkpoint(
                        out_dir / f"checkpoint_{step:06d}.pt",
                        generator, critic, params, arch, step,
                    )
    _save_checkpoint(checkpoint_path, generator, critic, params, arch, step)
    return checkpoint_path


def load_generator(checkpoint_path) -> tuple[Generator, dict]:
    """Rebuild the generator from checkpoint metadata and load its weights."""
    payload = torch.load(checkpoint_path, map_location="cpu", weights_only=True)
    arch = payload["arch"]
    generator = Generator(
        in_channels=int(arch["in_channels"]),
        out_channels=int(arch["out_channels"]),
        base_channels=int(arch["base_channels"]),
        depth=int(arch["depth"]),
    )
    generator.load_state_dict(payload["generator"])
    generator.eval()
    return generator, payload
