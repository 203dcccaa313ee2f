"""Inference: restore one image from a stacked frame tensor."""

from pathlib import Path

import numpy as np
import torch
from PIL import Image as PILImage

from .tensorio import read_tensor
from .train import load_generator


def write_png(img: np.ndarray, path) -> None:
    """Save a (c, h, w) float array in [0, 1] as an 8-bit PNG."""
    data = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    if data.shape[0] == 1:
        pil = PILImage.fromarray(data[0], mode="L")
    else:
        pil = PILImage.fromarray(np.transpose(data, (1, 2, 0)), mode="RGB")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pil.save(path, format="PNG")


def restore(checkpoint_path, tensor_path, out_path=None) -> np.ndarray:
    """Run the generator on a (m, c, h, w) tensor file; optionally write a PNG.

    Inference is deterministic; the stack arity must match the checkpoint
    and the spatial size must be divisible by the network's pooling factor.
    """
    generator, payload = load_generator(checkpoint_path)
    arch = payload["arch"]
    stack = read_tensor(tensor_path)
    if stack.ndim != 4:
        raise ValueError(f"{tensor_path}: expected rank-4 (m, c, h, w), got rank {stack.ndim}")
    m, channels, height, width = stack.shape
    if m != int(arch["m_frames"]) or m * channels != int(arch["in_channels"]):
        raise ValueError(
            f"{tensor_path}: {m} frames x {channels} channels does not match the "
            f"checkpoint arity ({arch['m_frames']} frames, {arch['in_channels']} input channels)"
        )
    factor = 2 ** int(arch["depth"])
    if height % factor or width % factor:
        raise ValueError(
            f"{tensor_path}: size {height}x{width} not divisible by {factor}"
        )
    batch = torch.from_numpy(stack.reshape(1, m * channels, height, width))
    with torch.no_grad():
        out = generator(batch)[0]
    img = np.clip(out.numpy(), 0.0, 1.0)
    if out_path is not None:
        write_png(img, out_path)
    return img
