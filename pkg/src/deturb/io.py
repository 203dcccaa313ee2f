"""8-bit PNG input/output and frame-directory loading.

Samples convert as ``value / 255`` on read and ``round(value * 255)`` with
clamping on write. Frame sequences on disk are directories of numbered
PNGs, read in sorted filename order.
"""

from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .image import as_frames, as_image


def read_image(path) -> np.ndarray:
    """Read a PNG as a float image, 1 channel for grayscale files, else 3."""
    with PILImage.open(path) as im:
        if im.mode in ("1", "L", "I", "I;16"):
            im = im.convert("L")
            arr = np.asarray(im, dtype=np.float64)[:, :, np.newaxis]
        else:
            im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.float64)
    return arr / 255.0


def write_image(img, path) -> None:
    """Write an image as 8-bit PNG, clamping samples to [0, 1]."""
    arr = as_image(img)
    data = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    if arr.shape[2] == 1:
        pil = PILImage.fromarray(data[:, :, 0], mode="L")
    else:
        pil = PILImage.fromarray(data, mode="RGB")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pil.save(path, format="PNG")


def read_frame_dir(dirpath) -> np.ndarray:
    """Load every ``*.png`` in a directory (sorted by name) as a frame stack."""
    dirpath = Path(dirpath)
    paths = sorted(dirpath.glob("*.png"))
    if not paths:
        raise FileNotFoundError(f"no PNG frames found in {dirpath}")
    return as_frames([read_image(p) for p in paths])
