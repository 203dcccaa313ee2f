import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image as PILImage


def clean_scene(size=32, seed=3):
    """Deterministic textured test image in [0, 1], shape (size, size)."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size]
    img = 0.2 + 0.3 * (x / (size - 1)) + 0.3 * (((x // 4) + (y // 4)) % 2)
    img = img + 0.15 * (rng.random((size, size)) - 0.5)
    return np.clip(img, 0.0, 1.0)


def write_png(img: np.ndarray, path: Path):
    data = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    PILImage.fromarray(data, mode="L").save(path, format="PNG")


def build_toy_dataset(root: Path, size=32, sequences=2, frames=6, seed=9) -> Path:
    """Generate a toy dataset with the data-generation CLI (file boundary only)."""
    src = root / "src"
    src.mkdir(parents=True)
    write_png(clean_scene(size), src / "img.png")
    out = root / "data"
    cfg = root / "cfg.toml"
    cfg.write_text(
        f'input_dir = "{src}"\n'
        f'output_dir = "{out}"\n'
        f"image_size = {size}\n"
        f"sequences_per_image = {sequences}\n"
        f"frames_per_sequence = {frames}\n"
        f"seed = {seed}\n"
        "split = 0.5\n"
        "patch_half = 8\n"
        "iterations = 100\n"
    )
    result = subprocess.run(
        [sys.executable, "-m", "deturb", "dataset", "--config", str(cfg)],
        capture_output=True,
        text=True,
    )
    if result.returncode != 0:
        pytest.skip(f"data-generation CLI unavailable: {result.stderr.strip()}")
    return out / "manifest.tsv"


@pytest.fixture(scope="session")
def toy_manifest(tmp_path_factory) -> Path:
    return build_toy_dataset(tmp_path_factory.mktemp("toy"))
