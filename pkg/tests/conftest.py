import numpy as np
import pytest

from deturb.image import convolve_plane, gaussian_kernel


def synth_scene(height=64, width=None, channels=1, seed=0):
    """Deterministic textured image: gradient + checkerboard + smoothed noise.

    Carries enough edges that blur and distortion measurably change both the
    Laplacian sharpness and PSNR.
    """
    if width is None:
        width = height
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width]
    img = 0.2 + 0.3 * (x / max(width - 1, 1))
    img = img + 0.3 * (((x // 8) + (y // 8)) % 2)
    noise = convolve_plane(rng.random((height, width)) - 0.5, gaussian_kernel(1.0))
    img = np.clip(img + 0.4 * noise, 0.0, 1.0)
    if channels == 3:
        return np.stack(
            [img, np.roll(img, 1, axis=1), np.roll(img, 2, axis=0)], axis=2
        )
    return img[:, :, np.newaxis]


@pytest.fixture
def scene():
    return synth_scene
