"""Full-reference image quality metrics: PSNR, SSIM and Laplacian sharpness."""

import math
from dataclasses import dataclass

import numpy as np

from .image import as_image, convolve_plane, gaussian_kernel, laplacian, to_grayscale

SSIM_WINDOW_RADIUS = 5  # 11x11 window
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    """PSNR (dB, +inf for identical images), SSIM and Laplacian l1 sharpness."""

    psnr: float
    ssim: float
    sharpness: float


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB over all samples, peak value 1.0."""
    x = as_image(a)
    y = as_image(b)
    if x.shape != y.shape:
        raise ValueError(f"image shapes differ: {x.shape} vs {y.shape}")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return -10.0 * math.log10(mse)


def _ssim_filter(plane: np.ndarray, kernel) -> np.ndarray:
    r = SSIM_WINDOW_RADIUS
    return convolve_plane(plane, kernel)[r:-r, r:-r]


def ssim(a, b) -> float:
    """Mean structural similarity with the standard 11x11 Gaussian window.

    Inputs are converted to grayscale; the map is averaged over window
    positions whose support lies fully inside the image, so both sides must
    be at least 11 pixels.
    """
    x = to_grayscale(as_image(a))[:, :, 0]
    y = to_grayscale(as_image(b))[:, :, 0]
    if x.shape != y.shape:
        raise ValueError(f"image shapes differ: {x.shape} vs {y.shape}")
    if min(x.shape) < 2 * SSIM_WINDOW_RADIUS + 1:
        raise ValueError(
            f"image {x.shape} smaller than the {2 * SSIM_WINDOW_RADIUS + 1}-pixel window"
        )
    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    kernel = gaussian_kernel(SSIM_SIGMA, radius=SSIM_WINDOW_RADIUS)
    mu_x = _ssim_filter(x, kernel)
    mu_y = _ssim_filter(y, kernel)
    var_x = _ssim_filter(x * x, kernel) - mu_x * mu_x
    var_y = _ssim_filter(y * y, kernel) - mu_y * mu_y
    cov = _ssim_filter(x * y, kernel) - mu_x * mu_y
    ssim_map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    return float(ssim_map.mean())


def sharpness(img) -> float:
    """Laplacian l1 sharpness: sum of absolute Laplacian responses."""
    return float(np.sum(np.abs(laplacian(to_grayscale(as_image(img))))))


def report(restored, reference) -> MetricReport:
    """Bundle all metrics of a restored image against the ground truth.

    ``restored`` may also be a frame stack or list of frames, in which case
    their elementwise mean is evaluated.
    """
    arr = np.asarray(restored, dtype=np.float64)
    if arr.ndim == 4 or (
        not isinstance(restored, np.ndarray) and isinstance(restored, (list, tuple))
    ):
        arr = np.asarray(restored, dtype=np.float64).mean(axis=0)
    img = as_image(arr)
    ref = as_image(reference)
    return MetricReport(
        psnr=psnr(img, ref),
        ssim=ssim(img, ref),
        sharpness=sharpness(img),
    )
