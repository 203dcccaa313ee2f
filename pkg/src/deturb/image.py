"""Core raster representation and shared numerical kernels.

An image is a float64 :class:`numpy.ndarray` of shape ``(height, width,
channels)`` with 1 or 3 channels and samples nominally in ``[0, 1]``.
A frame sequence stacks dimension-identical images along a leading axis,
giving shape ``(n_frames, height, width, channels)``.

All operations are pure functions: inputs are never mutated and results
are safe to share across threads. Boundary handling is replicate
(clamp-to-edge) for every convolution and warp, and warping is backward
bilinear sampling.
"""

import math
from dataclasses import dataclass

import numpy as np

# Rec.601 luma weights for RGB -> gray.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)


def as_image(img) -> np.ndarray:
    """Validate and normalize an image to float64 ``(h, w, c)``.

    Accepts ``(h, w)`` arrays as single-channel. Raises ``ValueError`` on
    bad shape, channel count outside {1, 3}, or non-finite samples.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    if arr.ndim != 3:
        raise ValueError(f"image must be 2-D or 3-D, got shape {arr.shape}")
    h, w, c = arr.shape
    if h < 1 or w < 1:
        raise ValueError(f"image dimensions must be >= 1, got {h}x{w}")
    if c not in (1, 3):
        raise ValueError(f"image must have 1 or 3 channels, got {c}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite samples")
    return arr


def as_frames(frames) -> np.ndarray:
    """Validate a frame sequence, returning a ``(n, h, w, c)`` float64 array.

    Accepts a list of images or an already-stacked array; all frames must be
    dimension-identical and the sequence nonempty.
    """
    if isinstance(frames, np.ndarray) and frames.ndim == 4:
        stack = np.asarray(frames, dtype=np.float64)
    else:
        imgs = [as_image(f) for f in frames]
        if not imgs:
            raise ValueError("frame sequence is empty")
        if any(f.shape != imgs[0].shape for f in imgs):
            raise ValueError("frames differ in dimensions")
        stack = np.stack(imgs)
    n, h, w, c = stack.shape
    if n < 1:
        raise ValueError("frame sequence is empty")
    if h < 1 or w < 1 or c not in (1, 3):
        raise ValueError(f"bad frame dimensions {stack.shape}")
    if not np.all(np.isfinite(stack)):
        raise ValueError("frame sequence contains non-finite samples")
    return stack


@dataclass(frozen=True)
class Kernel1D:
    """Symmetric-support 1-D convolution kernel, normalized to unit sum."""

    radius: int
    weights: np.ndarray

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("kernel radius must be >= 0")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (2 * self.radius + 1,):
            raise ValueError(
                f"kernel of radius {self.radius} needs {2 * self.radius + 1} weights"
            )
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("kernel weights must be finite and nonnegative")
        total = w.sum()
        if total <= 0:
            raise ValueError("kernel weights must not all be zero")
        object.__setattr__(self, "weights", w / total)


@dataclass(frozen=True)
class VectorField:
    """Per-pixel displacement field in pixel units, components ``u`` (x) and ``v`` (y)."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        if u.ndim != 2 or u.shape != v.shape:
            raise ValueError("u and v must be 2-D arrays of identical shape")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ValueError("vector field contains non-finite entries")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]


def gaussian_kernel(sigma: float, radius: int | None = None) -> Kernel1D:
    """Normalized 1-D Gaussian kernel ``w[i] ∝ exp(-(i-radius)^2 / (2 sigma^2))``.

    ``radius`` defaults to ``max(1, ceil(3 * sigma))``, covering >99.7% of
    the Gaussian mass.
    """
    if not (sigma > 0):
        raise ValueError(f"sigma must be positive, got {sigma}")
    if radius is None:
        radius = max(1, math.ceil(3.0 * sigma))
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(offsets * offsets) / (2.0 * sigma * sigma))
    return Kernel1D(radius=radius, weights=weights)


def _convolve_axis(arr: np.ndarray, kernel: Kernel1D, axis: int) -> np.ndarray:
    # Replicate-padded 1-D correlation along one axis; symmetric kernels make
    # correlation and convolution identical.
    r = kernel.radius
    if r == 0:
        return arr * kernel.weights[0]
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (r, r)
    padded = np.pad(arr, pad, mode="edge")
    n = arr.shape[axis]
    out = np.zeros_like(arr)
    index = [slice(None)] * arr.ndim
    for j, w in enumerate(kernel.weights):
        index[axis] = slice(j, j + n)
        out += w * padded[tuple(index)]
    return out


def convolve_plane(arr: np.ndarray, kernel: Kernel1D) -> np.ndarray:
    """Separable 2-D convolution of a plain ``(h, w)`` array, replicate boundary."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("convolve_plane expects a 2-D array")
    return _convolve_axis(_convolve_axis(arr, kernel, axis=1), kernel, axis=0)


def convolve_separable(img, kernel: Kernel1D) -> np.ndarray:
    """Separable convolution of an image: horizontal then vertical pass per channel."""
    arr = as_image(img)
    return _convolve_axis(_convolve_axis(arr, kernel, axis=1), kernel, axis=0)


def laplacian(img) -> np.ndarray:
    """5-point Laplacian of a single-channel image, replicate boundary.

    Output is not clamped and may be negative.
    """
    arr = as_image(img)
    if arr.shape[2] != 1:
        raise ValueError("laplacian expects a single-channel image; convert first")
    p = np.pad(arr[:, :, 0], 1, mode="edge")
    out = (
        p[:-2, 1:-1]
        + p[2:, 1:-1]
        + p[1:-1, :-2]
        + p[1:-1, 2:]
        - 4.0 * p[1:-1, 1:-1]
    )
    return out[:, :, np.newaxis]


def warp(img, field: VectorField) -> np.ndarray:
    """Backward-warp an image: ``out(x, y) = bilinear(img, x + u, y + v)``.

    Sample coordinates are clamped to the image bounds, so a zero field is
    the exact identity.
    """
    arr = as_image(img)
    h, w = arr.shape[:2]
    if (field.height, field.width) != (h, w):
        raise ValueError(
            f"field {field.height}x{field.width} does not match image {h}x{w}"
        )
    ys, xs = np.meshgrid(
        np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij"
    )
    sx = np.clip(xs + field.u, 0.0, w - 1.0)
    sy = np.clip(ys + field.v, 0.0, h - 1.0)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (sx - x0)[:, :, np.newaxis]
    fy = (sy - y0)[:, :, np.newaxis]
    top = (1.0 - fx) * arr[y0, x0] + fx * arr[y0, x1]
    bottom = (1.0 - fx) * arr[y1, x0] + fx * arr[y1, x1]
    return (1.0 - fy) * top + fy * bottom


def to_grayscale(img) -> np.ndarray:
    """Convert to single channel with Rec.601 luma; 1-channel input passes through."""
    arr = as_image(img)
    if arr.shape[2] == 1:
        return arr
    luma = (
        GRAY_WEIGHTS[0] * arr[:, :, 0]
        + GRAY_WEIGHTS[1] * arr[:, :, 1]
        + GRAY_WEIGHTS[2] * arr[:, :, 2]
    )
    return luma[:, :, np.newaxis]


def _linear_coords(n: int, new_n: int):
    # Half-pixel-center mapping with edge clamping; identical sizes map to
    # integer positions, making same-size resize the identity.
    pos = (np.arange(new_n, dtype=np.float64) + 0.5) * (n / new_n) - 0.5
    pos = np.clip(pos, 0.0, n - 1.0)
    i0 = np.floor(pos).astype(np.intp)
    i1 = np.minimum(i0 + 1, n - 1)
    frac = pos - i0
    return i0, i1, frac


def resize(img, new_w: int, new_h: int) -> np.ndarray:
    """Bilinear resampling to ``new_w`` x ``new_h`` with edge clamping."""
    arr = as_image(img)
    if new_w < 1 or new_h < 1:
        raise ValueError(f"target dimensions must be >= 1, got {new_w}x{new_h}")
    h, w = arr.shape[:2]
    i0, i1, fy = _linear_coords(h, new_h)
    arr = arr[i0] * (1.0 - fy)[:, np.newaxis, np.newaxis] + arr[i1] * fy[:, np.newaxis, np.newaxis]
    j0, j1, fx = _linear_coords(w, new_w)
    arr = arr[:, j0] * (1.0 - fx)[np.newaxis, :, np.newaxis] + arr[:, j1] * fx[np.newaxis, :, np.newaxis]
    return arr
