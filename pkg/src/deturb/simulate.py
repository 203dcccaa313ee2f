"""Randomized turbulence synthesis: geometric distortion fields plus blur.

A distorted frame is produced in two steps. First a smooth random
displacement field is accumulated from many localized noise patches and
used to backward-warp the clean image; then the warped image is blurred
with a Gaussian whose width is the per-frame blur constant. Strength and
blur default to fresh uniform draws per frame, so one clean image yields
an arbitrarily large family of distinct distorted sequences.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .image import (
    VectorField,
    as_image,
    convolve_plane,
    convolve_separable,
    gaussian_kernel,
    warp,
)

DEFAULT_STRENGTH_RANGE = (0.1, 0.4)
DEFAULT_BLUR_RANGE = (0.1, 1.0)

NOISE_MODES = ("per_pixel", "per_patch_scalar")

# Patch noise is drawn in blocks to bound peak memory; block splits do not
# change the random stream (fills are sequential either way).
_NOISE_BLOCK = 256


@dataclass(frozen=True)
class SimParams:
    """Knobs of one randomized distortion pass.

    ``strength`` and ``blur`` left as ``None`` are sampled uniformly from
    ``strength_range`` / ``blur_range`` using a dedicated stream derived
    from ``seed``, so explicitly pinning them does not perturb the field
    noise. ``kernel_mean_offset`` is recorded in sidecar metadata but does
    not enter the computation.
    """

    seed: int = 0
    strength: float | None = None
    blur: float | None = None
    iterations: int = 1000
    patch_half: int = 32
    smooth_sigma: float = 8.0
    kernel_mean_offset: float = -0.9
    noise_mode: str = "per_pixel"
    strength_range: tuple[float, float] = DEFAULT_STRENGTH_RANGE
    blur_range: tuple[float, float] = DEFAULT_BLUR_RANGE

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.patch_half < 1:
            raise ValueError("patch_half must be >= 1")
        if not (self.smooth_sigma > 0):
            raise ValueError("smooth_sigma must be positive")
        if self.noise_mode not in NOISE_MODES:
            raise ValueError(f"noise_mode must be one of {NOISE_MODES}")
        if not (-1.0 <= self.kernel_mean_offset <= -0.8):
            raise ValueError("kernel_mean_offset must lie in [-1, -0.8]")
        if self.strength is not None and self.strength < 0:
            raise ValueError("strength must be nonnegative")
        if self.blur is not None and not (self.blur > 0):
            raise ValueError("blur must be positive")
        for lo, hi in (self.strength_range, self.blur_range):
            if not (0 <= lo <= hi):
                raise ValueError("parameter ranges must satisfy 0 <= lo <= hi")

    def resolved(self) -> "SimParams":
        """Return a copy with concrete strength and blur values.

        Sampling consumes only the parameter stream; the field-noise stream
        is untouched, so resolved and unresolved params with equal seeds and
        equal effective values generate identical fields.
        """
        if self.strength is not None and self.blur is not None:
            return self
        rng = np.random.default_rng(_streams(self.seed)[0])
        strength = self.strength
        blur = self.blur
        if strength is None:
            strength = float(rng.uniform(*self.strength_range))
        if blur is None:
            blur = float(rng.uniform(*self.blur_range))
        return dataclasses.replace(self, strength=strength, blur=blur)


@dataclass(frozen=True)
class SequenceSpec:
    """Per-frame parameter list for generating one distorted sequence."""

    per_frame: tuple[SimParams, ...]

    def __post_init__(self):
        if len(self.per_frame) < 1:
            raise ValueError("sequence needs at least one frame")
        object.__setattr__(self, "per_frame", tuple(self.per_frame))

    @property
    def n_frames(self) -> int:
        return len(self.per_frame)

    @classmethod
    def uniform(cls, n_frames: int, seed: int, **overrides) -> "SequenceSpec":
        """Spec with ``n_frames`` frames sharing settings but distinct derived seeds."""
        if n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        seeds = np.random.SeedSequence(seed).generate_state(n_frames, dtype=np.uint64)
        return cls(
            per_frame=tuple(SimParams(seed=int(s), **overrides) for s in seeds)
        )


def _streams(seed: int):
    # Child 0 resolves sampled parameters, child 1 drives the field noise.
    return np.random.SeedSequence(int(seed)).spawn(2)


def gen_vector_field(width: int, height: int, params: SimParams) -> VectorField:
    """Accumulate patch noise into a displacement field and smooth it.

    Repeats ``iterations`` times: pick a patch center uniformly at random
    with margin ``patch_half`` from the border and add Gaussian noise over
    the ``(2*patch_half+1)``-square patch (a fresh draw per pixel, or one
    scalar per patch, depending on ``noise_mode``). The accumulated field
    is then smoothed with the ``smooth_sigma`` Gaussian and scaled by the
    distortion strength. Deterministic given the seed, and elementwise
    linear in the strength.
    """
    n = params.patch_half
    if width <= 2 * n or height <= 2 * n:
        raise ValueError(
            f"image {width}x{height} too small for patch margin {n}; "
            f"needs width and height > {2 * n}"
        )
    params = params.resolved()
    rng = np.random.default_rng(_streams(params.seed)[1])

    m = params.iterations
    size = 2 * n + 1
    xs = rng.integers(n, width - n, size=m)
    ys = rng.integers(n, height - n, size=m)
    u = np.zeros((height, width))
    v = np.zeros((height, width))
    for start in range(0, m, _NOISE_BLOCK):
        stop = min(start + _NOISE_BLOCK, m)
        if params.noise_mode == "per_pixel":
            noise = rng.standard_normal((stop - start, 2, size, size))
        else:
            noise = rng.standard_normal((stop - start, 2, 1, 1))
        for i in range(start, stop):
            x = xs[i]
            y = ys[i]
            u[y - n : y + n + 1, x - n : x + n + 1] += noise[i - start, 0]
            v[y - n : y + n + 1, x - n : x + n + 1] += noise[i - start, 1]

    kernel = gaussian_kernel(params.smooth_sigma)
    u = params.strength * convolve_plane(u, kernel)
    v = params.strength * convolve_plane(v, kernel)
    return VectorField(u=u, v=v)


def distort_blur(img, params: SimParams) -> np.ndarray:
    """Warp an image with a random displacement field, then blur it.

    Output dimensions equal the input's. Deterministic given the seed.
    """
    arr = as_image(img)
    params = params.resolved()
    field = gen_vector_field(arr.shape[1], arr.shape[0], params)
    warped = warp(arr, field)
    return convolve_separable(warped, gaussian_kernel(params.blur))


def gen_sequence(img, spec: SequenceSpec) -> np.ndarray:
    """Generate a distorted frame stack, one independent pass per frame."""
    arr = as_image(img)
    return np.stack([distort_blur(arr, p) for p in spec.per_frame])
