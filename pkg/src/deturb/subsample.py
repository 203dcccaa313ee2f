"""Sharpness-aware frame subset selection and fusion.

Given a distorted frame stack, pick the subset of sharp, mildly distorted
frames whose elementwise mean makes the best reference image. The objective
per candidate subset J is

    (1/|J|) * sum_{k in J} (msd(reference, frame_k) + sharpness_weight * Q_k)
        - size_reward * (1 - exp(-size_decay * |J|))

where msd is the mean squared sample difference, Q_k the normalized
blurriness of frame k (0 = sharpest, 1 = blurriest), and the final term a
concave reward for using more frames. The objective is minimized by
alternating an exact subset step with an exact fusion (mean) step, so the
recorded energy never increases.
"""

import math
from dataclasses import dataclass

import numpy as np

from .image import as_frames, laplacian, to_grayscale

BRUTE_FORCE_MAX_FRAMES = 20

_SUBSET_BITS_CACHE: dict[int, np.ndarray] = {}


@dataclass(frozen=True)
class SubsampleParams:
    """Weights and stopping rule of the subset objective.

    ``sharpness_weight`` multiplies the per-frame blurriness cost,
    ``size_reward`` and ``size_decay`` shape the subset-size reward, and the
    loop stops once the energy decrease drops to ``tol`` or ``max_iter``
    outer iterations have run.
    """

    sharpness_weight: float = 1.0
    size_reward: float = 0.5
    size_decay: float = 0.1
    tol: float = 1e-6
    max_iter: int = 50

    def __post_init__(self):
        if self.sharpness_weight < 0:
            raise ValueError("sharpness_weight must be >= 0")
        if self.size_reward < 0:
            raise ValueError("size_reward must be >= 0")
        if not (self.size_decay > 0):
            raise ValueError("size_decay must be positive")
        if not (self.tol > 0):
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class SubsampleResult:
    """Chosen frame indices, fused reference, energy trace and frame quality."""

    indices: list[int]
    reference: np.ndarray
    energy_trace: list[float]
    quality: np.ndarray


def _size_reward(n_selected: int, params: SubsampleParams) -> float:
    return params.size_reward * (1.0 - math.exp(-params.size_decay * n_selected))


def _mean_sq_diff(reference: np.ndarray, frames: np.ndarray) -> np.ndarray:
    # Per-frame mean of squared sample differences against the reference.
    diff = frames - reference[np.newaxis]
    return np.mean(diff * diff, axis=(1, 2, 3))


def frame_costs(reference, frames, quality, params: SubsampleParams) -> np.ndarray:
    """Per-frame cost against a reference: fidelity plus weighted blurriness."""
    stack = as_frames(frames)
    ref = np.asarray(reference, dtype=np.float64)
    q = np.asarray(quality, dtype=np.float64)
    return _mean_sq_diff(ref, stack) + params.sharpness_weight * q


def quality_measure(frames) -> np.ndarray:
    """Normalized blurriness per frame from the Laplacian l1 sharpness.

    The sharpest frame scores 0 and the blurriest 1; if every frame is
    equally sharp all scores are 0.
    """
    stack = as_frames(frames)
    sharp = np.array(
        [np.sum(np.abs(laplacian(to_grayscale(f)))) for f in stack]
    )
    hi = sharp.max()
    lo = sharp.min()
    if hi == lo:
        return np.zeros(len(stack))
    return (hi - sharp) / (hi - lo)


def energy(reference, indices, frames, quality, params: SubsampleParams) -> float:
    """Objective value for a reference image and a chosen index set."""
    stack = as_frames(frames)
    idx = sorted(int(i) for i in indices)
    if not idx:
        raise ValueError("index set must be nonempty")
    if idx[0] < 0 or idx[-1] >= len(stack):
        raise ValueError(f"index out of range for {len(stack)} frames")
    ref = np.asarray(reference, dtype=np.float64)
    quality = np.asarray(quality, dtype=np.float64)
    fidelity = _mean_sq_diff(ref, stack[idx])
    per_frame = fidelity + params.sharpness_weight * quality[idx]
    return float(np.mean(per_frame) - _size_reward(len(idx), params))


def select_subset(per_frame_cost, params: SubsampleParams) -> list[int]:
    """Exact minimizer of the subset objective for fixed per-frame costs.

    For a fixed subset size j the mean cost is minimized by the j cheapest
    frames, so scanning the j-prefixes of the ascending cost order is an
    exhaustive search. Ties are broken toward smaller frame indices (stable
    sort) and smaller subset sizes (first minimum).
    """
    costs = np.asarray(per_frame_cost, dtype=np.float64)
    if costs.ndim != 1 or costs.size < 1:
        raise ValueError("need at least one cost value")
    if not np.all(np.isfinite(costs)):
        raise ValueError("costs must be finite")
    order = np.argsort(costs, kind="stable")
    sizes = np.arange(1, costs.size + 1)
    prefix_mean = np.cumsum(costs[order]) / sizes
    scores = prefix_mean - params.size_reward * (1.0 - np.exp(-params.size_decay * sizes))
    best_j = int(np.argmin(scores)) + 1
    return sorted(int(i) for i in order[:best_j])


def _subset_bits(n: int) -> np.ndarray:
    # Rows enumerate the nonempty subsets of range(n) as 0/1 membership masks,
    # in increasing bitmask order (bit k = frame k).
    if n not in _SUBSET_BITS_CACHE:
        masks = np.arange(1, 2**n, dtype=np.uint32)
        _SUBSET_BITS_CACHE[n] = (
            (masks[:, np.newaxis] >> np.arange(n)) & 1
        ).astype(np.uint8)
    return _SUBSET_BITS_CACHE[n]


def brute_force_subsample_step(per_frame_cost, params: SubsampleParams) -> list[int]:
    """Testing oracle: exhaustive minimizer over all 2^n - 1 nonempty subsets.

    Independent of :func:`select_subset` (no sorting, no prefix argument).
    Ties are broken by smaller subset size, then lexicographic index order.
    """
    costs = np.asarray(per_frame_cost, dtype=np.float64)
    n = costs.size
    if costs.ndim != 1 or n < 1:
        raise ValueError("need at least one cost value")
    if n > BRUTE_FORCE_MAX_FRAMES:
        raise ValueError(f"enumeration bounded to n <= {BRUTE_FORCE_MAX_FRAMES}")
    if not np.all(np.isfinite(costs)):
        raise ValueError("costs must be finite")
    bits = _subset_bits(n)
    sizes = bits.sum(axis=1, dtype=np.int64)
    totals = bits.astype(np.float64) @ costs
    objective = totals / sizes - params.size_reward * (
        1.0 - np.exp(-params.size_decay * sizes)
    )
    winners = np.nonzero(objective == objective.min())[0]
    if winners.size == 1:
        row = bits[winners[0]]
        return [i for i in range(n) if row[i]]
    candidates = [
        tuple(i for i in range(n) if bits[w][i]) for w in winners
    ]
    best = min(candidates, key=lambda s: (len(s), s))
    return list(best)


def fuse(frames, indices) -> np.ndarray:
    """Elementwise mean over the selected frames."""
    stack = as_frames(frames)
    idx = sorted(int(i) for i in indices)
    if not idx:
        raise ValueError("index set must be nonempty")
    if idx[0] < 0 or idx[-1] >= len(stack):
        raise ValueError(f"index out of range for {len(stack)} frames")
    return stack[idx].mean(axis=0)


def subsample(frames, params: SubsampleParams = SubsampleParams()) -> SubsampleResult:
    """Alternating minimization of the subset objective.

    Starts from the mean of all frames, then repeats: recompute per-frame
    costs against the current reference, select the optimal subset, re-fuse
    the reference as the subset mean. The trace records the energy of the
    initial state and of every iteration; it is non-increasing because both
    alternating steps are exact minimizers.
    """
    stack = as_frames(frames)
    n = len(stack)
    quality = quality_measure(stack)
    indices = list(range(n))
    reference = stack.mean(axis=0)
    trace = [energy(reference, indices, stack, quality, params)]
    for _ in range(params.max_iter):
        costs = frame_costs(reference, stack, quality, params)
        indices = select_subset(costs, params)
        reference = fuse(stack, indices)
        trace.append(energy(reference, indices, stack, quality, params))
        if trace[-2] - trace[-1] <= params.tol:
            break
    return SubsampleResult(
        indices=indices,
        reference=reference,
        energy_trace=trace,
        quality=quality,
    )
