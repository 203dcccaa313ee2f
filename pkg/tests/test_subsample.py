import math

import numpy as np
import pytest

from deturb.image import convolve_separable, gaussian_kernel
from deturb.simulate import SequenceSpec
from deturb.simulate import gen_sequence
from deturb.subsample import (
    SubsampleParams,
    brute_force_subsample_step,
    energy,
    fuse,
    quality_measure,
    select_subset,
    subsample,
)


def checker(size=24, contrast=1.0):
    y, x = np.mgrid[0:size, 0:size]
    return (contrast * (((x // 4) + (y // 4)) % 2))[:, :, np.newaxis]


class TestQualityMeasure:
    def test_normalization_of_known_sharpness(self):
        # Laplacian l1 scales linearly with checkerboard contrast, so
        # contrasts {1.0, 0.4, 0.7} produce sharpness {s, 0.4s, 0.7s}.
        frames = [checker(contrast=c) for c in (1.0, 0.4, 0.7)]
        q = quality_measure(frames)
        np.testing.assert_allclose(q, [0.0, 1.0, 0.5], atol=1e-9)

    def test_identical_frames_degenerate_to_zero(self, scene):
        frames = [scene(24, seed=1)] * 4
        np.testing.assert_array_equal(quality_measure(frames), np.zeros(4))

    def test_blur_raises_quality(self, scene):
        img = scene(32, seed=2)
        blurred = convolve_separable(img, gaussian_kernel(1.0))
        q = quality_measure([img, blurred])
        assert q[0] == 0.0
        assert q[1] == 1.0

    def test_bounds_with_extremes(self, scene):
        frames = [
            convolve_separable(scene(32, seed=3), gaussian_kernel(s))
            for s in (0.2, 0.5, 1.0, 2.0)
        ]
        q = quality_measure(frames)
        assert np.all(q >= 0.0) and np.all(q <= 1.0)
        assert q.min() == 0.0
        assert q.max() == 1.0


class TestEnergy:
    def test_identical_frames_leave_only_regularizer(self, scene):
        img = scene(16, seed=4)
        frames = [img] * 3
        p = SubsampleParams(sharpness_weight=0.0, size_reward=0.5, size_decay=1.0)
        value = energy(img, [0, 1, 2], frames, np.zeros(3), p)
        assert value == pytest.approx(-0.5 * (1.0 - math.exp(-3.0)), abs=1e-12)

    def test_single_term_reduction(self, scene):
        a = scene(16, seed=5)
        b = scene(16, seed=6)
        p = SubsampleParams(sharpness_weight=0.0, size_reward=0.0)
        expected = float(np.mean((a - b) ** 2))
        got = energy(a, [1], [a, b], np.zeros(2), p)
        # size_reward 0 still subtracts 0
        assert got == pytest.approx(expected, abs=1e-12)

    def test_rejects_empty_index_set(self, scene):
        with pytest.raises(ValueError):
            energy(scene(16), [], [scene(16)], np.zeros(1), SubsampleParams())


class TestSelectSubset:
    def test_no_reward_picks_singleton(self):
        p = SubsampleParams(size_reward=0.0)
        assert select_subset([1.0, 2.0, 3.0], p) == [0]
        assert select_subset([3.0, 1.0, 2.0], p) == [1]

    def test_equal_costs_select_everything(self):
        p = SubsampleParams(size_reward=0.5, size_decay=1.0)
        assert select_subset([0.7] * 5, p) == [0, 1, 2, 3, 4]

    def test_prefix_scores_of_worked_example(self):
        costs = [0.1, 0.2, 0.9]
        p = SubsampleParams(size_reward=0.5, size_decay=1.0)
        chosen = select_subset(costs, p)
        assert chosen == [0, 1]
        # independent score computation straight from the objective
        scores = []
        for j in (1, 2, 3):
            scores.append(
                sum(sorted(costs)[:j]) / j - 0.5 * (1.0 - math.exp(-j))
            )
        assert scores[0] == pytest.approx(-0.21606, abs=1e-5)
        assert scores[1] == pytest.approx(-0.28233, abs=1e-5)
        assert scores[2] == pytest.approx(-0.07511, abs=1e-5)
        assert min(scores) == scores[1]

    def test_scaling_invariance(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            costs = rng.random(8)
            p = SubsampleParams(size_reward=0.3, size_decay=0.4)
            scaled = SubsampleParams(size_reward=0.3 * 7.5, size_decay=0.4)
            assert select_subset(costs, p) == select_subset(costs * 7.5, scaled)

    def test_rejects_empty_and_nonfinite(self):
        with pytest.raises(ValueError):
            select_subset([], SubsampleParams())
        with pytest.raises(ValueError):
            select_subset([1.0, np.nan], SubsampleParams())


class TestBruteForceOracle:
    def test_no_reward_picks_minimum(self):
        p = SubsampleParams(size_reward=0.0)
        assert brute_force_subsample_step([0.4, 0.1, 0.2], p) == [1]

    def test_worked_example_matches_fast_path(self):
        p = SubsampleParams(size_reward=0.5, size_decay=1.0)
        assert brute_force_subsample_step([0.1, 0.2, 0.9], p) == [0, 1]

    def test_equivalence_on_random_instances(self):
        rng = np.random.default_rng(34)
        for _ in range(200):
            n = int(rng.integers(1, 11))
            costs = rng.random(n) * rng.uniform(0.1, 5.0)
            p = SubsampleParams(
                size_reward=float(rng.uniform(0.0, 1.0)),
                size_decay=float(rng.uniform(0.01, 1.0)),
            )
            assert select_subset(costs, p) == brute_force_subsample_step(costs, p)

    def test_tied_costs_agree_with_fast_path(self):
        p = SubsampleParams(size_reward=0.0)
        costs = [0.5, 0.5, 0.5]
        assert brute_force_subsample_step(costs, p) == select_subset(costs, p) == [0]

    def test_rejects_oversize(self):
        with pytest.raises(ValueError):
            brute_force_subsample_step(np.zeros(21), SubsampleParams())


class TestFuse:
    def test_singleton_identity(self, scene):
        frames = [scene(16, seed=i) for i in range(3)]
        np.testing.assert_array_equal(fuse(frames, [1]), frames[1])

    def test_two_constants_average(self):
        a = np.full((8, 8, 1), 0.2)
        b = np.full((8, 8, 1), 0.6)
        np.testing.assert_allclose(fuse([a, b], [0, 1]), 0.4, atol=1e-12)

    def test_all_frames_equal_mean_initializer(self, scene):
        frames = np.stack([scene(16, seed=i) for i in range(5)])
        np.testing.assert_allclose(
            fuse(frames, range(5)), frames.mean(axis=0), atol=1e-12
        )

    def test_rejects_empty(self, scene):
        with pytest.raises(ValueError):
            fuse([scene(8)], [])


class TestSubsample:
    def test_single_frame(self, scene):
        img = scene(24, seed=9)
        result = subsample([img])
        assert result.indices == [0]
        np.testing.assert_array_equal(result.reference, img)
        assert len(result.energy_trace) == 2  # initializer + one iteration

    def test_identical_frames_select_all(self, scene):
        img = scene(24, seed=10)
        result = subsample([img] * 6)
        assert result.indices == list(range(6))
        np.testing.assert_allclose(result.reference, img, atol=1e-12)
        assert len(result.energy_trace) <= 3

    def test_reference_is_mean_of_selection(self, scene):
        frames = gen_sequence(
            scene(48, seed=11),
            SequenceSpec.uniform(8, seed=5, patch_half=8, iterations=100),
        )
        result = subsample(frames)
        np.testing.assert_allclose(
            result.reference, frames[result.indices].mean(axis=0), atol=1e-6
        )

    def test_trace_non_increasing_and_terminates(self, scene):
        for seed in range(5):
            frames = gen_sequence(
                scene(48, seed=seed),
                SequenceSpec.uniform(10, seed=seed, patch_half=8, iterations=100),
            )
            params = SubsampleParams()
            result = subsample(frames, params)
            trace = result.energy_trace
            assert len(trace) <= params.max_iter + 1
            for earlier, later in zip(trace, trace[1:]):
                assert later <= earlier + 1e-9

    def test_mild_frames_preferred(self, scene):
        img = scene(64, seed=12)
        mild = SequenceSpec.uniform(
            3, seed=1, strength=0.05, blur=0.1, patch_half=16
        )
        severe = SequenceSpec.uniform(
            9, seed=2, strength=0.4, blur=1.0, patch_half=16
        )
        frames = np.concatenate(
            [gen_sequence(img, mild), gen_sequence(img, severe)]
        )
        result = subsample(frames)
        assert set(result.indices) & {0, 1, 2}
        assert len(set(result.indices) & {0, 1, 2}) >= 2
