"""System generator, sampling oracle, trajectories and serialization."""

import itertools
import json

import numpy as np
import pytest

from polyinv.errors import ValidationError
from polyinv.geometry import unit_box
from polyinv.invariance import model_based_invariant_set
from polyinv.numerics import RandomSource
from polyinv.system import (
    SampleSet,
    SwitchedLinearSystem,
    generate_stable_system,
    load_samples,
    load_system,
    product_norm_bound,
    sample_observations,
    save_samples,
    save_system,
    trajectory,
)


class TestGenerator:
    def test_single_mode_scaling(self):
        sys = generate_stable_system(3, 1, 0.8, RandomSource(1))
        assert sys.M == 1
        assert product_norm_bound(sys, 3) <= 0.8 + 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_length3_product_bound_exhaustive(self, seed):
        # independent re-check: enumerate all M^3 products directly
        sys = generate_stable_system(2, 4, 0.9, RandomSource(40 + seed))
        worst = 0.0
        for combo in itertools.product(range(4), repeat=3):
            P = np.eye(2)
            for idx in combo:
                P = sys.matrices[idx] @ P
            worst = max(worst, float(np.linalg.norm(P, 2)))
        assert worst <= 0.9**3 + 1e-9

    def test_model_iteration_terminates_on_generated_system(self):
        sys = generate_stable_system(2, 4, 0.9, RandomSource(6))
        S, trace = model_based_invariant_set(sys, unit_box(2))
        assert trace.termination == "converged"

    def test_range_guards(self):
        rng = RandomSource(0)
        with pytest.raises(ValueError):
            generate_stable_system(1, 2, 0.9, rng)
        with pytest.raises(ValueError):
            generate_stable_system(9, 2, 0.9, rng)
        with pytest.raises(ValueError):
            generate_stable_system(2, 0, 0.9, rng)
        with pytest.raises(ValueError):
            generate_stable_system(2, 17, 0.9, rng)
        with pytest.raises(ValueError):
            generate_stable_system(2, 2, 1.0, rng)


class TestSampling:
    def test_single_pair(self):
        sys = generate_stable_system(2, 3, 0.9, RandomSource(2))
        samples = sample_observations(sys, 1, RandomSource(3))
        assert len(samples) == 1
        pair = next(samples.pairs)
        assert abs(np.linalg.norm(pair.x) - 1.0) <= 1e-12
        assert np.allclose(pair.y, sys.matrices[pair.sigma - 1] @ pair.x, atol=0)

    def test_mode_frequencies_within_3_sigma(self):
        M, N = 4, 10000
        sys = generate_stable_system(2, M, 0.9, RandomSource(4))
        samples = sample_observations(sys, N, RandomSource(5))
        sigma = np.sqrt(N * (1 / M) * (1 - 1 / M))
        for m in range(1, M + 1):
            count = int(np.sum(samples.sigmas == m))
            assert abs(count - N / M) <= 3 * sigma

    def test_identical_seed_identical_bytes(self, tmp_path):
        sys = generate_stable_system(3, 2, 0.9, RandomSource(8))
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        save_samples(sample_observations(sys, 100, RandomSource(99)), p1)
        save_samples(sample_observations(sys, 100, RandomSource(99)), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_count_guard(self):
        sys = generate_stable_system(2, 2, 0.9, RandomSource(10))
        with pytest.raises(ValueError):
            sample_observations(sys, 0, RandomSource(1))


class TestTrajectory:
    def test_empty_mode_sequence(self):
        sys = SwitchedLinearSystem([0.5 * np.eye(2)])
        out = trajectory(sys, [1.0, 2.0], [])
        assert out.shape == (1, 2)
        assert np.array_equal(out[0], [1.0, 2.0])

    def test_halving(self):
        sys = SwitchedLinearSystem([0.5 * np.eye(2)])
        out = trajectory(sys, [1.0, 0.0], [1, 1])
        assert np.allclose(out, [[1, 0], [0.5, 0], [0.25, 0]], atol=0)

    def test_matches_matrix_product(self):
        sys = generate_stable_system(3, 3, 0.9, RandomSource(12))
        rng = RandomSource(13)
        x0 = rng.normals(3)
        modes = [int(m) + 1 for m in rng.integers(3, 7)]
        out = trajectory(sys, x0, modes)
        P = np.eye(3)
        for m in modes:
            P = sys.matrices[m - 1] @ P
        assert np.allclose(out[-1], P @ x0, atol=1e-12)

    def test_invalid_mode(self):
        sys = SwitchedLinearSystem([np.eye(2)])
        with pytest.raises(ValueError):
            trajectory(sys, [1.0, 0.0], [2])


class TestSerialization:
    def test_system_round_trip(self, tmp_path):
        sys = generate_stable_system(4, 3, 0.85, RandomSource(21))
        path = tmp_path / "sys.json"
        save_system(sys, path)
        again = load_system(path)
        assert again == sys
        # a second save is byte-identical (decimal strings preserved)
        path2 = tmp_path / "sys2.json"
        save_system(again, path2)
        assert path.read_bytes() == path2.read_bytes()

    def test_rectangular_matrix_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n": 2, "M": 1, "modes": [[1, 2, 3, 4, 5, 6]]}))
        with pytest.raises(ValidationError):
            load_system(path)

    def test_zero_modes_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n": 2, "M": 0, "modes": []}))
        with pytest.raises(ValidationError):
            load_system(path)

    def test_parse_error_carries_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"n": 2,\n "M": }')
        with pytest.raises(ValidationError, match="line 2"):
            load_system(path)

    def test_samples_round_trip(self, tmp_path):
        sys = generate_stable_system(2, 2, 0.9, RandomSource(31))
        samples = sample_observations(sys, 50, RandomSource(32))
        path = tmp_path / "samp.json"
        save_samples(samples, path)
        again = load_samples(path)
        assert np.array_equal(again.xs, samples.xs)
        assert np.array_equal(again.ys, samples.ys)
        assert np.array_equal(again.sigmas, samples.sigmas)
        assert again.seed == samples.seed

    def test_sample_validation(self):
        with pytest.raises(ValidationError):
            SampleSet(2, 2, 0, np.array([[2.0, 0.0]]), np.array([1]), np.array([[1.0, 0.0]]))
        with pytest.raises(ValidationError):
            SampleSet(2, 2, 0, np.array([[1.0, 0.0]]), np.array([3]), np.array([[1.0, 0.0]]))
