"""Model-based and data-driven set iterations."""

import csv

import numpy as np
import pytest

from polyinv.errors import NonConvergenceError
from polyinv.geometry import gauge_many, unit_box
from polyinv.invariance import (
    IterationConfig,
    data_driven_invariant_set,
    feasibility_residual,
    model_based_invariant_set,
    write_trace_csv,
)
from polyinv.numerics import RandomSource
from polyinv.system import (
    SampleSet,
    SwitchedLinearSystem,
    generate_stable_system,
    sample_observations,
)


def contained(inner, outer, tol=1e-9):
    return bool(np.all(gauge_many(outer, inner.vertices) <= 1.0 + tol))


class TestModelBased:
    def test_contractive_identity_converges_immediately(self):
        sys = SwitchedLinearSystem([0.5 * np.eye(2)])
        S, trace = model_based_invariant_set(sys, unit_box(2))
        assert trace.iterations == 0
        assert trace.termination == "converged"
        assert S.vertex_count == 4
        assert np.allclose(sorted(map(tuple, S.vertices)), unit_box(2).vertices)

    def test_scaled_rotation_keeps_the_square(self):
        # 0.9 * (quarter-turn) maps the square onto 0.9 x itself
        R = 0.9 * np.array([[0.0, -1.0], [1.0, 0.0]])
        S, trace = model_based_invariant_set(SwitchedLinearSystem([R]), unit_box(2))
        assert trace.iterations == 0
        assert S.vertex_count == 4

    def test_invariance_residual_on_generated_system(self):
        sys = generate_stable_system(2, 4, 0.95, RandomSource(73))
        cfg = IterationConfig(tolerance=1e-8)
        S, trace = model_based_invariant_set(sys, unit_box(2), cfg)
        mapped = np.vstack([S.vertices @ A.T for A in sys.matrices])
        assert float(np.max(gauge_many(S, mapped))) - 1.0 <= cfg.tolerance

    def test_nonconvergence_carries_trace(self):
        # a barely-contracting rotation needs hundreds of hull updates
        ang = 1.0
        R = 0.999 * np.array(
            [[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]]
        )
        with pytest.raises(NonConvergenceError) as info:
            model_based_invariant_set(
                SwitchedLinearSystem([R]),
                unit_box(2),
                IterationConfig(tolerance=1e-8, max_iterations=3),
            )
        assert info.value.trace is not None
        assert info.value.trace.termination == "max_iter"
        assert len(info.value.trace.records) >= 3


class TestDataDriven:
    def test_contractive_identity_no_updates(self):
        sys = SwitchedLinearSystem([0.5 * np.eye(2)])
        samples = sample_observations(sys, 200, RandomSource(80))
        S, trace = data_driven_invariant_set(samples, unit_box(2))
        assert trace.iterations == 0
        assert len(trace.records) == 1
        assert S.vertex_count == 4
        assert not trace.inserting_pairs

    def test_symmetry_of_iterates(self):
        sys = generate_stable_system(2, 2, 0.95, RandomSource(81))
        samples = sample_observations(sys, 500, RandomSource(82))
        S, trace = data_driven_invariant_set(samples, unit_box(2), keep_iterates=True)
        for P in trace.iterates:
            flipped = -P.vertices
            assert np.all(gauge_many(P, flipped) <= 1.0 + 1e-9)

    @pytest.mark.parametrize("seed", range(4))
    def test_sandwich_against_model_based(self, seed):
        sys = generate_stable_system(2, 3, 0.95, RandomSource(600 + seed))
        samples = sample_observations(sys, 800, RandomSource(700 + seed))
        X = unit_box(2)
        S_data, tr_data = data_driven_invariant_set(samples, X, keep_iterates=True)
        S_model, tr_model = model_based_invariant_set(sys, X, keep_iterates=True)
        for k, P in enumerate(tr_data.iterates):
            Q = tr_model.iterates[min(k, len(tr_model.iterates) - 1)]
            assert contained(P, Q)

    def test_monotone_growth(self):
        sys = generate_stable_system(2, 4, 0.95, RandomSource(83))
        samples = sample_observations(sys, 400, RandomSource(84))
        _, trace = data_driven_invariant_set(samples, unit_box(2), keep_iterates=True)
        for earlier, later in zip(trace.iterates, trace.iterates[1:]):
            assert contained(earlier, later)

    def test_deterministic_output(self):
        sys = generate_stable_system(2, 4, 0.95, RandomSource(85))
        samples = sample_observations(sys, 600, RandomSource(86))
        S1, _ = data_driven_invariant_set(samples, unit_box(2))
        S2, _ = data_driven_invariant_set(samples, unit_box(2))
        assert np.array_equal(S1.vertices, S2.vertices)
        assert np.array_equal(S1.facets, S2.facets)

    def test_vertex_sources_point_at_creating_pairs(self):
        sys = generate_stable_system(2, 2, 0.95, RandomSource(87))
        samples = sample_observations(sys, 300, RandomSource(88))
        S, trace = data_driven_invariant_set(samples, unit_box(2))
        assert len(trace.vertex_sources) == S.vertex_count
        for vertex, source in zip(S.vertices, trace.vertex_sources):
            if source is None:
                continue
            pair, sign = source
            assert pair in trace.inserting_pairs
            y = sign * samples.ys[pair]
            # the vertex is the recorded sample image scaled by some factor
            cosangle = float(
                y @ vertex / (np.linalg.norm(y) * np.linalg.norm(vertex))
            )
            assert cosangle >= 1.0 - 1e-9


class TestResidual:
    def test_zero_after_convergence(self):
        sys = generate_stable_system(2, 4, 0.95, RandomSource(90))
        samples = sample_observations(sys, 500, RandomSource(91))
        cfg = IterationConfig(tolerance=1e-8)
        S, _ = data_driven_invariant_set(samples, unit_box(2), cfg)
        assert feasibility_residual(S, samples) <= cfg.tolerance

    def test_single_pair_expansion(self):
        B = unit_box(2)
        samples = SampleSet(
            2, 1, 0, np.array([[1.0, 0.0]]), np.array([1]), np.array([[2.0, 0.0]])
        )
        assert feasibility_residual(B, samples) == pytest.approx(1.0, abs=1e-12)

    def test_single_pair_interior(self):
        B = unit_box(2)
        samples = SampleSet(
            2, 1, 0, np.array([[1.0, 0.0]]), np.array([1]), np.array([[0.3, 0.3]])
        )
        assert feasibility_residual(B, samples) == 0.0


class TestTraceCsv:
    def test_columns_and_rows(self, tmp_path):
        sys = generate_stable_system(2, 2, 0.95, RandomSource(95))
        samples = sample_observations(sys, 300, RandomSource(96))
        _, trace = data_driven_invariant_set(samples, unit_box(2))
        path = tmp_path / "trace.csv"
        write_trace_csv(trace, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["k", "vertices", "facets", "max_gauge", "ms"]
        assert len(rows) == len(trace.records) + 1
        assert [int(r[0]) for r in rows[1:]] == list(range(len(trace.records)))
