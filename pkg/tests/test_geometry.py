"""Polytope kernel against brute-force geometric oracles."""

import json
import math

import numpy as np
import pytest

from conftest import random_c_polytope
from polyinv.errors import ValidationError
from polyinv.geometry import (
    ConeSpec,
    cap_measure,
    contains_scaled,
    convex_hull_add,
    facets_in_cone,
    gauge,
    gauge_many,
    inclusion_ratio,
    load_polytope,
    polytope_from_dict,
    save_polytope,
    unit_box,
)
from polyinv.numerics import LinearProgram, RandomSource, solve_lp


def hull_2d_oracle(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull (independent of the package implementation).

    Strict turns only, so collinear mid-points are dropped and the result is
    the irredundant vertex set in counterclockwise order.
    """
    pts = sorted(map(tuple, points))

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                cross = (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox)
                if cross <= 1e-12:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(list(reversed(pts)))
    return np.array(lower[:-1] + upper[:-1])


def hull_3d_vertex_oracle(points: np.ndarray) -> np.ndarray:
    """Vertices via exhaustive supporting-plane enumeration over point triples."""
    m = len(points)
    is_vertex = np.zeros(m, dtype=bool)
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                normal = np.cross(points[j] - points[i], points[k] - points[i])
                norm = np.linalg.norm(normal)
                if norm < 1e-12:
                    continue
                normal = normal / norm
                s = (points - points[i]) @ normal
                if np.all(s <= 1e-9) or np.all(s >= -1e-9):
                    is_vertex[[i, j, k]] = True
    return points[is_vertex]


def vertex_sets_equal(A: np.ndarray, B: np.ndarray, tol: float) -> bool:
    if len(A) != len(B):
        return False
    A = A[np.lexsort(A.T[::-1])]
    B = B[np.lexsort(B.T[::-1])]
    return bool(np.max(np.abs(A - B)) <= tol)


def gauge_vertex_lp(S, x) -> float:
    """Oracle: min t s.t. x = sum lam_i v_i, lam >= 0, sum lam_i = t."""
    V = S.vertices
    k = V.shape[0]
    res = solve_lp(
        LinearProgram(
            objective=np.ones(k),
            eq=V.T.copy(),
            eq_rhs=np.asarray(x, dtype=float),
        )
    )
    assert res.status == "optimal"
    return res.value


class TestUnitBox:
    @pytest.mark.parametrize("n,nv,nf", [(2, 4, 4), (3, 8, 6), (8, 256, 16)])
    def test_counts(self, n, nv, nf):
        B = unit_box(n)
        assert B.vertex_count == nv
        assert B.facet_count == nf

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            unit_box(1)
        with pytest.raises(ValueError):
            unit_box(9)


class TestGauge:
    def test_square_examples(self):
        B = unit_box(2)
        assert gauge(B, [2.0, 0.0]) == pytest.approx(2.0, abs=1e-12)
        assert gauge(B, [1.0, 1.0]) == pytest.approx(1.0, abs=1e-12)
        assert gauge(B, [0.0, 0.0]) == 0.0

    def test_positive_homogeneity(self):
        S = random_c_polytope(3, 20, seed=4)
        rng = RandomSource(8)
        for _ in range(20):
            x = rng.normals(3)
            t = 0.1 + 3.0 * float(rng.uniforms(1)[0])
            assert gauge(S, t * x) == pytest.approx(t * gauge(S, x), rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3])
    def test_facet_max_matches_vertex_lp(self, n):
        rng = RandomSource(31 + n)
        for trial in range(5):
            S = random_c_polytope(n, 16, seed=100 * n + trial)
            probes = rng.normals(40 * n).reshape(40, n) * 1.5
            for x in probes:
                assert gauge(S, x) == pytest.approx(gauge_vertex_lp(S, x), abs=1e-7)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            gauge(unit_box(2), [1.0, 2.0, 3.0])


class TestHull:
    def test_interior_points_leave_set_unchanged(self):
        B = unit_box(2)
        assert convex_hull_add(B, [[0.5, 0.5], [0.0, -0.9]]) is B

    def test_pentagon_example(self):
        B = unit_box(2)
        P = convex_hull_add(B, [[2.0, 0.0]])
        expected = np.array(
            [[2.0, 0.0], [1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]
        )
        assert P.vertex_count == 5
        assert vertex_sets_equal(P.vertices, expected, 1e-12)

    @pytest.mark.parametrize("seed", range(12))
    def test_2d_against_monotone_chain(self, seed):
        rng = RandomSource(7000 + seed)
        pts = rng.normals(60).reshape(30, 2) * 1.2
        B = unit_box(2)
        P = convex_hull_add(B, pts)
        oracle = hull_2d_oracle(np.vstack([B.vertices, pts]))
        assert vertex_sets_equal(P.vertices, oracle, 1e-8)

    @pytest.mark.parametrize("seed", range(3))
    def test_3d_against_supporting_planes(self, seed):
        rng = RandomSource(8000 + seed)
        dirs = rng.normals(150).reshape(50, 3)
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        pts = dirs * (1.2 + rng.uniforms(50)[:, None])
        B = unit_box(3)
        P = convex_hull_add(B, pts)
        oracle = hull_3d_vertex_oracle(np.vstack([B.vertices, pts]))
        assert vertex_sets_equal(P.vertices, oracle, 1e-8)

    def test_monotone(self):
        S = random_c_polytope(2, 12, seed=3)
        rng = RandomSource(44)
        grown = convex_hull_add(S, rng.normals(20).reshape(10, 2) * 2.0)
        assert np.all(gauge_many(grown, S.vertices) <= 1.0 + 1e-9)

    def test_idempotent(self):
        S = random_c_polytope(3, 25, seed=9)
        again = convex_hull_add(S, S.vertices)
        assert again is S

    def test_symmetric_gauge_on_symmetric_set(self):
        B = unit_box(3)
        P = convex_hull_add(B, [[1.5, 0.2, 0.0], [-1.5, -0.2, 0.0]])
        rng = RandomSource(55)
        for _ in range(30):
            x = rng.normals(3)
            assert gauge(P, x) == pytest.approx(gauge(P, -x), rel=1e-12)


class TestContainsScaled:
    def test_examples(self):
        B = unit_box(2)
        assert contains_scaled(B, [[1.05, 0.0]], 1.1)
        assert not contains_scaled(B, [[1.2, 0.0]], 1.1)
        assert contains_scaled(B, np.empty((0, 2)), 1.0)


class TestInclusionRatio:
    def test_identity_and_homothety(self):
        B = unit_box(2)
        assert inclusion_ratio(B, B) == pytest.approx(1.0, abs=1e-12)
        assert inclusion_ratio(B, B.scaled(2.0)) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_ratio_is_tight(self, seed):
        inner = random_c_polytope(2, 14, seed=200 + seed)
        outer = random_c_polytope(2, 14, seed=300 + seed)
        lam = inclusion_ratio(inner, outer)
        scaled = outer.vertices * lam
        assert np.all(gauge_many(inner, scaled) <= 1.0 + 1e-9)
        assert np.max(gauge_many(inner, scaled * 1.001)) > 1.0

    def test_product_bound(self):
        for seed in range(5):
            A = random_c_polytope(2, 12, seed=400 + seed)
            B = random_c_polytope(2, 12, seed=500 + seed)
            assert inclusion_ratio(A, B) * inclusion_ratio(B, A) <= 1.0 + 1e-9


class TestFacetsInCone:
    def test_narrow_cone_single_facet(self):
        B = unit_box(2)
        hits = facets_in_cone(B, ConeSpec(np.array([1.0, 0.0]), 0.01))
        assert [B.facets[j].tolist() for j in hits] == [[1.0, 0.0]]

    def test_diagonal_cone_two_facets(self):
        B = unit_box(2)
        hits = facets_in_cone(B, ConeSpec(np.array([1.0, 1.0]), math.pi / 4))
        normals = sorted(tuple(B.facets[j]) for j in hits)
        assert normals == [(0.0, 1.0), (1.0, 0.0)]

    def test_half_space_limit_matches_vertex_signs(self):
        # theta -> pi/2: a facet meets the cone iff one of its vertices has
        # positive inner product with the axis
        S = random_c_polytope(2, 10, seed=21)
        u = np.array([0.3, -0.9])
        hits = set(facets_in_cone(S, ConeSpec(u, math.pi / 2 - 1e-6)))
        expected = set()
        for j, idx in enumerate(S.facet_vertices):
            if np.max(S.vertices[idx] @ u) > 1e-7:
                expected.add(j)
        assert hits == expected


class TestCapMeasure:
    def test_limits(self):
        assert cap_measure(0.0, 4) == 0.0
        assert cap_measure(math.pi / 2, 4) == pytest.approx(0.5, abs=1e-12)

    def test_circle_closed_form(self):
        for theta in np.linspace(0.0, math.pi / 2, 50):
            assert cap_measure(theta, 2) == pytest.approx(theta / math.pi, abs=1e-10)

    def test_sphere_closed_form(self):
        for theta in np.linspace(0.0, math.pi / 2, 50):
            assert cap_measure(theta, 3) == pytest.approx(
                (1.0 - math.cos(theta)) / 2.0, abs=1e-10
            )


class TestSerialization:
    def test_round_trip(self, tmp_path):
        S = random_c_polytope(3, 18, seed=77)
        path = tmp_path / "poly.json"
        save_polytope(S, path)
        T = load_polytope(path)
        assert T.n == S.n
        assert np.array_equal(T.vertices, S.vertices)
        assert np.array_equal(T.facets, S.facets)

    def test_schema_keys(self, tmp_path):
        path = tmp_path / "poly.json"
        save_polytope(unit_box(2), path)
        data = json.loads(path.read_text())
        assert set(data) == {"n", "vertices", "facets"}

    def test_vertex_violation_rejected(self):
        bad = {
            "n": 2,
            "vertices": [[2.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]],
            "facets": [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
        }
        with pytest.raises(ValidationError):
            polytope_from_dict(bad)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"n": 2, "vertices": [[')
        with pytest.raises(ValidationError):
            load_polytope(path)

    def test_dual_representation_consistency_after_updates(self):
        rng = RandomSource(91)
        S = unit_box(2)
        for _ in range(4):
            S = convex_hull_add(S, rng.normals(10).reshape(5, 2) * 1.4)
        probes = rng.normals(60).reshape(30, 2) * 2.0
        for x in probes:
            assert gauge(S, x) == pytest.approx(gauge_vertex_lp(S, x), abs=1e-7)
