"""Origin-containing polytopes with synchronized vertex and facet forms.

Every polytope here strictly contains the origin, so each facet plane can be
normalized to h.x <= 1. That makes the Minkowski gauge a plain maximum of
facet products, which is the hot path of the set iterations. Hull updates are
delegated to Qhull (scipy) and both representations are rebuilt afterwards.
"""

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegeneracyError, ValidationError
from .numerics.cones import FacetRegion, min_norm_on_facet_in_cone
from .numerics.special import reg_inc_beta

__all__ = [
    "ConeSpec",
    "Polytope",
    "cap_measure",
    "contains_scaled",
    "convex_hull_add",
    "facets_in_cone",
    "gauge",
    "gauge_many",
    "inclusion_ratio",
    "load_polytope",
    "merge_hull",
    "save_polytope",
    "unit_box",
]

VERTEX_MERGE_TOL = 1.0e-10
INTERIOR_TOL = 1.0e-12
FACET_ROUND_DECIMALS = 9
MIN_DIM = 2
MAX_DIM = 8


class Polytope:
    """Bounded convex polytope with the origin strictly interior.

    Attributes
    ----------
    n : dimension
    vertices : (V, n) array, irredundant extreme points, insertion order
    facets : (F, n) array of normals h, one inequality h.x <= 1 per row
    facet_vertices : per-facet arrays of incident vertex indices

    Instances are immutable: the arrays are marked read-only and hull
    updates return new values.
    """

    __slots__ = ("n", "vertices", "facets", "facet_vertices")

    def __init__(self, n, vertices, facets, facet_vertices):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        facets = np.ascontiguousarray(facets, dtype=float)
        vertices.setflags(write=False)
        facets.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "facets", facets)
        object.__setattr__(self, "facet_vertices", tuple(facet_vertices))

    def __setattr__(self, name, value):
        raise AttributeError("Polytope is immutable")

    def __repr__(self):
        return (
            f"Polytope(n={self.n}, vertices={len(self.vertices)}, "
            f"facets={len(self.facets)})"
        )

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def facet_count(self) -> int:
        return self.facets.shape[0]

    def scaled(self, factor: float) -> "Polytope":
        """The homothety factor * S (factor > 0)."""
        if factor <= 0.0:
            raise ValueError(f"scale factor must be positive, got {factor}")
        return Polytope(
            self.n, self.vertices * factor, self.facets / factor, self.facet_vertices
        )


def _merge_close_points(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Drop points within VERTEX_MERGE_TOL of an earlier one (keep first)."""
    decimals = 10
    _, first = np.unique(np.round(points, decimals), axis=0, return_index=True)
    keep = np.sort(first)
    return points[keep], keep


def _dedup_rows(rows: np.ndarray, tol: float = 5.0e-9) -> np.ndarray:
    """Cluster near-duplicate rows (inf-norm within `tol`), keeping the first.

    Rounding-based dedup misses pairs straddling a rounding boundary, which
    would leave sliver facets that make downstream programs degenerate.
    """
    kept: list[np.ndarray] = []
    for row in rows:
        if not any(np.max(np.abs(row - k)) <= tol for k in kept):
            kept.append(row)
    return np.array(kept)


def _facet_incidence(vertices: np.ndarray, facets: np.ndarray):
    prod = vertices @ facets.T  # (V, F)
    out = []
    for j in range(facets.shape[0]):
        out.append(np.flatnonzero(prod[:, j] >= 1.0 - 1.0e-9))
    return out


def _build_hull(points: np.ndarray) -> tuple[Polytope, np.ndarray]:
    """Hull of `points`; returns the polytope and the source index of each vertex.

    Vertex order follows the order of `points` (insertion order survives);
    facet rows are deduplicated and sorted lexicographically.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array")
    n = points.shape[1]
    if not np.all(np.isfinite(points)):
        raise ValueError("points contain non-finite entries")
    merged, kept_src = _merge_close_points(points)
    if merged.shape[0] <= n:
        raise DegeneracyError(
            f"need more than {n} distinct points for a full-dimensional hull"
        )
    try:
        hull = ConvexHull(merged)
    except QhullError:
        try:
            hull = ConvexHull(merged, qhull_options="QJ")
        except QhullError as exc:  # pragma: no cover - rare double failure
            raise DegeneracyError(f"hull construction failed: {exc}") from exc

    vert_idx = np.sort(hull.vertices)
    vertices = merged[vert_idx]
    src = kept_src[vert_idx]

    offsets = -hull.equations[:, -1]
    if np.min(offsets) <= INTERIOR_TOL:
        raise DegeneracyError("origin is not strictly interior to the hull")
    normals = _dedup_rows(hull.equations[:, :-1] / offsets[:, None])
    order = np.lexsort(normals.T[::-1])
    normals = normals[order]

    poly = Polytope(n, vertices, normals, _facet_incidence(vertices, normals))
    return poly, src


def unit_box(n: int) -> Polytope:
    """The hypercube {x : |x_i| <= 1}: 2^n vertices, 2n facets."""
    if not MIN_DIM <= n <= MAX_DIM:
        raise ValueError(f"supported dimensions are {MIN_DIM}..{MAX_DIM}, got {n}")
    vertices = np.array(list(itertools.product((-1.0, 1.0), repeat=n)))
    facets = np.vstack([np.eye(n), -np.eye(n)])
    order = np.lexsort(facets.T[::-1])
    facets = facets[order]
    return Polytope(n, vertices, facets, _facet_incidence(vertices, facets))


def gauge(S: Polytope, x) -> float:
    """Minkowski gauge ||x||_S = min {lam >= 0 : x in lam S} (facet maximum)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != S.n:
        raise ValueError(f"point dimension {x.size} != polytope dimension {S.n}")
    return max(0.0, float(np.max(S.facets @ x)))


def gauge_many(S: Polytope, points: np.ndarray) -> np.ndarray:
    """Gauge of each row of `points`, shape (k,)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != S.n:
        raise ValueError("points must have shape (k, n)")
    return np.maximum(0.0, (points @ S.facets.T).max(axis=1))


def contains_scaled(S: Polytope, points, factor: float) -> bool:
    """True iff every point satisfies gauge <= factor (+1e-12 slack)."""
    if factor < 1.0:
        raise ValueError(f"factor must be >= 1, got {factor}")
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return True
    points = np.atleast_2d(points)
    return bool(np.all(gauge_many(S, points) <= factor + 1.0e-12))


def merge_hull(S: Polytope, points) -> tuple[Polytope, np.ndarray]:
    """conv(S union points) plus, per result vertex, its source index.

    Source indices < S.vertex_count refer to vertices of S; larger values
    refer to rows of `points` offset by S.vertex_count. Points already
    inside S (gauge <= 1 + 1e-12) leave S unchanged.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        return S, np.arange(S.vertex_count)
    if points.shape[1] != S.n:
        raise ValueError("point dimension mismatch")
    outside = gauge_many(S, points) > 1.0 + 1.0e-12
    if not np.any(outside):
        return S, np.arange(S.vertex_count)
    stacked = np.vstack([S.vertices, points])
    ext_rows = np.concatenate(
        [np.arange(S.vertex_count), S.vertex_count + np.flatnonzero(outside)]
    )
    poly, src_local = _build_hull(stacked[ext_rows])
    return poly, ext_rows[src_local]


def convex_hull_add(S: Polytope, points) -> Polytope:
    """conv(S union points) with both representations rebuilt."""
    poly, _ = merge_hull(S, points)
    return poly


def inclusion_ratio(inner: Polytope, outer: Polytope) -> float:
    """Largest lam >= 0 with lam * outer contained in inner.

    Equals 1 / max_{v in vertices(outer)} gauge(inner, v).
    """
    if inner.n != outer.n:
        raise ValueError("dimension mismatch")
    worst = float(np.max(gauge_many(inner, outer.vertices)))
    return 1.0 / worst


@dataclass(frozen=True)
class ConeSpec:
    """Second-order cone {x : u.x >= ||u|| ||x|| cos(theta)}."""

    direction: np.ndarray
    theta: float

    def __post_init__(self):
        u = np.asarray(self.direction, dtype=float).ravel()
        if not np.all(np.isfinite(u)) or np.linalg.norm(u) == 0.0:
            raise ValueError("cone direction must be finite and nonzero")
        if not 0.0 <= self.theta <= math.pi / 2.0:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
        object.__setattr__(self, "direction", u)


def facet_region(S: Polytope, facet_index: int) -> FacetRegion:
    """Facet `facet_index` as its defining equality plus the other inequalities."""
    h = S.facets[facet_index]
    rest = np.delete(S.facets, facet_index, axis=0)
    return FacetRegion(
        eq_normal=h,
        eq_rhs=1.0,
        ineq=rest,
        ineq_rhs=np.ones(rest.shape[0]),
    )


def facets_in_cone(S: Polytope, cone: ConeSpec) -> list[int]:
    """Indices of facets whose intersection with the cone is nonempty.

    Decided by the same conic-lift cutting-plane solve used for the
    minimum-norm subproblems.
    """
    delta = math.cos(cone.theta)
    # delta = 1 (theta = 0) degenerates to a ray; nudge inside the open range.
    delta = min(max(delta, 1.0e-12), 1.0 - 1.0e-12)
    hits = []
    for j in range(S.facet_count):
        value = min_norm_on_facet_in_cone(facet_region(S, j), cone.direction, delta)
        if value is not None:
            hits.append(j)
    return hits


def cap_measure(theta: float, n: int) -> float:
    """Spherical measure of a cap of angle theta: I(sin^2 theta; (n-1)/2, 1/2)/2."""
    if not -1.0e-12 <= theta <= math.pi / 2.0 + 1.0e-12:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    theta = min(max(theta, 0.0), math.pi / 2.0)
    s = math.sin(theta)
    return 0.5 * reg_inc_beta(min(1.0, s * s), (n - 1) / 2.0, 0.5)


# ---------------------------------------------------------------------------
# serialization: {"n": int, "vertices": [[...]], "facets": [[...]]}
# ---------------------------------------------------------------------------


def polytope_to_dict(S: Polytope) -> dict:
    return {
        "n": S.n,
        "vertices": S.vertices.tolist(),
        "facets": S.facets.tolist(),
    }


def polytope_from_dict(data: dict) -> Polytope:
    try:
        n = int(data["n"])
        vertices = np.asarray(data["vertices"], dtype=float)
        facets = np.asarray(data["facets"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed polytope payload: {exc}") from exc
    if vertices.ndim != 2 or facets.ndim != 2:
        raise ValidationError("vertices and facets must be 2-D arrays")
    if vertices.shape[1] != n or facets.shape[1] != n:
        raise ValidationError(
            f"dimension mismatch: n={n}, vertices {vertices.shape}, facets {facets.shape}"
        )
    if not (np.all(np.isfinite(vertices)) and np.all(np.isfinite(facets))):
        raise ValidationError("polytope entries must be finite")
    poly = Polytope(n, vertices, facets, _facet_incidence(vertices, facets))
    worst = float(np.max(gauge_many(poly, vertices)))
    if worst > 1.0 + 1.0e-9:
        raise ValidationError(
            f"vertex violates a facet inequality by {worst - 1.0:.3e}"
        )
    return poly


def save_polytope(S: Polytope, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(polytope_to_dict(S), fh)
        fh.write("\n")


def load_polytope(path) -> Polytope:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    return polytope_from_dict(data)
