"""Shared test helpers: random C-polytopes and small independent oracles."""

import numpy as np
import pytest

from polyinv.errors import DegeneracyError
from polyinv.geometry import Polytope, _build_hull
from polyinv.numerics import RandomSource


def random_c_polytope(n: int, points: int, seed: int) -> Polytope:
    """Hull of random points at radii in [0.7, 1.6]; origin strictly interior.

    Retries nearby seeds until the hull is full-dimensional and contains the
    origin (guaranteed quickly for points >= 4 n).
    """
    for attempt in range(50):
        rng = RandomSource(seed + 1000 * attempt)
        dirs = rng.normals(points * n).reshape(points, n)
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        radii = 0.7 + 0.9 * rng.uniforms(points)
        try:
            poly, _ = _build_hull(dirs * radii[:, None])
            return poly
        except DegeneracyError:
            continue
    raise RuntimeError("could not build a random C-polytope")


@pytest.fixture
def rng():
    return RandomSource(20250809)
