"""Seeded random sampling on a fixed counter-based generator.

The bit stream is Philox-4x64-10 keyed directly by the 64-bit seed (no seed
hashing), so identical seeds give identical raw streams on every platform.
Derived quantities use fixed constructions on top of the raw 64-bit words:

  uniform double  u = (word >> 11) * 2**-53          (in [0, 1))
  normal pair     Box-Muller on consecutive uniforms
  integer in [0,m)  floor(u * m)

Child streams come from a splitmix64 mix of (parent seed, stream index).
"""

import math

import numpy as np

__all__ = ["RandomSource", "splitmix64", "derive_seed", "sample_unit_sphere"]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    """One splitmix64 output step (Steele-Lea-Flood constants)."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(parent_seed: int, stream_index: int) -> int:
    """Child seed for independent parallel streams: splitmix64(parent + i + 1)."""
    return splitmix64((parent_seed + stream_index + 1) & _MASK64)


class RandomSource:
    """Deterministic stream of uniforms/normals; state is (seed, draw counter)."""

    def __init__(self, seed: int):
        if not isinstance(seed, (int, np.integer)):
            raise ValueError(f"seed must be an integer, got {type(seed).__name__}")
        seed = int(seed)
        if seed < 0 or seed > _MASK64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        self.seed = seed
        self._bitgen = np.random.Philox(key=seed)
        self._draws = 0

    @property
    def state(self) -> tuple[int, int]:
        """(seed, number of raw 64-bit words consumed)."""
        return (self.seed, self._draws)

    def child(self, stream_index: int) -> "RandomSource":
        """Independent substream; see `derive_seed` for the mixing rule."""
        return RandomSource(derive_seed(self.seed, stream_index))

    def raw(self, count: int) -> np.ndarray:
        """Next `count` raw 64-bit words."""
        self._draws += count
        return self._bitgen.random_raw(count)

    def uniforms(self, count: int) -> np.ndarray:
        """Uniform doubles in [0, 1), 53-bit resolution."""
        return (self.raw(count) >> np.uint64(11)) * (2.0 ** -53)

    def normals(self, count: int) -> np.ndarray:
        """Standard normals via Box-Muller on uniform pairs."""
        pairs = (count + 1) // 2
        u = self.uniforms(2 * pairs)
        u1 = u[0::2]
        u2 = u[1::2]
        # u1 = 0 would blow up the log; shift into (0, 1].
        r = np.sqrt(-2.0 * np.log(1.0 - u1))
        ang = 2.0 * math.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(ang)
        z[1::2] = r * np.sin(ang)
        return z[:count]

    def integer(self, upper: int) -> int:
        """One integer uniform on {0, ..., upper-1}."""
        if upper <= 0:
            raise ValueError(f"upper must be positive, got {upper}")
        return min(upper - 1, int(self.uniforms(1)[0] * upper))

    def integers(self, upper: int, count: int) -> np.ndarray:
        """Integers uniform on {0, ..., upper-1}."""
        if upper <= 0:
            raise ValueError(f"upper must be positive, got {upper}")
        vals = (self.uniforms(count) * upper).astype(np.int64)
        return np.minimum(vals, upper - 1)


def sample_unit_sphere(n: int, rng: RandomSource) -> np.ndarray:
    """Uniform point on the unit sphere in R^n (normalized Gaussian vector)."""
    if n < 2:
        raise ValueError(f"sphere dimension must be >= 2, got {n}")
    while True:
        z = rng.normals(n)
        norm = float(np.linalg.norm(z))
        if norm > 1.0e-8:
            return z / norm


def sample_unit_sphere_many(n: int, count: int, rng: RandomSource) -> np.ndarray:
    """`count` independent uniform sphere points, shape (count, n)."""
    if n < 2:
        raise ValueError(f"sphere dimension must be >= 2, got {n}")
    z = rng.normals(count * n).reshape(count, n)
    norms = np.linalg.norm(z, axis=1)
    bad = norms <= 1.0e-8
    while np.any(bad):
        z[bad] = rng.normals(int(bad.sum()) * n).reshape(-1, n)
        norms = np.linalg.norm(z, axis=1)
        bad = norms <= 1.0e-8
    return z / norms[:, None]
