"""Switched linear systems: model, stable generator, sampling oracle, files.

The synthesis pipeline is black-box: it consumes only sampled
(state, successor) pairs. The matrices stay available for the explicitly
named validation operations (model-based iteration, violation probing).
"""

import itertools
import json
from typing import Iterator, NamedTuple

import numpy as np

from .errors import ValidationError
from .numerics.rng import RandomSource, sample_unit_sphere_many

__all__ = [
    "SamplePair",
    "SampleSet",
    "SwitchedLinearSystem",
    "generate_stable_system",
    "load_samples",
    "load_system",
    "product_norm_bound",
    "sample_observations",
    "save_samples",
    "save_system",
    "trajectory",
]

MIN_DIM = 2
MAX_DIM = 8
MAX_MODES = 16


class SwitchedLinearSystem:
    """x(t+1) = A_sigma(t) x(t) with sigma(t) chosen from M modes."""

    __slots__ = ("n", "M", "matrices")

    def __init__(self, matrices):
        mats = tuple(np.ascontiguousarray(A, dtype=float) for A in matrices)
        if len(mats) == 0:
            raise ValidationError("a system needs at least one mode")
        n = mats[0].shape[0]
        for A in mats:
            if A.ndim != 2 or A.shape != (n, n):
                raise ValidationError(
                    f"every mode must be an {n}x{n} matrix, got {A.shape}"
                )
            if not np.all(np.isfinite(A)):
                raise ValidationError("mode matrix contains non-finite entries")
        for A in mats:
            A.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "M", len(mats))
        object.__setattr__(self, "matrices", mats)

    def __setattr__(self, name, value):
        raise AttributeError("SwitchedLinearSystem is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, SwitchedLinearSystem)
            and self.n == other.n
            and self.M == other.M
            and all(np.array_equal(a, b) for a, b in zip(self.matrices, other.matrices))
        )

    def __repr__(self):
        return f"SwitchedLinearSystem(n={self.n}, M={self.M})"


class SamplePair(NamedTuple):
    x: np.ndarray  # unit initial state
    sigma: int  # mode index in 1..M (kept for bookkeeping, never branched on)
    y: np.ndarray  # successor A_sigma x


class SampleSet:
    """Observation set of (initial state, mode, successor) triples."""

    __slots__ = ("n", "M", "seed", "xs", "sigmas", "ys")

    def __init__(self, n, M, seed, xs, sigmas, ys):
        xs = np.ascontiguousarray(xs, dtype=float)
        ys = np.ascontiguousarray(ys, dtype=float)
        sigmas = np.ascontiguousarray(sigmas, dtype=np.int64)
        if xs.ndim != 2 or ys.shape != xs.shape or xs.shape[1] != n:
            raise ValidationError("sample arrays have inconsistent shapes")
        if sigmas.shape != (xs.shape[0],):
            raise ValidationError("mode array has inconsistent length")
        if xs.shape[0] < 1:
            raise ValidationError("a sample set needs at least one pair")
        if np.any(sigmas < 1) or np.any(sigmas > M):
            raise ValidationError(f"mode indices must lie in 1..{M}")
        norms = np.linalg.norm(xs, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1.0e-9:
            raise ValidationError("initial states must be unit vectors")
        for arr in (xs, ys, sigmas):
            arr.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "M", int(M))
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "sigmas", sigmas)
        object.__setattr__(self, "ys", ys)

    def __setattr__(self, name, value):
        raise AttributeError("SampleSet is immutable")

    def __len__(self) -> int:
        return self.xs.shape[0]

    def __repr__(self):
        return f"SampleSet(n={self.n}, M={self.M}, N={len(self)}, seed={self.seed})"

    @property
    def pairs(self) -> Iterator[SamplePair]:
        for i in range(len(self)):
            yield SamplePair(self.xs[i], int(self.sigmas[i]), self.ys[i])

    def without(self, index: int) -> "SampleSet":
        """Copy with pair `index` removed (leave-one-out reruns)."""
        if not 0 <= index < len(self):
            raise IndexError(f"pair index {index} out of range")
        keep = np.arange(len(self)) != index
        return SampleSet(
            self.n, self.M, self.seed, self.xs[keep], self.sigmas[keep], self.ys[keep]
        )


def product_norm_bound(sys: SwitchedLinearSystem, length: int = 3) -> float:
    """max over all mode products of the given length of ||product||_2^(1/length).

    By norm submultiplicativity this upper-bounds the joint spectral radius.
    """
    worst = 0.0
    for combo in itertools.product(range(sys.M), repeat=length):
        P = np.eye(sys.n)
        for idx in combo:
            P = sys.matrices[idx] @ P
        worst = max(worst, float(np.linalg.norm(P, 2)))
    return worst ** (1.0 / length)


def generate_stable_system(
    n: int, M: int, decay: float, rng: RandomSource
) -> SwitchedLinearSystem:
    """Random M-mode system rescaled so the length-3 product bound equals `decay`.

    Gaussian matrices are scaled by decay/c where c is the length-3 product
    norm bound, which certifies a joint spectral radius <= decay while still
    allowing individual matrices with spectral norm above one.
    """
    if not MIN_DIM <= n <= MAX_DIM:
        raise ValueError(f"supported dimensions are {MIN_DIM}..{MAX_DIM}, got {n}")
    if not 1 <= M <= MAX_MODES:
        raise ValueError(f"mode count must lie in 1..{MAX_MODES}, got {M}")
    if not 0.0 < decay < 1.0:
        raise ValueError(f"decay must lie in (0, 1), got {decay}")
    mats = [rng.normals(n * n).reshape(n, n) for _ in range(M)]
    raw = SwitchedLinearSystem(mats)
    c = product_norm_bound(raw, 3)
    if c < 1.0e-12:
        raise ValueError("degenerate random draw; try another seed")
    scale = decay / c
    return SwitchedLinearSystem([A * scale for A in mats])


def sample_observations(
    sys: SwitchedLinearSystem, N: int, rng: RandomSource
) -> SampleSet:
    """N i.i.d. observations: uniform sphere states, uniform modes, exact successors.

    Draw order is fixed: all initial states first, then all mode indices.
    """
    if N < 1:
        raise ValueError(f"sample count must be >= 1, got {N}")
    xs = sample_unit_sphere_many(sys.n, N, rng)
    sigmas = rng.integers(sys.M, N) + 1
    ys = np.empty_like(xs)
    for m in range(1, sys.M + 1):
        rows = sigmas == m
        if np.any(rows):
            ys[rows] = xs[rows] @ sys.matrices[m - 1].T
    return SampleSet(sys.n, sys.M, rng.seed, xs, sigmas, ys)


def trajectory(sys: SwitchedLinearSystem, x0, modes) -> np.ndarray:
    """States x(0..k) under the given mode sequence, shape (k+1, n)."""
    x0 = np.asarray(x0, dtype=float).ravel()
    if x0.size != sys.n:
        raise ValueError(f"state dimension {x0.size} != system dimension {sys.n}")
    out = np.empty((len(modes) + 1, sys.n))
    out[0] = x0
    for t, m in enumerate(modes):
        if not 1 <= int(m) <= sys.M:
            raise ValueError(f"mode index {m} outside 1..{sys.M}")
        out[t + 1] = sys.matrices[int(m) - 1] @ out[t]
    return out


# ---------------------------------------------------------------------------
# serialization
# system JSON:  {"n": int, "M": int, "modes": [[row-major n*n reals], ...]}
# samples JSON: {"n":., "M":., "seed":., "pairs": [{"x":[..], "sigma":., "y":[..]}]}
# ---------------------------------------------------------------------------


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}") from exc


def save_system(sys: SwitchedLinearSystem, path) -> None:
    payload = {
        "n": sys.n,
        "M": sys.M,
        "modes": [A.ravel().tolist() for A in sys.matrices],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_system(path) -> SwitchedLinearSystem:
    data = _load_json(path)
    try:
        n = int(data["n"])
        M = int(data["M"])
        modes = data["modes"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed system payload: {exc}") from exc
    if M < 1:
        raise ValidationError(f"{path}: mode count must be >= 1, got {M}")
    if not isinstance(modes, list) or len(modes) != M:
        raise ValidationError(f"{path}: expected {M} mode matrices")
    mats = []
    for i, flat in enumerate(modes):
        arr = np.asarray(flat, dtype=float)
        if arr.shape != (n * n,):
            raise ValidationError(
                f"{path}: mode {i} has {arr.size} entries, expected {n * n}"
            )
        mats.append(arr.reshape(n, n))
    return SwitchedLinearSystem(mats)


def save_samples(samples: SampleSet, path) -> None:
    payload = {
        "n": samples.n,
        "M": samples.M,
        "seed": samples.seed,
        "pairs": [
            {"x": x.tolist(), "sigma": int(s), "y": y.tolist()}
            for x, s, y in samples.pairs
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_samples(path) -> SampleSet:
    data = _load_json(path)
    try:
        n = int(data["n"])
        M = int(data["M"])
        seed = int(data["seed"])
        pairs = data["pairs"]
        xs = np.asarray([p["x"] for p in pairs], dtype=float)
        sigmas = np.asarray([p["sigma"] for p in pairs], dtype=np.int64)
        ys = np.asarray([p["y"] for p in pairs], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed sample payload: {exc}") from exc
    return SampleSet(n, M, seed, xs, sigmas, ys)
