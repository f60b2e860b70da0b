"""Set iterations: model-based reachability hulls and the data-driven variant.

The model-based iteration grows an initial C-polytope by the one-step
forward reachable set, applied to vertices only (exact by linearity):

    S_{k+1} = conv(S_k union {A v : A mode, v vertex of S_k})

The data-driven iteration has no matrices. At step k every observed pair
(x, y) contributes the two scaled points y/||x||_S and -y/||-x||_S, where
||.||_S is the gauge of the current iterate; the iterate is grown by their
hull until all scaled points fit inside (1 + tolerance) S_k.
"""

import csv
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NonConvergenceError
from .geometry import Polytope, gauge_many, merge_hull
from .system import SampleSet, SwitchedLinearSystem

__all__ = [
    "IterationConfig",
    "IterationRecord",
    "IterationTrace",
    "data_driven_invariant_set",
    "feasibility_residual",
    "model_based_invariant_set",
    "write_trace_csv",
]


@dataclass(frozen=True)
class IterationConfig:
    tolerance: float = 1.0e-8
    max_iterations: int = 200

    def __post_init__(self):
        if self.tolerance <= 0.0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    vertices: int
    facets: int
    max_gauge: float
    ms: float


@dataclass
class IterationTrace:
    """Per-iteration diagnostics of a set iteration run.

    `vertex_sources[j]` tags vertex j of the final polytope: None when it
    survives from the initial set, else (pair index, sign) for the sample
    point that created it. `inserting_pairs` collects every pair index that
    was a hull vertex of ANY iterate; only those pairs can influence the
    result, which is what the supporting-point pre-filter relies on.
    """

    records: list[IterationRecord] = field(default_factory=list)
    termination: str = "running"  # converged | max_iter | degeneracy
    vertex_sources: Optional[list] = None
    inserting_pairs: set = field(default_factory=set)
    iterates: Optional[list[Polytope]] = None

    @property
    def iterations(self) -> int:
        """Number of hull updates performed (0 when the first check passes)."""
        return self.records[-1].k if self.records else 0

    @property
    def total_ms(self) -> float:
        return sum(r.ms for r in self.records)


def write_trace_csv(trace: IterationTrace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "vertices", "facets", "max_gauge", "ms"])
        for r in trace.records:
            writer.writerow([r.k, r.vertices, r.facets, repr(r.max_gauge), repr(r.ms)])


def model_based_invariant_set(
    sys: SwitchedLinearSystem,
    X: Polytope,
    cfg: IterationConfig = IterationConfig(),
    keep_iterates: bool = False,
) -> tuple[Polytope, IterationTrace]:
    """Smallest invariant set containing X, up to the stopping tolerance.

    Terminates when every mapped vertex satisfies gauge <= 1 + tolerance;
    the result S then satisfies gauge(S, A v) <= 1 + tolerance for every
    vertex v and every mode A.
    """
    if sys.n != X.n:
        raise ValueError("system/polytope dimension mismatch")
    S = X
    trace = IterationTrace(iterates=[X] if keep_iterates else None)
    for k in range(cfg.max_iterations + 1):
        t0 = time.perf_counter()
        mapped = np.vstack([S.vertices @ A.T for A in sys.matrices])
        worst = float(np.max(gauge_many(S, mapped)))
        converged = worst <= 1.0 + cfg.tolerance
        if not converged and k < cfg.max_iterations:
            S, _ = merge_hull(S, mapped)
            if keep_iterates:
                trace.iterates.append(S)
        ms = (time.perf_counter() - t0) * 1000.0
        trace.records.append(
            IterationRecord(k, S.vertex_count, S.facet_count, worst, ms)
        )
        if converged:
            trace.termination = "converged"
            return S, trace
    trace.termination = "max_iter"
    raise NonConvergenceError(
        f"model-based iteration did not converge in {cfg.max_iterations} steps",
        trace,
    )


def data_driven_invariant_set(
    samples: SampleSet,
    X: Polytope,
    cfg: IterationConfig = IterationConfig(),
    keep_iterates: bool = False,
) -> tuple[Polytope, IterationTrace]:
    """Invariant-set candidate from observations alone.

    Both signed copies of each scaled successor are used, so a symmetric
    initial set yields symmetric iterates. On return, every pair satisfies
    gauge(S, y) <= (1 + tolerance) gauge(S, x).
    """
    if samples.n != X.n:
        raise ValueError("sample/polytope dimension mismatch")
    N = len(samples)
    signed_x = np.vstack([samples.xs, -samples.xs])
    signed_y = np.vstack([samples.ys, -samples.ys])
    # row i of the signed arrays maps to (pair i mod N, sign + for i < N)
    S = X
    sources: list = [None] * X.vertex_count
    trace = IterationTrace(
        vertex_sources=sources, iterates=[X] if keep_iterates else None
    )
    for k in range(cfg.max_iterations + 1):
        t0 = time.perf_counter()
        gx = gauge_many(S, signed_x)
        scaled = signed_y / gx[:, None]
        gp = gauge_many(S, scaled)
        worst = float(np.max(gp))
        converged = worst <= 1.0 + cfg.tolerance
        if not converged and k < cfg.max_iterations:
            outside = np.flatnonzero(gp > 1.0 + 1.0e-12)
            S, src = merge_hull(S, scaled[outside])
            new_sources = []
            for idx in src:
                if idx < len(sources):
                    new_sources.append(sources[idx])
                else:
                    row = int(outside[idx - len(sources)])
                    pair = row % N
                    sign = 1 if row < N else -1
                    new_sources.append((pair, sign))
                    trace.inserting_pairs.add(pair)
            sources = new_sources
            if keep_iterates:
                trace.iterates.append(S)
        ms = (time.perf_counter() - t0) * 1000.0
        trace.records.append(
            IterationRecord(k, S.vertex_count, S.facet_count, worst, ms)
        )
        if converged:
            trace.termination = "converged"
            trace.vertex_sources = sources
            return S, trace
    trace.termination = "max_iter"
    trace.vertex_sources = sources
    raise NonConvergenceError(
        f"data-driven iteration did not converge in {cfg.max_iterations} steps",
        trace,
    )


def feasibility_residual(S: Polytope, samples: SampleSet) -> float:
    """max over pairs of gauge(S, y)/gauge(S, x) - 1, clamped at zero.

    Zero means the set is consistent with every observation; a converged
    data-driven run keeps this at or below its stopping tolerance.
    """
    gx = gauge_many(S, samples.xs)
    gy = gauge_many(S, samples.ys)
    return max(0.0, float(np.max(gy / gx - 1.0)))
