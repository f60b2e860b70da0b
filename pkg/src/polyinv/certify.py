"""Probabilistic certificates for computed sets, plus ground-truth validation.

Two independent pipelines:

* A-priori contraction. For a violation level eps, the sphere splits into
  caps of angle theta(eps); with enough samples every cap is exercised by
  every mode, except with probability at most B(eps; N). On that event the
  violating region fits inside one cap of angle 2 theta(eps), and a
  vertex-wise cone program lower-bounds how much the set can shrink before
  losing such a cap, giving a contraction rate lambda = 1/gamma_lower.

* A-posteriori scenario. Count the supporting observations (those whose
  removal changes the computed set); the count s maps through a
  chance-constrained bound eps(s) to an almost-invariance level M eps(s)
  that holds with probability at least 1 - beta over the sampling.

Validation helpers (`empirical_violation`, `contraction_check`) are the only
operations here that touch the true matrices.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericalFailure
from .geometry import Polytope, cap_measure, facet_region, gauge_many
from .invariance import IterationConfig, data_driven_invariant_set
from .numerics.cones import min_norm_on_facet_in_cone
from .numerics.rng import RandomSource, sample_unit_sphere_many
from .numerics.special import log_binomial, reg_inc_beta, reg_inc_beta_inv
from .system import SampleSet, SwitchedLinearSystem

__all__ = [
    "ContractionCertificate",
    "ScenarioCertificate",
    "VertexContraction",
    "ViolationEstimate",
    "confidence_B",
    "contraction_certificate",
    "contraction_check",
    "count_supporting_points",
    "delta_theta",
    "empirical_violation",
    "gamma_lower",
    "packing_bound",
    "scenario_certificate",
    "scenario_epsilon",
    "solve_N_for_confidence",
    "vertex_sets_match",
]

_MAX_LOG = 700.0


def delta_theta(epsilon: float, n: int) -> tuple[float, float]:
    """Cap geometry for violation level epsilon in (0, 1/2).

    delta = sqrt(1 - Iinv(2 eps; (n-1)/2, 1/2)) is the cap's base height,
    theta = arccos(delta) its angle; cap_measure(theta, n) = epsilon.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if n < 2:
        raise ValueError(f"dimension must be >= 2, got {n}")
    x = reg_inc_beta_inv(2.0 * epsilon, (n - 1) / 2.0, 0.5)
    delta = math.sqrt(max(0.0, 1.0 - x))
    theta = math.acos(min(1.0, max(-1.0, delta)))
    return delta, theta


def packing_bound(epsilon: float, n: int) -> float:
    """Upper bound on the number of disjoint eps-caps that fit on the sphere."""
    _, theta = delta_theta(epsilon, n)
    s = math.sin(theta / 2.0)
    denom = reg_inc_beta(s * s, (n - 1) / 2.0, 0.5)
    if denom <= 0.0:
        return math.inf
    return 2.0 / denom


def confidence_B(epsilon: float, N: int, M: int, n: int) -> float:
    """Failure-probability bound 2M (1 - eps/M)^N / I(sin^2(theta/2); ...).

    Evaluated in the log domain; values above one are vacuous but still
    returned (and +inf is possible as epsilon -> 0).
    """
    if N < 1:
        raise ValueError(f"sample count must be >= 1, got {N}")
    if M < 1:
        raise ValueError(f"mode count must be >= 1, got {M}")
    _, theta = delta_theta(epsilon, n)
    s = math.sin(theta / 2.0)
    denom = reg_inc_beta(s * s, (n - 1) / 2.0, 0.5)
    if denom <= 0.0:
        return math.inf
    log_val = math.log(2.0 * M) + N * math.log1p(-epsilon / M) - math.log(denom)
    if log_val > _MAX_LOG:
        return math.inf
    return math.exp(log_val)


def solve_N_for_confidence(epsilon: float, beta: float, M: int, n: int) -> int:
    """Smallest N with confidence_B(epsilon, N, M, n) <= beta."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    _, theta = delta_theta(epsilon, n)
    s = math.sin(theta / 2.0)
    denom = reg_inc_beta(s * s, (n - 1) / 2.0, 0.5)
    if denom <= 0.0:
        raise NumericalFailure("cap measure underflow; epsilon too small")
    # N log(1 - eps/M) <= log beta + log denom - log 2M
    target = math.log(beta) + math.log(denom) - math.log(2.0 * M)
    rate = math.log1p(-epsilon / M)
    N = max(1, math.ceil(target / rate))
    while N > 1 and confidence_B(epsilon, N - 1, M, n) <= beta:
        N -= 1
    while confidence_B(epsilon, N, M, n) > beta:
        N += 1
    return N


@dataclass(frozen=True)
class VertexContraction:
    vertex: np.ndarray
    d_min: float
    gamma: float


def _d_min_for_vertex(S: Polytope, u: np.ndarray, delta: float) -> float:
    """min ||x|| over boundary points of S inside the cone around vertex u.

    Equals the minimum over facets of the per-facet cone program. Facets
    are visited by increasing plane distance 1/||h||, which lower-bounds any
    value obtainable on that facet, so the search stops early.
    """
    plane_dist = 1.0 / np.linalg.norm(S.facets, axis=1)
    order = np.argsort(plane_dist)
    best = math.inf
    for j in order:
        if plane_dist[j] >= best:
            break
        val = min_norm_on_facet_in_cone(facet_region(S, int(j)), u, delta)
        if val is not None and val < best:
            best = val
    if not math.isfinite(best):
        raise NumericalFailure(
            "no facet meets the vertex cone; the polytope data is inconsistent"
        )
    return best


def gamma_lower(
    S: Polytope, epsilon: float
) -> tuple[float, list[VertexContraction]]:
    """Certified shrink factor: min over vertices of delta * d_min(u) / ||u||.

    d_min(u) is the closest boundary point inside the cone of angle
    theta(epsilon) around u. The per-vertex programs are independent.
    """
    delta, _ = delta_theta(epsilon, S.n)
    detail = []
    worst = math.inf
    for u in S.vertices:
        d = _d_min_for_vertex(S, u, delta)
        g = delta * d / float(np.linalg.norm(u))
        detail.append(VertexContraction(vertex=u.copy(), d_min=d, gamma=g))
        worst = min(worst, g)
    return worst, detail


@dataclass(frozen=True)
class ContractionCertificate:
    """A-priori contraction certificate.

    status is "certified" when the doubled cap angle stays within a
    quarter turn and the effective violation level is below 1/2;
    otherwise "inconclusive" and no rate is claimed. confidence_bound
    above one means the sample size was too small to say anything.
    """

    status: str
    epsilon: float
    delta: float
    theta: float
    confidence_bound: float
    sample_count: int
    mode_count: int
    effective_violation: Optional[float] = None
    gamma_lower: Optional[float] = None
    contraction_rate: Optional[float] = None
    per_vertex: Optional[list[VertexContraction]] = None
    reason: Optional[str] = None


def contraction_certificate(
    S: Polytope, epsilon: float, N: int, M: int, n: Optional[int] = None
) -> ContractionCertificate:
    """Certify S as lambda-contractive with failure probability <= B(eps; N).

    The effective violation level is the measure of a cap of angle
    2 theta(eps); the rate is 1/gamma_lower(S, that level).
    """
    if n is None:
        n = S.n
    if n != S.n:
        raise ValueError(f"stated dimension {n} != polytope dimension {S.n}")
    delta, theta = delta_theta(epsilon, n)
    bound = confidence_B(epsilon, N, M, n)
    base = dict(
        epsilon=epsilon,
        delta=delta,
        theta=theta,
        confidence_bound=bound,
        sample_count=N,
        mode_count=M,
    )
    if 2.0 * theta > math.pi / 2.0:
        return ContractionCertificate(
            status="inconclusive",
            reason="doubled cap angle exceeds a quarter turn",
            **base,
        )
    eps_eff = cap_measure(2.0 * theta, n)
    if eps_eff >= 0.5:
        return ContractionCertificate(
            status="inconclusive",
            reason="effective violation level reaches 1/2",
            effective_violation=eps_eff,
            **base,
        )
    g, detail = gamma_lower(S, eps_eff)
    return ContractionCertificate(
        status="certified",
        effective_violation=eps_eff,
        gamma_lower=g,
        contraction_rate=1.0 / g,
        per_vertex=detail,
        **base,
    )


def vertex_sets_match(A: Polytope, B: Polytope, tol: float = 1.0e-9) -> bool:
    """Greedy nearest matching of vertex sets within `tol`."""
    if A.n != B.n or A.vertex_count != B.vertex_count:
        return False
    remaining = list(range(B.vertex_count))
    for v in A.vertices:
        dists = [float(np.max(np.abs(v - B.vertices[j]))) for j in remaining]
        best = int(np.argmin(dists))
        if dists[best] > tol:
            return False
        remaining.pop(best)
    return True


def count_supporting_points(
    samples: SampleSet,
    X: Polytope,
    cfg: IterationConfig = IterationConfig(),
) -> tuple[int, list[int]]:
    """Count pairs whose removal changes the computed set (exact, filtered).

    Only pairs that were a hull vertex of some iterate are rerun: a pair
    whose scaled points never entered any hull cannot alter any iterate, so
    removing it provably leaves the result unchanged. Each candidate is
    decided by a leave-one-out rerun and vertex-set comparison at 1e-9.
    """
    base, trace = data_driven_invariant_set(samples, X, cfg)
    support = []
    for i in sorted(trace.inserting_pairs):
        if len(samples) == 1:
            candidate = X  # no observations left: the iteration stays at X
        else:
            reduced = samples.without(i)
            candidate, _ = data_driven_invariant_set(reduced, X, cfg)
        if not vertex_sets_match(candidate, base, 1.0e-9):
            support.append(i)
    return len(support), support


def scenario_epsilon(k: int, N: int, beta: float) -> float:
    """Chance-constrained violation level for k supporting points out of N.

    eps(N) = 1; otherwise 1 - (beta / (N C(N,k)))^(1/(N-k)), evaluated in
    the log domain (stable to N ~ 1e5).
    """
    if not 0 <= k <= N:
        raise ValueError(f"need 0 <= k <= N, got k={k}, N={N}")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    if k == N:
        return 1.0
    log_term = (math.log(beta) - math.log(N) - log_binomial(N, k)) / (N - k)
    return 1.0 - math.exp(log_term)


@dataclass(frozen=True)
class ScenarioCertificate:
    """A-posteriori almost-invariance certificate at confidence 1 - beta.

    `almost_invariance_level` is M * eps(s) clamped at one; `vacuous` marks
    levels at or above 1/2, unusable for downstream contraction analysis.
    """

    beta: float
    sample_count: int
    mode_count: int
    support_count: int
    support_indices: list[int]
    epsilon_of_s: float
    almost_invariance_level: float
    vacuous: bool


def scenario_certificate(
    samples: SampleSet,
    X: Polytope,
    cfg: IterationConfig = IterationConfig(),
    beta: float = 0.001,
) -> ScenarioCertificate:
    """Run the supporting-point count and package the scenario guarantee."""
    if not 0.0 < beta < 1.0:
        raise ValueError(f"beta must lie in (0, 1), got {beta}")
    s, idx = count_supporting_points(samples, X, cfg)
    eps_s = scenario_epsilon(s, len(samples), beta)
    level = samples.M * eps_s
    return ScenarioCertificate(
        beta=beta,
        sample_count=len(samples),
        mode_count=samples.M,
        support_count=s,
        support_indices=idx,
        epsilon_of_s=eps_s,
        almost_invariance_level=min(1.0, level),
        vacuous=level >= 0.5,
    )


@dataclass(frozen=True)
class ViolationEstimate:
    estimate: float
    half_width: float  # 95% binomial confidence half-width
    probes: int


def empirical_violation(
    S: Polytope,
    sys: SwitchedLinearSystem,
    probes: int = 100000,
    rng: Optional[RandomSource] = None,
) -> ViolationEstimate:
    """Monte-Carlo measure of sphere directions where some mode leaves S.

    Ground-truth validation only: checks gauge(S, A x) > gauge(S, x) over
    all modes on `probes` uniform sphere points.
    """
    if rng is None:
        rng = RandomSource(0)
    pts = sample_unit_sphere_many(S.n, probes, rng)
    gx = gauge_many(S, pts)
    bad = np.zeros(probes, dtype=bool)
    for A in sys.matrices:
        bad |= gauge_many(S, pts @ A.T) > gx
    est = float(np.mean(bad))
    half = 1.96 * math.sqrt(max(est * (1.0 - est), 1.0 / probes) / probes)
    return ViolationEstimate(estimate=est, half_width=half, probes=probes)


def contraction_check(
    S: Polytope,
    sys: SwitchedLinearSystem,
    rate: float,
    probes: int = 100000,
    rng: Optional[RandomSource] = None,
) -> float:
    """Fraction of boundary probes whose image leaves rate * S (+1e-9 slack)."""
    if rng is None:
        rng = RandomSource(0)
    pts = sample_unit_sphere_many(S.n, probes, rng)
    boundary = pts / gauge_many(S, pts)[:, None]
    bad = np.zeros(probes, dtype=bool)
    for A in sys.matrices:
        bad |= gauge_many(S, boundary @ A.T) > rate + 1.0e-9
    return float(np.mean(bad))
