"""Polyhedral invariant sets for switched linear systems from sampled data.

The package computes origin-containing polyhedral invariant sets for
discrete-time switched linear systems observed only through sampled
(state, successor) pairs, and attaches two machine-checkable probabilistic
certificates: an a-priori contraction certificate and an a-posteriori
scenario (chance-constrained) almost-invariance certificate.
"""

__version__ = "0.1.0"

from .certify import (
    ContractionCertificate,
    ScenarioCertificate,
    confidence_B,
    contraction_certificate,
    contraction_check,
    count_supporting_points,
    delta_theta,
    empirical_violation,
    gamma_lower,
    packing_bound,
    scenario_certificate,
    scenario_epsilon,
    solve_N_for_confidence,
)
from .errors import (
    DegeneracyError,
    NonConvergenceError,
    NumericalFailure,
    ValidationError,
)
from .geometry import (
    ConeSpec,
    Polytope,
    cap_measure,
    contains_scaled,
    convex_hull_add,
    facets_in_cone,
    gauge,
    gauge_many,
    inclusion_ratio,
    load_polytope,
    save_polytope,
    unit_box,
)
from .invariance import (
    IterationConfig,
    IterationTrace,
    data_driven_invariant_set,
    feasibility_residual,
    model_based_invariant_set,
)
from .numerics import RandomSource, sample_unit_sphere
from .system import (
    SamplePair,
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
