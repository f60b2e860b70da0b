"""Numerical kernel: LP solver, special functions, cone solver, seeded RNG."""

from .cones import FacetRegion, min_norm_on_facet_in_cone
from .lp import LinearProgram, LPResult, solve_lp
from .rng import RandomSource, derive_seed, sample_unit_sphere, sample_unit_sphere_many, splitmix64
from .special import log_binomial, reg_inc_beta, reg_inc_beta_inv

__all__ = [
    "FacetRegion",
    "LPResult",
    "LinearProgram",
    "RandomSource",
    "derive_seed",
    "log_binomial",
    "min_norm_on_facet_in_cone",
    "reg_inc_beta",
    "reg_inc_beta_inv",
    "sample_unit_sphere",
    "sample_unit_sphere_many",
    "solve_lp",
    "splitmix64",
]
