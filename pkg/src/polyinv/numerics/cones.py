"""Minimum norm over a polytope facet restricted to a second-order cone.

Solves  min ||x||  s.t.  x in facet,  u.x >= delta ||u|| ||x||  through the
conic lift  min t  s.t.  ||x|| <= t,  x in facet,  u.x >= delta ||u|| t,
outer-approximating the norm cone by cutting planes g.x <= t with ||g|| = 1.
Each relaxation is an LP, so an infeasible LP certifies that the facet
misses the cone.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import NumericalFailure
from .lp import LinearProgram, solve_lp

__all__ = ["FacetRegion", "min_norm_on_facet_in_cone"]

_MAX_CUTS = 500
_CUT_TOL = 1.0e-9


@dataclass(frozen=True)
class FacetRegion:
    """Affine piece {x : eq_normal.x = eq_rhs, ineq @ x <= ineq_rhs}."""

    eq_normal: np.ndarray
    eq_rhs: float
    ineq: np.ndarray
    ineq_rhs: np.ndarray


def min_norm_on_facet_in_cone(
    facet: FacetRegion, u: np.ndarray, delta: float
) -> Optional[float]:
    """min ||x||_2 over the facet inside the cone {u.x >= delta ||u|| ||x||}.

    Returns None when the intersection is empty. `delta` must lie in (0, 1);
    accuracy of the returned value is ~1e-8. Degenerate facet geometry
    (thin polygons with ill-conditioned corners) is handled by retrying
    with the bounding inequalities relaxed inside that accuracy budget.
    """
    u = np.asarray(u, dtype=float).ravel()
    n = u.size
    unorm = float(np.linalg.norm(u))
    if unorm == 0.0:
        raise ValueError("cone direction u must be nonzero")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    eq_normal = np.asarray(facet.eq_normal, dtype=float).ravel()
    if eq_normal.size != n:
        raise ValueError("facet/direction dimension mismatch")
    last_error = None
    for relax in (0.0, 1.0e-9, 3.0e-9, 1.0e-8):
        try:
            return _cut_loop(facet, u, unorm, delta, relax)
        except NumericalFailure as exc:
            last_error = exc
    raise last_error


def _cut_loop(
    facet: FacetRegion, u: np.ndarray, unorm: float, delta: float, relax: float
) -> Optional[float]:
    n = u.size
    eq_normal = np.asarray(facet.eq_normal, dtype=float).ravel()
    ineq = np.atleast_2d(np.asarray(facet.ineq, dtype=float))
    ineq_rhs = np.asarray(facet.ineq_rhs, dtype=float).ravel() + relax

    # Variables: [x (free), t >= 0]; objective: minimize t.
    nv = n + 1
    objective = np.zeros(nv)
    objective[n] = 1.0
    lower = np.full(nv, -np.inf)
    lower[n] = 0.0

    eq_row = np.zeros((1, nv))
    eq_row[0, :n] = eq_normal
    eq_rhs = np.array([facet.eq_rhs], dtype=float)

    base_rows = [np.hstack([ineq, np.zeros((ineq.shape[0], 1))])]
    base_rhs = [ineq_rhs]
    cone_row = np.zeros(nv)
    cone_row[:n] = -u
    cone_row[n] = delta * unorm
    base_rows.append(cone_row[None, :])
    base_rhs.append(np.zeros(1))

    cuts: list[np.ndarray] = []
    for _ in range(_MAX_CUTS):
        rows = list(base_rows)
        rhs = list(base_rhs)
        if cuts:
            cut_block = np.zeros((len(cuts), nv))
            for i, g in enumerate(cuts):
                cut_block[i, :n] = g
                cut_block[i, n] = -1.0
            rows.append(cut_block)
            rhs.append(np.zeros(len(cuts)))
        lp = LinearProgram(
            objective=objective,
            ineq=np.vstack(rows),
            ineq_rhs=np.concatenate(rhs),
            eq=eq_row,
            eq_rhs=eq_rhs,
            lower_bounds=lower,
        )
        res = solve_lp(lp)
        if res.status == "infeasible":
            return None
        if res.status != "optimal":
            raise NumericalFailure(
                f"cone-facet LP relaxation reported {res.status}"
            )
        x = res.x[:n]
        t = float(res.x[n])
        norm_x = float(np.linalg.norm(x))
        if norm_x - t <= _CUT_TOL * max(1.0, norm_x):
            return norm_x
        cuts.append(x / norm_x)
    raise NumericalFailure("cutting-plane iteration cap exceeded in cone solve")
