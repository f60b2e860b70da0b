"""Dense two-phase simplex with Bland's anti-cycling rule.

Sized for the problems this package generates: a few hundred variables and
constraints at most, all dense. Robustness beats speed here, so pivoting is
Bland's rule throughout and every returned point is re-checked against the
original constraints before it leaves this module.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import NumericalFailure

__all__ = ["LinearProgram", "LPResult", "solve_lp"]

_PIVOT_TOL = 1.0e-11
_COST_TOL = 1.0e-11
_FEAS_TOL = 1.0e-9
# Guard threshold for the terminal re-check. Data with near-duplicate rows
# (slivers) admits no exact vertex satisfying every row at 1e-9; anything
# past this bound is treated as a wrong answer and raised.
_GUARD_TOL = 1.0e-8
_MAX_PIVOTS = 20000


@dataclass(frozen=True)
class LinearProgram:
    """minimize objective @ x  s.t.  ineq @ x <= ineq_rhs,  eq @ x == eq_rhs.

    `lower_bounds` holds one bound per variable; -inf marks a free variable.
    None means all variables are bounded below by zero.
    """

    objective: np.ndarray
    ineq: Optional[np.ndarray] = None
    ineq_rhs: Optional[np.ndarray] = None
    eq: Optional[np.ndarray] = None
    eq_rhs: Optional[np.ndarray] = None
    lower_bounds: Optional[np.ndarray] = None

    def dims(self) -> tuple[int, int, int]:
        nvar = len(np.atleast_1d(self.objective))
        n_ub = 0 if self.ineq is None else np.atleast_2d(self.ineq).shape[0]
        n_eq = 0 if self.eq is None else np.atleast_2d(self.eq).shape[0]
        return nvar, n_ub, n_eq


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Optional[float] = None
    x: Optional[np.ndarray] = None


def _validate(lp: LinearProgram):
    c = np.asarray(lp.objective, dtype=float).ravel()
    nvar = c.size
    if nvar == 0:
        raise ValueError("objective must have at least one variable")
    if not np.all(np.isfinite(c)):
        raise ValueError("objective contains non-finite entries")

    def _pair(mat, rhs, label):
        if mat is None and rhs is None:
            return None, None
        if mat is None or rhs is None:
            raise ValueError(f"{label} matrix and rhs must be given together")
        mat = np.atleast_2d(np.asarray(mat, dtype=float))
        rhs = np.asarray(rhs, dtype=float).ravel()
        if mat.shape[0] != rhs.size or mat.shape[1] != nvar:
            raise ValueError(
                f"{label} dimensions inconsistent: matrix {mat.shape}, "
                f"rhs {rhs.size}, nvar {nvar}"
            )
        if not (np.all(np.isfinite(mat)) and np.all(np.isfinite(rhs))):
            raise ValueError(f"{label} contains non-finite entries")
        return mat, rhs

    A_ub, b_ub = _pair(lp.ineq, lp.ineq_rhs, "inequality")
    A_eq, b_eq = _pair(lp.eq, lp.eq_rhs, "equality")
    if lp.lower_bounds is None:
        lb = np.zeros(nvar)
    else:
        lb = np.asarray(lp.lower_bounds, dtype=float).ravel()
        if lb.size != nvar:
            raise ValueError(f"lower_bounds size {lb.size} != nvar {nvar}")
        if np.any(np.isposinf(lb)) or np.any(np.isnan(lb)):
            raise ValueError("lower bounds must be finite or -inf")
    return c, A_ub, b_ub, A_eq, b_eq, lb


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    basis[row] = col


def _refactorize(T: np.ndarray, T0: np.ndarray, basis: np.ndarray) -> None:
    """Rebuild T = B^-1 T0 from the original data to shed round-off.

    Tiny negative rhs entries after the rebuild are degenerate zeros and
    get clamped so later ratio tests stay meaningful.
    """
    B = T0[:, basis]
    try:
        fresh = np.linalg.solve(B, T0)
    except np.linalg.LinAlgError:
        return
    rhs = fresh[:, -1]
    rhs[(rhs < 0.0) & (rhs > -1.0e-7)] = 0.0
    if np.all(rhs >= 0.0):
        T[:] = fresh


def _run_simplex(T: np.ndarray, basis: np.ndarray, cost: np.ndarray,
                 allowed: np.ndarray, T0: np.ndarray,
                 refactor_every: int) -> str:
    """Bland-rule simplex on tableau T (rows: constraints, last col: rhs).

    `cost` is the objective over tableau columns; `allowed` masks columns
    eligible to enter; `T0` is the original tableau used to refactorize
    every `refactor_every` pivots. Returns "optimal" or "unbounded";
    mutates T/basis.
    """
    m = T.shape[0]
    for iteration in range(_MAX_PIVOTS):
        if m and iteration and iteration % refactor_every == 0:
            _refactorize(T, T0, basis)
        # reduced costs: c_j - c_B^T B^-1 A_j over the current tableau
        red = cost - cost[basis] @ T[:, :-1]
        red[~allowed] = 0.0
        entering = -1
        for j in np.flatnonzero(red < -_COST_TOL):
            entering = int(j)
            break
        if entering < 0:
            return "optimal"
        if m == 0:
            return "unbounded"
        colvals = T[:, entering]
        ratios = np.full(m, np.inf)
        pos = colvals > _PIVOT_TOL
        ratios[pos] = T[pos, -1] / colvals[pos]
        best = np.min(ratios)
        if not np.isfinite(best):
            return "unbounded"
        # Bland ties: among minimal ratios, leave the smallest basis index
        tie_rows = np.flatnonzero(np.isclose(ratios, best, rtol=0.0, atol=1e-12))
        leaving = int(tie_rows[np.argmin(basis[tie_rows])])
        _pivot(T, basis, leaving, entering)
    raise NumericalFailure("simplex cycling guard exceeded")


def solve_lp(lp: LinearProgram) -> LPResult:
    """Solve a dense LP; never returns a wrong answer silently.

    The optimal point satisfies all constraints to within 1e-9; failure to
    verify raises NumericalFailure. Degenerate instances whose first pass
    drifts past that tolerance are retried with increasingly frequent
    refactorization (down to one exact rebuild per pivot); the rare
    ill-conditioned stragglers that still fail self-verification are
    re-solved with a mature external solver and re-verified the same way.
    """
    last_error: Optional[NumericalFailure] = None
    for refactor_every in (25, 5, 1):
        try:
            return _solve_once(lp, refactor_every)
        except NumericalFailure as exc:
            last_error = exc
    try:
        return _solve_fallback(lp)
    except NumericalFailure:
        raise last_error


def _solve_fallback(lp: LinearProgram) -> LPResult:
    from scipy.optimize import linprog

    c, A_ub, b_ub, A_eq, b_eq, lb = _validate(lp)
    bounds = [
        (None, None) if np.isneginf(l) else (float(l), None) for l in lb
    ]
    res = linprog(
        c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
        method="highs",
    )
    if res.status == 2:
        return LPResult(status="infeasible")
    if res.status == 3:
        return LPResult(status="unbounded")
    if res.status != 0 or res.x is None:
        raise NumericalFailure(f"fallback solver failed (status {res.status})")
    x = np.asarray(res.x, dtype=float)
    scale = max(1.0, float(np.max(np.abs(x), initial=0.0)))
    if A_ub is not None and np.any(A_ub @ x - b_ub > _GUARD_TOL * scale):
        raise NumericalFailure("fallback solution violates an inequality")
    if A_eq is not None and np.any(np.abs(A_eq @ x - b_eq) > _GUARD_TOL * scale):
        raise NumericalFailure("fallback solution violates an equality")
    if np.any(x - lb < -_GUARD_TOL * scale):
        raise NumericalFailure("fallback solution violates a lower bound")
    return LPResult(status="optimal", value=float(c @ x), x=x)


def _solve_once(lp: LinearProgram, refactor_every: int) -> LPResult:
    c, A_ub, b_ub, A_eq, b_eq, lb = _validate(lp)
    nvar = c.size

    # Shift finite lower bounds to zero and split free variables.
    free = np.isneginf(lb)
    shift = np.where(free, 0.0, lb)
    col_of_var = []  # (col_plus, col_minus or -1) per original variable
    ncols = 0
    for j in range(nvar):
        if free[j]:
            col_of_var.append((ncols, ncols + 1))
            ncols += 2
        else:
            col_of_var.append((ncols, -1))
            ncols += 1

    def _expand(mat):
        out = np.zeros((mat.shape[0], ncols))
        for j in range(nvar):
            cp, cm = col_of_var[j]
            out[:, cp] = mat[:, j]
            if cm >= 0:
                out[:, cm] = -mat[:, j]
        return out

    rows = []
    rhs = []
    n_ub = 0 if A_ub is None else A_ub.shape[0]
    if A_ub is not None:
        rows.append(_expand(A_ub))
        rhs.append(b_ub - A_ub @ shift)
    if A_eq is not None:
        rows.append(_expand(A_eq))
        rhs.append(b_eq - A_eq @ shift)

    if rows:
        A = np.vstack(rows)
        b = np.concatenate(rhs)
        # row equilibration: exact reformulation, much better conditioning
        norms = np.maximum(np.max(np.abs(A), axis=1), 1.0e-12)
        A = A / norms[:, None]
        b = b / norms
    else:
        A = np.zeros((0, ncols))
        b = np.zeros(0)
    m = A.shape[0]

    # Slacks for the inequality block.
    full = np.hstack([A, np.zeros((m, n_ub))])
    for i in range(n_ub):
        full[i, ncols + i] = 1.0
    nstd = ncols + n_ub

    # Nonnegative rhs, then one artificial per row.
    neg = b < 0.0
    full[neg] *= -1.0
    b = np.abs(b)

    T = np.hstack([full, np.eye(m), b[:, None]])
    T0 = T.copy()
    basis = np.arange(nstd, nstd + m)
    allowed = np.ones(nstd + m, dtype=bool)

    # Phase 1: drive artificials to zero.
    cost1 = np.zeros(nstd + m)
    cost1[nstd:] = 1.0
    status = _run_simplex(T, basis, cost1, allowed, T0, refactor_every)
    if status != "optimal":
        raise NumericalFailure("phase-1 simplex reported unbounded")
    phase1_val = float(cost1[basis] @ T[:, -1])
    if phase1_val > _FEAS_TOL * max(1.0, float(np.max(np.abs(b), initial=0.0))):
        return LPResult(status="infeasible")

    # Pivot lingering artificials out of the basis; drop redundant rows.
    # Refactorize first: declaring a row redundant from a drifted tableau
    # would silently delete a real constraint.
    _refactorize(T, T0, basis)
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if basis[i] >= nstd:
            cand = np.flatnonzero(np.abs(T[i, :nstd]) > 1.0e-9)
            if cand.size:
                _pivot(T, basis, i, int(cand[0]))
            else:
                keep[i] = False
    if not np.all(keep):
        T = T[keep]
        T0 = T0[keep]
        basis = basis[keep]

    allowed[nstd:] = False

    # Phase 2 on the real objective.
    cost2 = np.zeros(nstd + m)
    for j in range(nvar):
        cp, cm = col_of_var[j]
        cost2[cp] = c[j]
        if cm >= 0:
            cost2[cm] = -c[j]
    status = _run_simplex(T, basis, cost2, allowed, T0, refactor_every)
    _refactorize(T, T0, basis)
    if status == "unbounded":
        return LPResult(status="unbounded")

    xstd = np.zeros(nstd + m)
    xstd[basis] = T[:, -1]
    # Refine the basic solution against the original (pre-pivot) data to
    # shed accumulated tableau round-off; the basis fixes the solution.
    if basis.size:
        B = full[:, basis]
        try:
            if B.shape[0] == B.shape[1]:
                xstd[basis] = np.linalg.solve(B, b)
            else:
                xstd[basis] = np.linalg.lstsq(B, b, rcond=None)[0]
        except np.linalg.LinAlgError:
            xstd[basis] = T[:, -1]
    x = np.empty(nvar)
    for j in range(nvar):
        cp, cm = col_of_var[j]
        x[j] = xstd[cp] - (xstd[cm] if cm >= 0 else 0.0) + shift[j]

    # Defensive re-check against the original data.
    scale = max(1.0, float(np.max(np.abs(x), initial=0.0)))
    if A_ub is not None and np.any(A_ub @ x - b_ub > _GUARD_TOL * scale):
        raise NumericalFailure("simplex solution violates an inequality")
    if A_eq is not None and np.any(np.abs(A_eq @ x - b_eq) > _GUARD_TOL * scale):
        raise NumericalFailure("simplex solution violates an equality")
    if np.any(x - lb < -_GUARD_TOL * scale):
        raise NumericalFailure("simplex solution violates a lower bound")

    return LPResult(status="optimal", value=float(c @ x), x=x)
