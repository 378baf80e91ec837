"""Bounded-variable primal simplex for equality-constrained box LPs.

Solves   min/max  obj @ x   s.t.  A @ x = rhs,  lo <= x <= hi

with a two-phase primal simplex that handles variable bounds natively (no
slack expansion of the boxes).  Dantzig pricing with a switch to Bland's
rule after repeated degenerate pivots guarantees termination.  The basis
inverse is maintained by product-form updates and refactorized periodically.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LpResult", "solve_bounded_lp", "FEAS_TOL", "OPT_TOL"]

FEAS_TOL = 1e-7   # constraint residual tolerance
OPT_TOL = 1e-9    # reduced-cost optimality tolerance
_PIV_TOL = 1e-10  # smallest usable pivot element
_REFACTOR_EVERY = 100

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration_limit"
UNBOUNDED = "unbounded"


@dataclass
class LpResult:
    status: str
    value: float
    x: np.ndarray
    pivots: int


class _Tableau:
    """Mutable simplex state over the full (structural + artificial) columns."""

    def __init__(self, A, rhs, lo, hi, basis, at_upper):
        self.A = A
        self.rhs = rhs
        self.lo = lo
        self.hi = hi
        self.basis = basis                 # length m variable indices
        self.at_upper = at_upper           # bool per variable (nonbasic state)
        self.in_basis = np.zeros(A.shape[1], dtype=bool)
        self.in_basis[basis] = True
        self.Binv = np.linalg.inv(A[:, basis]) if len(basis) else np.zeros((0, 0))
        self.x = np.where(at_upper, np.minimum(hi, np.inf), lo).astype(float)
        self.x[~np.isfinite(self.x)] = 0.0
        self.pivots = 0
        self._since_refactor = 0
        self._recompute_basics()

    def _recompute_basics(self):
        xnb = self.x.copy()
        xnb[self.basis] = 0.0
        r = self.rhs - self.A @ xnb
        self.x[self.basis] = self.Binv @ r

    def refactor(self):
        self.Binv = np.linalg.inv(self.A[:, self.basis])
        self._since_refactor = 0
        self._recompute_basics()

    def minimize(self, c, max_pivots):
        """Run primal simplex for min c @ x from the current basis."""
        m = len(self.basis)
        nvar = self.A.shape[1]
        degenerate = 0
        bland = False
        movable = (self.hi - self.lo) > _PIV_TOL
        while True:
            if self.pivots >= max_pivots:
                return ITERATION_LIMIT
            y = self.Binv.T @ c[self.basis] if m else np.zeros(0)
            d = c - self.A.T @ y
            # eligibility: improve by moving off the current bound
            low_ok = (~self.in_basis) & (~self.at_upper) & movable & (d < -OPT_TOL)
            up_ok = (~self.in_basis) & self.at_upper & movable & (d > OPT_TOL)
            elig = np.flatnonzero(low_ok | up_ok)
            if elig.size == 0:
                return OPTIMAL
            if bland:
                j = int(elig[0])
            else:
                j = int(elig[np.argmax(np.abs(d[elig]))])
            direction = -1.0 if self.at_upper[j] else 1.0
            w = self.Binv @ self.A[:, j] if m else np.zeros(0)
            delta = -direction * w  # change of basic values per unit step
            # ratio test against each basic variable's nearest bound
            limits = np.full(m, np.inf)
            with np.errstate(divide="ignore", invalid="ignore"):
                up_room = self.hi[self.basis] - self.x[self.basis]
                low_room = self.lo[self.basis] - self.x[self.basis]
                pos = delta > _PIV_TOL
                neg = delta < -_PIV_TOL
                limits[pos] = np.maximum(up_room[pos], 0.0) / delta[pos]
                limits[neg] = np.maximum(-low_room[neg], 0.0) / (-delta[neg])
            t_own = self.hi[j] - self.lo[j]
            t_basic = np.min(limits) if m else np.inf
            t = min(t_own, t_basic)
            if not np.isfinite(t):
                return UNBOUNDED
            self.pivots += 1
            if t <= _PIV_TOL:
                degenerate += 1
                if degenerate > 3 * nvar:
                    bland = True
            if t_own <= t_basic:
                # bound flip: entering variable crosses to its other bound
                self.x[j] = self.hi[j] if direction > 0 else self.lo[j]
                self.x[self.basis] += delta * t_own
                self.at_upper[j] = not self.at_upper[j]
                continue
            cands = np.flatnonzero(limits <= t + 1e-12)
            # deterministic leaving choice: smallest variable index
            r = int(cands[np.argmin(self.basis[cands])])
            leave = int(self.basis[r])
            self.x[j] += direction * t
            self.x[self.basis] += delta * t
            # snap the leaving variable onto the bound it hit
            self.at_upper[leave] = delta[r] > 0
            self.x[leave] = self.hi[leave] if delta[r] > 0 else self.lo[leave]
            self.basis[r] = j
            self.in_basis[leave] = False
            self.in_basis[j] = True
            # product-form update of the basis inverse
            piv = w[r]
            if abs(piv) < _PIV_TOL:
                self.refactor()
                continue
            self.Binv[r, :] /= piv
            other = np.arange(m) != r
            self.Binv[other, :] -= np.outer(w[other], self.Binv[r, :])
            self._since_refactor += 1
            if self._since_refactor >= _REFACTOR_EVERY:
                self.refactor()


def _trivial_lp(obj, lo, hi, maximize):
    eff = -obj if maximize else obj
    x = np.where(eff < 0, hi, lo).astype(float)
    if np.any(~np.isfinite(x) & (eff != 0)):
        return LpResult(UNBOUNDED, float("inf"), x, 0)
    x[~np.isfinite(x)] = 0.0
    return LpResult(OPTIMAL, float(obj @ x), x, 0)


def solve_bounded_lp(obj, A, rhs, lo, hi, maximize: bool = False,
                     max_pivots: int | None = None) -> LpResult:
    """Solve the box-bounded equality LP; deterministic for fixed input."""
    obj = np.asarray(obj, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        A = A.reshape(0, obj.shape[0])
    rhs = np.asarray(rhs, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = obj.shape[0]
    m = A.shape[0]
    if np.any(lo > hi + 1e-15):
        return LpResult(INFEASIBLE, float("nan"), np.zeros(n), 0)
    if m == 0:
        return _trivial_lp(obj, lo, hi, maximize)
    if max_pivots is None:
        max_pivots = 50 * (n + 2 * m)

    # phase 1: artificials absorb the residual of starting at lower bounds
    x0 = np.where(np.isfinite(lo), lo, 0.0)
    resid = rhs - A @ x0
    sgn = np.where(resid >= 0, 1.0, -1.0)
    A_full = np.hstack([A, np.diag(sgn)])
    lo_full = np.concatenate([lo, np.zeros(m)])
    hi_full = np.concatenate([hi, np.full(m, np.inf)])
    basis = np.arange(n, n + m)
    at_upper = np.zeros(n + m, dtype=bool)
    tab = _Tableau(A_full, rhs, lo_full, hi_full, basis, at_upper)

    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    status = tab.minimize(c1, max_pivots)
    if status == ITERATION_LIMIT:
        return LpResult(ITERATION_LIMIT, float("nan"), tab.x[:n], tab.pivots)
    tab.refactor()
    if float(c1 @ tab.x) > FEAS_TOL:
        return LpResult(INFEASIBLE, float("nan"), tab.x[:n], tab.pivots)

    # phase 2: pin artificials at zero and optimize the real objective
    tab.hi[n:] = 0.0
    tab.x[n:][~tab.in_basis[n:]] = 0.0
    c2 = np.concatenate([-obj if maximize else obj, np.zeros(m)])
    status = tab.minimize(c2, max_pivots)
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED, float("nan"), tab.x[:n], tab.pivots)
    if status == ITERATION_LIMIT:
        return LpResult(ITERATION_LIMIT, float("nan"), tab.x[:n], tab.pivots)
    tab.refactor()
    x = tab.x[:n].copy()
    np.clip(x, lo, hi, out=x)
    return LpResult(OPTIMAL, float(obj @ x), x, tab.pivots)
