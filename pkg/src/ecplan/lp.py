"""Dense two-phase primal simplex for small bounded-variable LPs.

Solves::

    min  c @ x
    s.t. A_ub @ x <= b_ub
         A_eq @ x == b_eq
         0 <= x <= upper        (upper may be inf)

Upper bounds are handled implicitly (a nonbasic variable sits at its lower
or its upper bound) rather than as extra rows. Pricing is Dantzig's rule
until a run of degenerate pivots is seen, after which Bland's
smallest-index rule takes over for good, so the method cannot cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


class LPError(ArithmeticError):
    pass


class InfeasibleLP(LPError):
    pass


class UnboundedLP(LPError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    fun: float
    iterations: int


PIVOT_TOL = 1e-9
COST_TOL = 1e-10
DEGENERATE_RUN = 50


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, upper: np.ndarray):
        m, n = A.shape
        self.m, self.n = m, n
        # artificial columns start as the identity, so they carry B^-1 throughout
        self.A = np.hstack([A, np.eye(m)])
        self.b = b
        self.M = self.A.copy()
        self.upper = np.concatenate([upper, np.full(m, np.inf)])
        self.basis = np.arange(n, n + m)
        self.xB = b.copy()
        self.at_upper = np.zeros(n + m, dtype=bool)
        self.is_basic = np.zeros(n + m, dtype=bool)
        self.is_basic[self.basis] = True
        self.frozen = np.zeros(n + m, dtype=bool)
        self.iterations = 0
        self.bland = False

    def _entering(self, d: np.ndarray) -> Optional[int]:
        movable = ~self.is_basic & ~self.frozen & (self.upper > 0)
        gain = np.where(self.at_upper, d, -d)
        gain[~movable] = 0.0
        cand = np.flatnonzero(gain > COST_TOL)
        if cand.size == 0:
            return None
        if self.bland:
            return int(cand[0])
        return int(cand[np.argmax(gain[cand])])

    def run(self, cost: np.ndarray, max_iter: int) -> None:
        degenerate = 0
        while True:
            if self.iterations >= max_iter:
                raise LPError(f"simplex did not converge in {max_iter} iterations")
            d = cost - cost[self.basis] @ self.M
            j = self._entering(d)
            if j is None:
                return
            self.iterations += 1
            direction = -1.0 if self.at_upper[j] else 1.0
            alpha = direction * self.M[:, j]

            theta = self.upper[j]
            leave = -1
            ub_B = self.upper[self.basis]
            for r in range(self.m):
                a = alpha[r]
                if a > PIVOT_TOL:
                    lim = max(self.xB[r], 0.0) / a
                elif a < -PIVOT_TOL and np.isfinite(ub_B[r]):
                    lim = max(ub_B[r] - self.xB[r], 0.0) / -a
                else:
                    continue
                if lim < theta or (lim == theta and leave >= 0 and self.basis[r] < self.basis[leave]):
                    theta, leave = lim, r
            if not np.isfinite(theta):
                raise UnboundedLP("objective is unbounded below")

            degenerate = degenerate + 1 if theta <= PIVOT_TOL else 0
            if degenerate >= DEGENERATE_RUN:
                self.bland = True

            self.xB -= theta * alpha
            if leave < 0:
                self.at_upper[j] = not self.at_upper[j]
                continue

            out = self.basis[leave]
            self.at_upper[out] = alpha[leave] < 0
            self.is_basic[out] = False
            entering_value = theta if direction > 0 else self.upper[j] - theta
            pivot = self.M[leave, j]
            self.M[leave] /= pivot
            col = self.M[:, j].copy()
            col[leave] = 0.0
            self.M -= np.outer(col, self.M[leave])
            self.basis[leave] = j
            self.is_basic[j] = True
            self.at_upper[j] = False
            self.xB[leave] = entering_value

    def freeze_optimal_face(self, cost: np.ndarray) -> None:
        # with a fixed optimal dual, x is optimal iff every nonbasic variable
        # with a nonzero reduced cost stays at its bound
        d = cost - cost[self.basis] @ self.M
        self.frozen |= ~self.is_basic & (np.abs(d) > COST_TOL)

    def solution(self) -> np.ndarray:
        x = np.where(self.at_upper, self.upper, 0.0)
        x[self.basis] = 0.0
        binv = self.M[:, self.n:]
        x[self.basis] = binv @ (self.b - self.A @ x)
        return x


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, upper=None,
            tiebreak=None, max_iter: int = 50_000) -> LPResult:
    """Minimize ``c @ x``; among the minimizers, minimize ``tiebreak @ x`` if given."""
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if np.any(upper < 0):
        raise InfeasibleLP("an upper bound is below zero")

    k = A_ub.shape[0]
    A = np.block([[A_ub, np.eye(k)], [A_eq, np.zeros((A_eq.shape[0], k))]])
    b = np.concatenate([b_ub, b_eq])
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    ub = np.concatenate([upper, np.full(k, np.inf)])
    width = n + k

    tab = _Tableau(A, b, ub)
    phase1 = np.concatenate([np.zeros(width), np.ones(tab.m)])
    tab.run(phase1, max_iter)
    infeas = float(tab.xB[tab.basis >= width].sum())
    if infeas > 1e-7 * max(1.0, float(np.abs(b).max(initial=0.0))):
        raise InfeasibleLP(f"constraints are infeasible (phase-one residual {infeas:.3g})")

    # artificials are pinned to zero from here on
    tab.upper[width:] = 0.0
    tab.at_upper[width:] = False
    tab.xB = np.where(tab.basis >= width, 0.0, tab.xB)
    phase2 = np.concatenate([c, np.zeros(k + tab.m)])
    tab.run(phase2, max_iter)
    if tiebreak is not None:
        tab.freeze_optimal_face(phase2)
        tab.bland = False
        secondary = np.concatenate([np.asarray(tiebreak, dtype=float), np.zeros(k + tab.m)])
        tab.run(secondary, max_iter)

    x = tab.solution()[:n]
    x = np.clip(x, 0.0, upper)
    return LPResult(x=x, fun=float(c @ x), iterations=tab.iterations)
