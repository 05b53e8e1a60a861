"""Dense two-phase simplex method with Bland's rule.

Solves ``max c^T x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``.
Sized for the tiny programs that arise from best responses over polytopes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-11


class LPError(RuntimeError):
    """Raised when the solver cannot produce an optimum."""

    def __init__(self, status, message, iterations):
        super().__init__(f"{message} (status={status}, iterations={iterations})")
        self.status = status
        self.iterations = iterations


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    iterations: int


class _Tableau:
    def __init__(self, A, b, basis):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.basis = list(basis)
        self.iterations = 0

    def set_objective(self, c):
        # Last row holds reduced costs c_j - c_B^T B^{-1} A_j and -value.
        m = len(self.basis)
        n = self.T.shape[1] - 1
        row = np.zeros(n + 1)
        row[:len(c)] = c
        for r, k in enumerate(self.basis):
            row -= row[k] * self.T[r]
        self.T[m] = row

    def pivot(self, r, k):
        T = self.T
        T[r] /= T[r, k]
        for q in range(T.shape[0]):
            if q != r and T[q, k] != 0.0:
                T[q] -= T[q, k] * T[r]
        self.basis[r] = k
        self.iterations += 1

    def run(self, allowed, max_iter):
        T = self.T
        m = len(self.basis)
        while True:
            if self.iterations >= max_iter:
                raise LPError("max_iter", "simplex iteration limit reached", self.iterations)
            cost = T[m, :-1]
            # Bland: lowest-index improving column, lowest-index leaving variable on ties.
            entering = next((k for k in range(len(cost)) if allowed[k] and cost[k] > PIVOT_TOL), None)
            if entering is None:
                return
            col = T[:m, entering]
            best = None
            for r in range(m):
                if col[r] > PIVOT_TOL:
                    ratio = T[r, -1] / col[r]
                    key = (ratio, self.basis[r])
                    if best is None or key[0] < best[0] - 1e-14 or (
                            abs(key[0] - best[0]) <= 1e-14 and key[1] < best[1]):
                        best = (ratio, self.basis[r], r)
            if best is None:
                raise LPError("unbounded", "objective is unbounded", self.iterations)
            self.pivot(best[2], entering)


def maximize(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter=10_000,
             feas_tol=1e-9) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # Columns: x (n), slacks (m_ub), artificials (m).
    A = np.zeros((m, n + m_ub + m))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:n + m_ub] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1.0
    b = np.abs(b)
    first_art = n + m_ub
    A[:, first_art:] = np.eye(m)

    tab = _Tableau(A, b, range(first_art, first_art + m))
    phase1 = np.zeros(A.shape[1])
    phase1[first_art:] = -1.0
    tab.set_objective(phase1)
    allowed = np.ones(A.shape[1], dtype=bool)
    tab.run(allowed, max_iter)
    if tab.T[m, -1] > feas_tol:
        raise LPError("infeasible", f"no feasible point (phase-1 residual {tab.T[m, -1]:.3e})",
                      tab.iterations)

    # Drive artificials out of the basis; drop redundant rows.
    r = 0
    while r < len(tab.basis):
        if tab.basis[r] >= first_art:
            row = tab.T[r, :first_art]
            k = next((k for k in range(first_art) if abs(row[k]) > PIVOT_TOL), None)
            if k is None:
                tab.T = np.delete(tab.T, r, axis=0)
                del tab.basis[r]
                continue
            tab.pivot(r, k)
        r += 1

    allowed[first_art:] = False
    tab.set_objective(np.concatenate([c, np.zeros(m_ub)]))
    tab.run(allowed, max_iter)

    x = np.zeros(A.shape[1])
    for r, k in enumerate(tab.basis):
        x[k] = tab.T[r, -1]
    x = x[:n]
    return LPResult(x, float(c @ x), tab.iterations)
