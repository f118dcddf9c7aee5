"""Dense two-phase simplex method with Bland's anti-cycling rule.

Solves ``min c.x  s.t.  A x = b, x >= 0`` and returns the dual vector ``y``
with ``A^T y <= c`` (up to tolerance) and ``b.y = c.x`` at optimality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_CONSTRAINTS = 500


class SimplexError(RuntimeError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    fun: float
    y: np.ndarray
    status: str  # "optimal", "infeasible" or "unbounded"
    iterations: int
    basis: tuple[int, ...]

    @property
    def success(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    colv = T[:, col].copy()
    colv[row] = 0.0
    T -= np.outer(colv, T[row])


def _run(T: np.ndarray, basis: list[int], n_cols: int, tol: float, max_iter: int, it0: int) -> tuple[str, int]:
    """Bland-rule iterations on tableau ``T`` whose last row holds reduced costs."""
    m = T.shape[0] - 1
    it = it0
    while True:
        cost = T[-1, :n_cols]
        entering = np.flatnonzero(cost < -tol)
        if entering.size == 0:
            return "optimal", it
        if it >= max_iter:
            raise SimplexError(f"simplex exceeded {max_iter} pivots")
        col = int(entering[0])
        a = T[:m, col]
        pos = np.flatnonzero(a > tol)
        if pos.size == 0:
            return "unbounded", it
        ratios = T[pos, -1] / a[pos]
        best = ratios.min()
        ties = pos[ratios <= best + tol * (1.0 + abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, row, col)
        basis[row] = col
        it += 1


def solve_lp(
    c: np.ndarray,
    A_eq: np.ndarray,
    b_eq: np.ndarray,
    tol: float = 1e-9,
    max_iter: int = 50_000,
) -> LPResult:
    """Minimise ``c.x`` over ``{x >= 0 : A_eq x = b_eq}``.

    Unit columns of ``A_eq`` seed the starting basis; artificial variables
    cover the remaining rows and are removed in phase one.
    """
    A = np.array(A_eq, dtype=float, ndmin=2)
    b = np.array(b_eq, dtype=float).ravel()
    c = np.array(c, dtype=float).ravel()
    m, n = A.shape
    if m > MAX_CONSTRAINTS:
        raise SimplexError(f"{m} constraints exceed the desk-scale cap of {MAX_CONSTRAINTS}")
    if b.size != m or c.size != n:
        raise ValueError("inconsistent LP dimensions")
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign

    basis: list[int] = [-1] * m
    for j in range(n):
        col = A[:, j]
        nz = np.flatnonzero(np.abs(col) > 0)
        if nz.size == 1 and abs(col[nz[0]] - 1.0) <= 1e-15 and basis[nz[0]] < 0:
            basis[nz[0]] = j
    art_rows = [i for i in range(m) if basis[i] < 0]
    n_art = len(art_rows)
    T = np.zeros((m + 1, n + n_art + 1))
    T[:m, :n] = A
    T[:m, -1] = b
    for k, i in enumerate(art_rows):
        T[i, n + k] = 1.0
        basis[i] = n + k

    it = 0
    active_rows = np.ones(m, bool)
    if n_art:
        # phase one: minimise the sum of artificials
        T[-1, :] = 0.0
        T[-1, n:n + n_art] = 1.0
        for i in art_rows:
            T[-1] -= T[i]
        _, it = _run(T, basis, n + n_art, tol, max_iter, it)
        if -T[-1, -1] > tol * (1.0 + np.abs(b).sum()):
            return LPResult(np.full(n, np.nan), np.nan, np.full(m, np.nan), "infeasible", it, tuple(basis))
        for i in range(m):
            if basis[i] >= n:
                cand = np.flatnonzero(np.abs(T[i, :n]) > tol)
                if cand.size:
                    _pivot(T, i, int(cand[0]))
                    basis[i] = int(cand[0])
                else:
                    active_rows[i] = False  # redundant constraint
        T = np.delete(T, np.s_[n:n + n_art], axis=1)

    # phase two
    rows = np.flatnonzero(active_rows)
    T = np.vstack([T[rows], np.zeros((1, T.shape[1]))])
    basis = [basis[i] for i in rows]
    T[-1, :n] = c
    for r, j in enumerate(basis):
        T[-1] -= c[j] * T[r]
    status, it = _run(T, basis, n, tol, max_iter, it)

    x = np.zeros(n)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    y = np.zeros(m)
    if status == "optimal":
        B = A[np.ix_(rows, basis)]
        y[rows] = np.linalg.solve(B.T, c[basis])
        y *= sign
    fun = float(c @ x) if status == "optimal" else (-np.inf if status == "unbounded" else np.nan)
    return LPResult(x, fun, y, status, it, tuple(basis))
