"""Dense two-phase simplex method with Bland's anti-cycling rule.

Sized for the small linear programs of symmetrizability analysis (a few
dozen variables).  Solves::

    minimize    c @ x
    subject to  A_eq @ x == b_eq
                A_ub @ x <= b_ub
                x >= 0, except entries flagged in ``free``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LPResult", "linprog", "independent_rows"]

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-11
PIVOT_REL = 1e-9


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: np.ndarray | None
    value: float
    iterations: int


def independent_rows(A, b, tol=1e-10):
    """Drop rows of ``[A | b]`` that are linear combinations of earlier rows.

    Gram-Schmidt with one reorthogonalization pass; a row is kept when
    its component outside the span of the kept rows exceeds ``tol``
    relative to its own norm.  An inconsistent system keeps the row
    whose right-hand side disagrees, so infeasibility is still found.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    keep, basis = [], []
    for i, row in enumerate(np.column_stack([A, b])):
        v = row.copy()
        for _ in range(2):
            for e in basis:
                v -= (v @ e) * e
        nv = np.linalg.norm(v)
        if nv > tol * max(1.0, np.linalg.norm(row)):
            basis.append(v / nv)
            keep.append(i)
    return A[keep], b[keep]


def _pivot(tab, basis, row, col):
    tab[row] /= tab[row, col]
    for i in range(tab.shape[0]):
        if i != row and tab[i, col] != 0.0:
            tab[i] -= tab[i, col] * tab[row]
    basis[row] = col


def _run(tab, basis, ncols, max_iter):
    """Simplex iterations on a tableau whose last row is the reduced cost row."""
    m = tab.shape[0] - 1
    it = 0
    while it < max_iter:
        cost = tab[-1, :ncols]
        # Bland: smallest index with negative reduced cost
        enter = -1
        for j in range(ncols):
            if cost[j] < -FEAS_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal", it
        col = tab[:m, enter]
        rhs = tab[:m, -1]
        best, leave = np.inf, -1
        # tiny pivots wreck the tableau; skip entries far below the column scale
        floor = max(PIVOT_TOL, PIVOT_REL * np.abs(col).max(initial=0.0))
        for i in range(m):
            if col[i] > floor:
                ratio = rhs[i] / col[i]
                # ties go to the smallest basic index
                if ratio < best - 1e-14 or (abs(ratio - best) <= 1e-14 and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave < 0:
            return "unbounded", it
        _pivot(tab, basis, leave, enter)
        it += 1
    raise RuntimeError("simplex iteration cap reached")


def linprog(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, free=None, max_iter=50_000):
    """Solve a small dense LP; see the module docstring for the form.

    Returns
    -------
    LPResult
        ``x`` is ``None`` unless ``status == "optimal"``.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, float).ravel()
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, float).ravel()
    free = np.zeros(n, bool) if free is None else np.asarray(free, bool)
    if A_eq.shape[0]:
        # dependent equalities make the phase-1 basis numerically singular
        A_eq, b_eq = independent_rows(A_eq, b_eq)

    # split free variables: x = x+ - x-
    nf = int(free.sum())
    split = np.zeros((n, n + nf))
    split[:, :n] = np.eye(n)
    split[np.flatnonzero(free), n + np.arange(nf)] = -1.0
    cs = c @ split
    Ae, Au = A_eq @ split, A_ub @ split
    nv = n + nf

    # slacks for inequalities
    mu, me = Au.shape[0], Ae.shape[0]
    A = np.zeros((me + mu, nv + mu))
    A[:me, :nv] = Ae
    A[me:, :nv] = Au
    A[me:, nv:] = np.eye(mu)
    b = np.concatenate([b_eq, b_ub])
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    m, ncols = A.shape

    # phase 1 with one artificial per row
    tab = np.zeros((m + 1, ncols + m + 1))
    tab[:m, :ncols] = A
    tab[:m, ncols:ncols + m] = np.eye(m)
    tab[:m, -1] = b
    basis = list(range(ncols, ncols + m))
    tab[-1, :ncols] = -A.sum(axis=0)
    tab[-1, -1] = -b.sum()
    _, it1 = _run(tab, basis, ncols + m, max_iter)
    if -tab[-1, -1] > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
        return LPResult("infeasible", None, np.nan, it1)

    # drive artificials out of the basis; rows where that fails are redundant
    keep = []
    for i in range(m):
        if basis[i] >= ncols:
            row = tab[i, :ncols]
            j = np.flatnonzero(np.abs(row) > 1e-9)
            if j.size:
                _pivot(tab, basis, i, int(j[0]))
                keep.append(i)
        else:
            keep.append(i)
    tab = np.vstack([tab[keep][:, list(range(ncols)) + [-1]], np.zeros((1, ncols + 1))])
    basis = [basis[i] for i in keep]

    # phase 2
    cost = np.zeros(ncols)
    cost[:nv] = cs
    tab[-1, :ncols] = cost
    for i, j in enumerate(basis):
        if tab[-1, j] != 0.0:
            tab[-1] -= tab[-1, j] * tab[i]
    status, it2 = _run(tab, basis, ncols, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", None, -np.inf, it1 + it2)
    xs = np.zeros(ncols)
    xs[basis] = tab[:-1, -1]
    # tableau values drift after pivots on small entries; re-solve with the final basis
    xb = np.linalg.lstsq(A[keep][:, basis], b[keep], rcond=None)[0]
    if np.all(xb >= -FEAS_TOL):
        xs[basis] = np.maximum(xb, 0.0)
    x = split @ xs[:nv]
    return LPResult("optimal", x, float(c @ x), it1 + it2)
