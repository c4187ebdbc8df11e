"""Symmetric eigenvalues by one-sided (Hestenes) Jacobi rotations.

Rotations are applied to pairs of rows of a working copy ``G`` of the
matrix until all rows are mutually orthogonal.  At that point
``G = V^T A`` for an orthogonal ``V`` whose columns are eigenvectors, so
row ``i`` equals ``lambda_i v_i^T`` and its norm is ``|lambda_i|``.  The
sign is read off the Rayleigh quotient of the row.

Working on contiguous rows keeps the inner loops cache friendly, which
is what makes ``n = 1024`` practical without LAPACK.
"""

import numba
import numpy as np

__all__ = ["jacobi_eigvalsh", "JacobiResult"]


@numba.njit(cache=True)
def _hestenes(g, tol, max_sweeps):
    n = g.shape[0]
    norms = np.empty(n)
    for sweep in range(max_sweeps):
        for i in range(n):
            s = 0.0
            for k in range(n):
                s += g[i, k] * g[i, k]
            norms[i] = s
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                a = norms[p]
                b = norms[q]
                c_pq = 0.0
                for k in range(n):
                    c_pq += g[p, k] * g[q, k]
                if c_pq == 0.0 or abs(c_pq) <= tol * np.sqrt(a * b):
                    continue
                rotated = True
                zeta = (b - a) / (2.0 * c_pq)
                sgn = 1.0 if zeta >= 0 else -1.0
                t = sgn / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for k in range(n):
                    x = g[p, k]
                    y = g[q, k]
                    g[p, k] = c * x - s * y
                    g[q, k] = s * x + c * y
                norms[p] = a - t * c_pq
                norms[q] = b + t * c_pq
        if not rotated:
            return sweep + 1, True
    return max_sweeps, False


class JacobiResult:
    """Eigenvalues (ascending) plus convergence diagnostics."""

    def __init__(self, eigenvalues, sweeps, converged):
        self.eigenvalues = eigenvalues
        self.sweeps = sweeps
        self.converged = converged


def jacobi_eigvalsh(a, tol=1e-12, max_sweeps=30):
    """Eigenvalues of a real symmetric matrix.

    Parameters
    ----------
    a : (n, n) array_like
        Symmetric matrix.
    tol : float
        A pair of rows counts as orthogonal once
        ``|<g_p, g_q>| <= tol * |g_p| |g_q|``.
    max_sweeps : int
        Cap on full sweeps over all pairs.

    Returns
    -------
    JacobiResult
    """
    a = np.array(a, dtype=float, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n == 0:
        return JacobiResult(np.empty(0), 0, True)
    g = a.copy()
    sweeps, ok = _hestenes(g, tol, max_sweeps)
    mags = np.sqrt(np.einsum("ij,ij->i", g, g))
    # sign from the Rayleigh quotient r A r^T of each row
    quad = np.einsum("ij,ij->i", g @ a, g)
    vals = np.where(quad < 0, -mags, mags)
    return JacobiResult(np.sort(vals), sweeps, ok)
