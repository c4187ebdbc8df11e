"""Colored Gaussian noise: frequency-domain double water filling and its
finite-blocklength counterpart on Toeplitz covariance eigenvalues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel_model import Constraints, SpectralSpec, midpoint_grid
from .errors import DomainError, NotPSD
from .linalg import jacobi_eigvalsh
from .units import from_nats
from .waterfill import water_level

__all__ = [
    "SpectralAllocation",
    "ToeplitzModel",
    "SzegoTable",
    "autocorr_from_psd",
    "freq_double_waterfill",
    "colored_capacity",
    "colored_capacity_G",
    "eval_G",
    "toeplitz_matrix",
    "toeplitz_eigenvalues",
    "toeplitz_double_waterfill",
    "toeplitz_capacity",
    "szego_convergence",
]

DEFAULT_GRID = 4096
CLAMP = 1e-9
EIG_FLOOR = 1e-12


def autocorr_from_psd(spec: SpectralSpec, max_lag, grid=DEFAULT_GRID):
    """``r(l) = (1/2pi) int Psi(w) cos(l w) dw`` for ``l = 0..max_lag``.

    Exact for the cosine-series representation; composite midpoint rule
    otherwise (on the sample grid itself for sampled densities).
    """
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if spec.autocorr is not None:
        out = np.zeros(max_lag + 1)
        k = min(max_lag + 1, spec.autocorr.size)
        out[:k] = spec.autocorr[:k]
        return out
    m = spec.psd_grid.size
    w = midpoint_grid(m)
    lags = np.arange(max_lag + 1)
    return np.cos(np.multiply.outer(lags, w)) @ spec.psd_grid / m


@dataclass(frozen=True)
class SpectralAllocation:
    """Water levels and allocation functions sampled on the quadrature grid."""

    beta: float
    alpha: float
    omega: np.ndarray
    psd: np.ndarray
    b_star: np.ndarray
    a_star: np.ndarray


def _grid_for(spec, grid):
    if grid < 64:
        raise ValueError(f"grid must be >= 64, got {grid}")
    w = midpoint_grid(grid)
    return w, spec.psd(w)


def freq_double_waterfill(spec: SpectralSpec, grid=DEFAULT_GRID):
    """Jammer then user water filling over frequency.

    The mean over ``grid`` midpoints replaces ``(1/2pi) int dw``, so the
    levels solve ``mean([beta - Psi]_+) = lam`` and
    ``mean([alpha - b* - Psi]_+) = gamma``.
    """
    w, psi = _grid_for(spec, grid)
    m = psi.size
    beta = water_level(psi, spec.lam * m)
    b = np.maximum(beta - psi, 0.0)
    alpha = water_level(b + psi, spec.gamma * m)
    a = np.maximum(alpha - (b + psi), 0.0)
    return SpectralAllocation(beta, alpha, w, psi, b, a)


def colored_capacity(spec: SpectralSpec, grid=DEFAULT_GRID):
    """``(random, deterministic)`` capacity with colored noise.

    The deterministic capacity equals the random one when the user
    budget exceeds the jammer's, and is 0 otherwise.
    """
    al = freq_double_waterfill(spec, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.where(al.a_star > 0, np.log1p(al.a_star / (al.b_star + al.psd)), 0.0)
    c = from_nats(0.5 * float(rate.mean()))
    return c, (c if spec.gamma > spec.lam else 0.0)


def eval_G(x, alpha, beta):
    """Per-frequency rate as a function of the noise density value ``x``.

    ``1/2 log(alpha/beta)`` below ``beta``, ``1/2 log(alpha/x)`` between
    the levels and 0 above ``alpha``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or beta < 0 or alpha < beta:
        raise DomainError("need x >= 0 and alpha >= beta >= 0")
    if beta == 0 and np.any(x < alpha):
        raise DomainError("beta = 0 makes the rate diverge below alpha")
    with np.errstate(divide="ignore"):
        out = np.where(
            x < beta, 0.5 * math.log(alpha / beta) if beta > 0 else np.inf,
            np.where(x < alpha, 0.5 * np.log(alpha / np.maximum(x, 1e-300)), 0.0),
        )
    out = from_nats(out)
    return float(out) if out.ndim == 0 else out


def colored_capacity_G(spec: SpectralSpec, grid=DEFAULT_GRID):
    """Random capacity as the mean of ``eval_G`` over the grid (levels only)."""
    al = freq_double_waterfill(spec, grid)
    if spec.lam == 0:
        # no jammer: fall back to the allocation form, G diverges below beta
        return colored_capacity(spec, grid)[0]
    return float(np.mean(eval_G(al.psd, al.alpha, al.beta)))


# ---------------------------------------------------------------------------
# finite blocklength
# ---------------------------------------------------------------------------

def toeplitz_matrix(r, n):
    """``K[i, j] = r(|i - j|)`` with ``r`` zero beyond its last lag."""
    r = np.asarray(r, dtype=float)
    col = np.zeros(n)
    k = min(n, r.size)
    col[:k] = r[:k]
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return col[idx]


@lru_cache(maxsize=32)
def _eigs_cached(r_key, n):
    res = jacobi_eigvalsh(toeplitz_matrix(np.array(r_key), n))
    return res.eigenvalues, res.sweeps, res.converged


@dataclass(frozen=True)
class ToeplitzModel:
    """Covariance eigenvalues of ``n`` consecutive noise samples."""

    n: int
    eigenvalues: np.ndarray
    sweeps: int


def toeplitz_eigenvalues(r, n):
    """Eigenvalues of the ``n x n`` Toeplitz covariance, clamped and checked.

    Values in ``[-1e-9, 0)`` are set to 0; anything lower raises
    :class:`NotPSD`.  Results are cached on ``(r[:n], n)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    r = np.asarray(r, dtype=float)
    key = tuple(float(v) for v in r[:n])
    vals, sweeps, ok = _eigs_cached(key, n)
    if not ok:
        from .errors import SolverDidNotConverge
        raise SolverDidNotConverge(f"Jacobi eigensolver did not converge for n={n}")
    if vals.min() < -CLAMP:
        raise NotPSD(f"covariance has eigenvalue {vals.min():.3g} < -{CLAMP:g}")
    vals = np.where(vals < 0, 0.0, vals)
    return ToeplitzModel(n, vals.copy(), sweeps)


def toeplitz_double_waterfill(eigs, gamma, lam):
    """Double water filling over eigenvalues with block budgets ``n*lam`` and ``n*gamma``.

    Returns ``(beta, alpha, b, a)``.
    """
    s = np.maximum(np.asarray(eigs, dtype=float), EIG_FLOOR)
    n = s.size
    beta = water_level(s, n * lam)
    b = np.maximum(beta - s, 0.0)
    alpha = water_level(b + s, n * gamma)
    a = np.maximum(alpha - (b + s), 0.0)
    return beta, alpha, b, a


def toeplitz_capacity(r, n, gamma, lam):
    """``(1/2n) sum_i log(1 + a_i / (b_i + s_i))`` over the covariance eigenvalues ``s_i``."""
    model = toeplitz_eigenvalues(r, n)
    s = np.maximum(model.eigenvalues, EIG_FLOOR)
    _, _, b, a = toeplitz_double_waterfill(s, gamma, lam)
    return from_nats(0.5 * float(np.mean(np.log1p(a / (b + s)))))


@dataclass(frozen=True)
class SzegoTable:
    """Finite-``n`` capacities against the spectral limit."""

    limit: float
    n: tuple
    C_n: tuple
    gap: tuple
    monotone: bool


def szego_convergence(r, gamma, lam, n_list, grid=DEFAULT_GRID):
    """Gaps ``|C_n - C_inf|`` for each ``n`` in ``n_list``.

    ``monotone`` reports whether each gap is at most 1.1 times the
    previous one.
    """
    n_list = [int(n) for n in n_list]
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be nonempty and increasing")
    spec = SpectralSpec(Constraints(gamma, lam), autocorr=np.asarray(r, dtype=float))
    limit = colored_capacity(spec, grid)[0]
    cs = [toeplitz_capacity(r, n, gamma, lam) for n in n_list]
    gaps = [abs(c - limit) for c in cs]
    mono = all(g2 <= 1.1 * g1 + 1e-12 for g1, g2 in zip(gaps, gaps[1:]))
    return SzegoTable(limit, tuple(n_list), tuple(cs), tuple(gaps), mono)
