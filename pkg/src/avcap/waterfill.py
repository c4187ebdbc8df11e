"""Double water filling for parallel Gaussian channels under jamming.

The jammer pours its budget onto the noise floor first (level ``beta``),
then the user pours its budget onto the raised floor (level ``alpha``).
The pair is the saddle point of the power allocation game, which the
verification helpers below check directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .channel_model import Constraints, ParallelGaussianSpec
from .errors import DimensionMismatch
from .units import from_nats

__all__ = [
    "WaterfillAllocation",
    "KKTReport",
    "SaddleReport",
    "water_level",
    "double_waterfill",
    "random_code_capacity_product",
    "deterministic_code_capacity_product",
    "closed_form_capacity",
    "scalar_capacity",
    "verify_kkt",
    "saddle_check",
    "gaussian_symm_cost",
]


def water_level(floor, volume, weights=None):
    """Level ``L`` with ``sum_j w_j [L - floor_j]_+ = volume``.

    Parameters
    ----------
    floor : array_like
        Floor heights.  Entries equal to ``inf`` never receive water.
    volume : float
        Amount of water, ``>= 0``.
    weights : array_like, optional
        Positive weights ``w_j`` (all ones by default).

    Returns
    -------
    float
        The water level.  For ``volume == 0`` this is ``min(floor)``.

    Notes
    -----
    Sorting the floors makes the level exact: with the ``k`` lowest
    floors active the level is ``(volume + sum w f) / sum w`` over them,
    and the answer is the first ``k`` whose level does not reach the
    next floor.
    """
    floor = np.asarray(floor, dtype=float)
    if floor.size == 0:
        raise ValueError("floor must be nonempty")
    if volume < 0:
        raise ValueError(f"volume must be >= 0, got {volume}")
    w = np.ones_like(floor) if weights is None else np.asarray(weights, dtype=float)
    finite = np.isfinite(floor) & (w > 0)
    if not finite.any():
        raise ValueError("no finite floor to fill")
    f, w = floor[finite], w[finite]
    if volume == 0:
        return float(f.min())
    order = np.argsort(f, kind="stable")
    f, w = f[order], w[order]
    levels = (volume + np.cumsum(w * f)) / np.cumsum(w)
    nxt = np.append(f[1:], np.inf)
    k = int(np.argmax(levels <= nxt))
    return float(levels[k])


@dataclass(frozen=True)
class WaterfillAllocation:
    """Water levels and per-channel powers of the double water filling."""

    beta: float
    alpha: float
    N_star: np.ndarray
    P_star: np.ndarray


def _double_waterfill(sigma2, gamma, lam):
    sigma2 = np.asarray(sigma2, dtype=float)
    beta = water_level(sigma2, lam)
    N = np.maximum(beta - sigma2, 0.0)
    alpha = water_level(N + sigma2, gamma)
    P = np.maximum(alpha - (N + sigma2), 0.0)
    return WaterfillAllocation(beta, alpha, N, P)


def double_waterfill(spec: ParallelGaussianSpec) -> WaterfillAllocation:
    """Saddle-point power allocation of user and jammer.

    Examples
    --------
    >>> spec = ParallelGaussianSpec([1.0], Constraints(2.0, 1.0))
    >>> a = double_waterfill(spec)
    >>> a.beta, a.alpha
    (2.0, 4.0)
    """
    return _double_waterfill(spec.sigma2, spec.gamma, spec.lam)


def _rate_nats(P, N, sigma2):
    return float(np.sum(0.5 * np.log1p(P / (N + sigma2))))


def random_code_capacity_product(spec: ParallelGaussianSpec, allocation=None):
    """Random code capacity ``sum_j 1/2 log(1 + P_j / (N_j + sigma_j^2))``."""
    a = double_waterfill(spec) if allocation is None else allocation
    return from_nats(_rate_nats(a.P_star, a.N_star, spec.sigma2))


def closed_form_capacity(spec: ParallelGaussianSpec, allocation=None):
    """Same capacity written through the levels only: ``1/2 log(max(alpha, s) / max(beta, s))``."""
    a = double_waterfill(spec) if allocation is None else allocation
    s = spec.sigma2
    return from_nats(float(np.sum(0.5 * np.log(np.maximum(a.alpha, s) / np.maximum(a.beta, s)))))


def deterministic_code_capacity_product(spec: ParallelGaussianSpec):
    """Random code capacity when the user budget exceeds the jammer's, else 0."""
    if spec.gamma > spec.lam:
        return random_code_capacity_product(spec)
    return 0.0


def scalar_capacity(gamma, lam, sigma2):
    """``(random, deterministic)`` capacity of the scalar Gaussian AVC."""
    if gamma < 0 or lam < 0 or sigma2 <= 0:
        raise ValueError("need gamma >= 0, lam >= 0, sigma2 > 0")
    c = from_nats(0.5 * math.log1p(gamma / (sigma2 + lam)))
    return c, (c if lam < gamma else 0.0)


@dataclass(frozen=True)
class KKTReport:
    """Residuals of the jammer's optimality conditions at a given allocation.

    ``inequality`` holds ``g_j - theta`` (must be ``<= tol``) and
    ``slackness`` holds ``(theta - g_j) N_j`` (must be ``|.| <= tol``),
    where ``g_j = P_j / ((N_j + s_j)(N_j + s_j + P_j))``.
    """

    theta: float
    budget_residual: float
    negativity: np.ndarray
    inequality: np.ndarray
    slackness: np.ndarray
    tol: float
    passed: bool


def verify_kkt(spec: ParallelGaussianSpec, allocation: WaterfillAllocation, tol=1e-9):
    """Check the jammer's KKT conditions with multiplier ``(alpha - beta) / (alpha beta)``."""
    s = spec.sigma2
    N = np.asarray(allocation.N_star, dtype=float)
    P = np.asarray(allocation.P_star, dtype=float)
    if N.shape != s.shape or P.shape != s.shape:
        raise DimensionMismatch(
            f"allocation has {N.size} jammer and {P.size} user powers for {s.size} channels"
        )
    a, b = allocation.alpha, allocation.beta
    theta = (a - b) / (a * b) if a * b > 0 else math.inf
    g = P / ((N + s) * (N + s + P))
    budget = float(N.sum() - spec.lam)
    neg = np.maximum(-N, 0.0)
    ineq = g - theta
    slack = (theta - g) * N
    passed = (
        abs(budget) <= tol
        and bool(np.all(neg <= tol))
        and bool(np.all(ineq <= tol))
        and bool(np.all(np.abs(slack) <= tol))
    )
    return KKTReport(theta, budget, neg, ineq, slack, tol, passed)


@dataclass(frozen=True)
class SaddleReport:
    """Largest payoff improvement found by each player's random deviations."""

    max_user_gain: float
    max_jammer_gain: float
    trials: int


def _simplex_points(rng, count, d, total):
    # normalized exponential spacings are uniform on the simplex
    e = rng.standard_exponential((count, d))
    return total * e / e.sum(axis=1, keepdims=True)


def saddle_check(spec: ParallelGaussianSpec, allocation: WaterfillAllocation, trials=10_000,
                 seed=0, block=1024):
    """Random unilateral deviations from ``allocation``.

    Each block of ``block`` trials draws from its own counter-keyed
    stream, so the report does not depend on evaluation order.  Gains
    are in the current log unit; a negative value means no sampled
    deviation helped.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    s = spec.sigma2
    P, N = np.asarray(allocation.P_star, float), np.asarray(allocation.N_star, float)
    base = np.sum(0.5 * np.log1p(P / (N + s)))
    best_user = -math.inf
    best_jam = -math.inf
    for k, start in enumerate(range(0, trials, block)):
        count = min(block, trials - start)
        rng = _rng.stream(seed, "saddle", k)
        Pd = _simplex_points(rng, count, s.size, spec.gamma)
        Nd = _simplex_points(rng, count, s.size, spec.lam)
        user = np.sum(0.5 * np.log1p(Pd / (N + s)), axis=1) - base
        jam = base - np.sum(0.5 * np.log1p(P / (Nd + s)), axis=1)
        best_user = max(best_user, float(user.max()))
        best_jam = max(best_jam, float(jam.max()))
    return SaddleReport(from_nats(best_user), from_nats(best_jam), trials)


def gaussian_symm_cost(P):
    """Least jammer power that symmetrizes a Gaussian input with powers ``P``: their sum."""
    P = np.asarray(P, dtype=float)
    if np.any(P < 0):
        raise ValueError("powers must be nonnegative")
    return float(P.sum())
