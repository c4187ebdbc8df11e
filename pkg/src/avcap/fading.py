"""Gaussian AVC with fixed, known fading coefficients.

The channel at a coefficient value ``t`` is ``Y = t X + S + Z``.  Both
players split their power budgets across the coefficient values, the
user with ``omega(t)`` and the jammer with ``lambda(t)``, both in
expectation over the parameter type ``P_T``.  The payoff
``E 1/2 log(1 + t^2 omega / (lambda + sigma2))`` is concave in
``omega`` and convex in ``lambda``, so the min-max is a saddle point and
both sides can be certified against each other.

Working units are nats; results are converted on the way out.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .channel_model import FadingSpec
from .errors import SolverDidNotConverge
from .units import from_nats
from .waterfill import water_level

__all__ = [
    "FadingAllocation",
    "FadingResult",
    "FadingDetResult",
    "fading_payoff",
    "fading_symm_cost",
    "fading_threshold",
    "fading_random_capacity",
    "fading_det_capacity",
]

GAP_TOL = 1e-9  # nats
PG_TOL = 1e-11
MAX_ITER = 5000
ORACLE_STEPS = 200
BOUNDARY_TOL = 1e-6


@dataclass(frozen=True)
class FadingAllocation:
    """Per-coefficient powers; entry ``i`` belongs to ``theta[i]``."""

    omega: np.ndarray
    lam: np.ndarray


@dataclass(frozen=True)
class FadingResult:
    value: float
    allocation: FadingAllocation
    lower_bound: float
    iterations: int
    oracle_value: float | None


@dataclass(frozen=True)
class FadingDetResult:
    value: float
    threshold: float
    boundary: bool
    allocation: FadingAllocation | None
    lower_bound: float
    random: float
    constraint_active: bool


class _Model:
    """Coefficients restricted to the support of ``P_T`` plus index bookkeeping."""

    def __init__(self, spec: FadingSpec):
        self.spec = spec
        self.support = np.flatnonzero(spec.P_T > 0)
        self.P = spec.P_T[self.support]
        self.t2 = spec.theta[self.support] ** 2
        self.live = self.t2 > 0
        self.s2 = spec.sigma2

    def expand(self, v):
        out = np.zeros(self.spec.theta.size)
        out[self.support] = v
        return out

    def payoff(self, omega, lam):
        c = self.t2 * omega
        return 0.5 * float(self.P @ np.log1p(c / (lam + self.s2)))

    def grad_lam(self, omega, lam):
        # derivative divided by P_t (gradient in the P-weighted metric)
        n = lam + self.s2
        c = self.t2 * omega
        return -0.5 * c / (n * (n + c))

    def project_lam(self, v, budget):
        """``P``-weighted projection onto ``{lam >= 0, E lam = budget}``."""
        if budget == 0:
            return np.zeros_like(v)
        level = water_level(-v, budget, self.P)
        return np.maximum(v + level, 0.0)

    def floors(self, lam):
        with np.errstate(divide="ignore"):
            return np.where(self.live, (lam + self.s2) / np.where(self.live, self.t2, 1.0), np.inf)

    # -- user side --------------------------------------------------------

    def user_free(self, lam, gamma):
        """Water filling on the effective floors ``(lam + sigma2) / t^2``."""
        a = self.floors(lam)
        if gamma == 0 or not self.live.any():
            return np.zeros_like(lam)
        level = water_level(a, gamma, self.P)
        return np.where(self.live, np.maximum(level - a, 0.0), 0.0)

    def _omega_at(self, a, kappa, nu):
        with np.errstate(divide="ignore", invalid="ignore"):
            w = 0.5 / (nu - kappa * self.t2) - a
        return np.where(self.live, np.maximum(w, 0.0), 0.0)

    def _omega_kappa(self, a, kappa, gamma):
        """Maximizer of the payoff plus ``kappa E(T^2 omega)`` with ``E omega = gamma``."""
        top = kappa * self.t2[self.live].max()
        fin = np.isfinite(a)
        hi = np.max(kappa * self.t2[fin] + 0.5 / a[fin]) - top

        def excess(z):
            return float(self.P @ self._omega_at(a, kappa, top + np.exp(z))) - gamma

        zhi = np.log(hi) + 1.0
        zlo = zhi - 1.0
        while excess(zlo) < 0:
            zlo -= 4.0
        z = brentq(excess, zlo, zhi, xtol=1e-14, rtol=1e-15, maxiter=500)
        return self._omega_at(a, kappa, top + np.exp(z))

    def user_constrained(self, lam, gamma, floor_cost):
        """Best response subject to ``E(T^2 omega) >= floor_cost`` (needs ``gamma max t^2 > floor_cost``)."""
        w0 = self.user_free(lam, gamma)
        if float(self.P @ (self.t2 * w0)) >= floor_cost:
            return w0
        a = self.floors(lam)

        def shortfall(kappa):
            return float(self.P @ (self.t2 * self._omega_kappa(a, kappa, gamma))) - floor_cost

        k_hi = 1.0 / a[np.isfinite(a)].min()
        while shortfall(k_hi) < 0:
            k_hi *= 4.0
        kappa = brentq(shortfall, 0.0, k_hi, xtol=1e-15, rtol=1e-15, maxiter=500)
        w = self._omega_kappa(a, kappa, gamma)
        if float(self.P @ (self.t2 * w)) < floor_cost:
            w = self._omega_kappa(a, min(kappa * (1 + 1e-12) + 1e-300, k_hi), gamma)
        return w

    # -- jammer side ------------------------------------------------------

    def jammer_response(self, omega, budget):
        """Exact minimizer over ``lam`` for fixed ``omega``.

        Stationarity ``1/2 c / (n (n + c)) = nu`` with ``n = lam + sigma2``
        gives ``n = (-c + sqrt(c^2 + 2c/nu)) / 2``; ``nu`` is set by the budget.
        """
        c = self.t2 * omega
        if budget == 0 or not np.any(c > 0):
            return np.zeros_like(c)

        def lam_at(nu):
            n = 0.5 * (-c + np.sqrt(c * c + 2.0 * c / nu))
            return np.maximum(n - self.s2, 0.0)

        def excess(z):
            return float(self.P @ lam_at(np.exp(z))) - budget

        zhi = np.log(np.max(0.5 * c / (self.s2 * (self.s2 + c)))) + 1.0
        zlo = zhi - 1.0
        while excess(zlo) < 0:
            zlo -= 4.0
        z = brentq(excess, zlo, zhi, xtol=1e-14, rtol=1e-15, maxiter=500)
        return lam_at(np.exp(z))


def _descend(model, respond, lam0, budget, tol=PG_TOL, max_iter=MAX_ITER):
    """Projected gradient on ``f(lam) = payoff(respond(lam), lam)``.

    Barzilai-Borwein steps with a monotone Armijo test.  The gradient is
    that of the payoff at the user's best response.
    """
    lam = model.project_lam(lam0, budget)
    om = respond(lam)
    f = model.payoff(om, lam)
    g = model.grad_lam(om, lam)
    step = 1.0
    it = 0
    while it < max_iter:
        pg = model.project_lam(lam - g, budget) - lam
        if np.sqrt(model.P @ pg ** 2) < tol:
            break
        it += 1
        d = model.project_lam(lam - step * g, budget) - lam
        slope = float(model.P @ (g * d))
        if slope >= -1e-16 * (1 + abs(f)):
            break
        s = 1.0
        while True:
            ln = lam + s * d
            on = respond(ln)
            fn = model.payoff(on, ln)
            if fn <= f + 1e-4 * s * slope or s * abs(slope) < 1e-17:
                break
            s *= 0.5
        if fn > f:
            break
        gn = model.grad_lam(on, ln)
        sv, yv = ln - lam, gn - g
        sy = float(model.P @ (sv * yv))
        step = min(max(float(model.P @ sv ** 2) / sy, 1e-10), 1e10) if sy > 0 else 1e4
        lam, om, f, g = ln, on, fn, gn
    return lam, om, f, it


def _weighted_grid(P, budget, steps):
    """Points ``lam_t = budget * k_t / (steps * P_t)`` with ``sum k = steps``."""
    k = len(P)
    for combo in itertools.combinations(range(steps + k - 1), k - 1):
        cuts = (-1,) + combo + (steps + k - 1,)
        counts = np.diff(cuts) - 1
        yield budget * counts / (steps * P)


def _batch_free_payoff(model, lam, gamma):
    """Payoff at the user's water-filling response for each row of ``lam``."""
    live = model.live
    a = (lam[:, live] + model.s2) / model.t2[live]
    P = model.P[live]
    order = np.argsort(a, axis=1)
    a_s = np.take_along_axis(a, order, axis=1)
    P_s = P[order]
    cw = np.cumsum(P_s, axis=1)
    level = (gamma + np.cumsum(P_s * a_s, axis=1)) / cw
    ok = level > a_s
    # active set is a prefix; take the last index that still sits under water
    j = ok.shape[1] - 1 - np.argmax(ok[:, ::-1], axis=1)
    L = level[np.arange(len(j)), j]
    om = np.maximum(L[:, None] - a, 0.0)
    return 0.5 * np.sum(P * np.log1p(om / a), axis=1)


def _solve(model, respond, budget, oracle):
    live = model.live
    lam0 = np.where(live, 1.0, 0.0)
    lam0 = lam0 * budget / max(float(model.P @ lam0), 1e-300)
    lam, om, f, it = _descend(model, respond, lam0, budget)
    best = None
    if oracle is not None and len(model.P) <= 3:
        pts = np.array(list(_weighted_grid(model.P, budget, ORACLE_STEPS)))
        vals = oracle(pts)
        i = int(np.argmin(vals))
        best, arg = float(vals[i]), pts[i]
        if f > best + 1e-12:
            lam2, om2, f2, it2 = _descend(model, respond, arg, budget)
            if f2 < f:
                lam, om, f = lam2, om2, f2
            it += it2
    low = model.payoff(om, model.jammer_response(om, budget))
    if f - low > GAP_TOL * max(1.0, f):
        raise SolverDidNotConverge(
            f"fading min-max gap {f - low:.3g} nats above tolerance", residual=f - low
        )
    return lam, om, f, low, it, best


def fading_payoff(spec: FadingSpec, omega, lam):
    """``E 1/2 log(1 + T^2 omega(T) / (lambda(T) + sigma2))`` in the current unit."""
    omega = np.asarray(omega, dtype=float)
    lam = np.asarray(lam, dtype=float)
    c = spec.theta ** 2 * omega
    return from_nats(0.5 * float(spec.P_T @ np.log1p(c / (lam + spec.sigma2))))


def fading_symm_cost(spec: FadingSpec, omega):
    """Least jammer power that symmetrizes the channel against ``omega``: ``E(T^2 omega(T))``."""
    return float(spec.P_T @ (spec.theta ** 2 * np.asarray(omega, dtype=float)))


def fading_threshold(spec: FadingSpec):
    """Largest symmetrizability cost over feasible user allocations, ``gamma max t^2``."""
    return spec.gamma * float(np.max(spec.theta[spec.P_T > 0] ** 2))


def fading_random_capacity(spec: FadingSpec, oracle=True):
    """Random code capacity.

    The user's best response is water filling on the effective floors
    ``(lambda_t + sigma2) / t^2``; coefficients ``t = 0`` get no power.
    The jammer split is found by projected gradient, cross-checked
    against a grid of step ``1/200`` when at most three coefficient
    values carry mass, and certified by the jammer's exact best
    response to the final user allocation.
    """
    model = _Model(spec)
    grid = (lambda pts: _batch_free_payoff(model, pts, spec.gamma)) if oracle else None
    lam, om, f, low, it, best = _solve(
        model, lambda l: model.user_free(l, spec.gamma), spec.lam, grid
    )
    alloc = FadingAllocation(model.expand(om), model.expand(lam))
    return FadingResult(
        from_nats(f), alloc, from_nats(low), it, None if best is None else from_nats(best)
    )


def fading_det_capacity(spec: FadingSpec, oracle=True):
    """Deterministic code capacity.

    Zero unless ``gamma max t^2`` exceeds ``lambda``; otherwise the
    same min-max with the extra user constraint ``E(T^2 omega) >= lambda``.
    ``oracle`` applies to the random capacity computed along the way; the
    constrained solve relies on its duality-gap certificate.
    """
    model = _Model(spec)
    thr = fading_threshold(spec)
    boundary = abs(thr - spec.lam) <= BOUNDARY_TOL
    rnd = fading_random_capacity(spec, oracle)
    if thr <= spec.lam:
        return FadingDetResult(0.0, thr, boundary, None, 0.0, rnd.value, True)
    cost = fading_symm_cost(spec, rnd.allocation.omega)
    if cost >= spec.lam:
        return FadingDetResult(rnd.value, thr, boundary, rnd.allocation, rnd.lower_bound, rnd.value, False)
    lam, om, f, low, _, _ = _solve(
        model, lambda l: model.user_constrained(l, spec.gamma, spec.lam), spec.lam, None
    )
    alloc = FadingAllocation(model.expand(om), model.expand(lam))
    return FadingDetResult(from_nats(f), thr, boundary, alloc, from_nats(low), rnd.value, True)
