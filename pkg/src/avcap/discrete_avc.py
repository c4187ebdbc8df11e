"""Discrete AVCs with a known parameter sequence.

The parameter sequence enters only through its type ``P_T``.  For each
parameter value ``t`` the channel is ``W[t, x, s, y]``; the user picks
conditional inputs ``p(x|t)`` and the jammer conditional states
``q(s|t)``, each under a ``P_T``-averaged cost budget.

Main entry points
-----------------
random_capacity_fixed_params
    ``min_q max_p I_q(X;Y|T)``, certified by a matching max-min lower bound.
per_parameter_decomposition
    The same value computed as a budget split over per-parameter games.
symm_threshold, deterministic_capacity_fixed_params
    Symmetrizability threshold and the deterministic code capacity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import _rng
from . import _saddle as K
from .channel_model import Constraints, DiscreteAVCSpec
from .errors import DimensionMismatch, DomainError, SolverDidNotConverge
from .lp import independent_rows, linprog
from .units import from_nats

__all__ = [
    "SymmetrizingKernel",
    "CapacityResult",
    "ThresholdResult",
    "DecompositionResult",
    "DetCapacityResult",
    "OracleResult",
    "BSCExampleReport",
    "mutual_info_cond",
    "find_symmetrizer",
    "min_symm_cost",
    "symm_cost_profile",
    "symm_threshold",
    "random_capacity_fixed_params",
    "per_parameter_decomposition",
    "deterministic_capacity_fixed_params",
    "grid_oracle",
    "binary_entropy",
    "bconv",
    "bsc_spec",
    "bsc_constant_capacity",
    "bsc_example",
]

GAP_TOL = 1e-5            # certified duality gap, in bits
SYMM_RESIDUAL_TOL = 1e-8
BOUNDARY_TOL = 1e-6
OUTER_TOL = 1e-6
INNER_TOL = 1e-10
MAX_ITER = 5000


# ---------------------------------------------------------------------------
# information quantities
# ---------------------------------------------------------------------------

def _as_rows(a, rows, cols, name):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1 and rows == 1:
        a = a[None, :]
    if a.shape != (rows, cols):
        raise DimensionMismatch(f"{name} has shape {a.shape}, expected {(rows, cols)}")
    return np.ascontiguousarray(a)


def mutual_info_cond(P_T, p, q, W):
    """Conditional mutual information ``I_q(X;Y|T)`` in the current log unit.

    Parameters
    ----------
    P_T : (T,) array_like
    p : (T, X) array_like
        Conditional input law ``p(x|t)``.
    q : (T, S) array_like
        Conditional state law ``q(s|t)``.
    W : (T, X, S, Y) array_like
    """
    W = np.ascontiguousarray(W, dtype=float)
    if W.ndim != 4:
        raise DimensionMismatch(f"W must be 4-d, got shape {W.shape}")
    T, X, S, _ = W.shape
    w = np.asarray(P_T, dtype=float)
    if w.shape != (T,):
        raise DimensionMismatch(f"P_T has shape {w.shape}, expected {(T,)}")
    p = _as_rows(p, T, X, "p")
    q = _as_rows(q, T, S, "q")
    return from_nats(K.mutual_info(W, w, p, q))


def binary_entropy(x):
    """Binary entropy in the current log unit (``0 log 0 = 0``)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        nats = -np.where(x > 0, x * np.log(x), 0.0) - np.where(x < 1, (1 - x) * np.log1p(-x), 0.0)
    out = from_nats(nats)
    return float(out) if out.ndim == 0 else out


def bconv(a, b):
    """Binary convolution ``(1-a) b + a (1-b)``."""
    return (1 - a) * b + a * (1 - b)


# ---------------------------------------------------------------------------
# symmetrizability
# ---------------------------------------------------------------------------

def _symm_system(W_t):
    """Equality system ``A j = b`` over ``j[x*S + s] = J(s|x)``."""
    X, S, Y = W_t.shape
    rows, rhs = [], []
    for x1, x2 in itertools.combinations(range(X), 2):
        for y in range(Y):
            r = np.zeros(X * S)
            r[x2 * S:(x2 + 1) * S] += W_t[x1, :, y]
            r[x1 * S:(x1 + 1) * S] -= W_t[x2, :, y]
            rows.append(r)
            rhs.append(0.0)
    for x in range(X):
        r = np.zeros(X * S)
        r[x * S:(x + 1) * S] = 1.0
        rows.append(r)
        rhs.append(1.0)
    return np.array(rows), np.array(rhs)


def symmetrization_residual(W_t, J):
    """``max |sum_s W(y|x1,s) J(s|x2) - sum_s W(y|x2,s) J(s|x1)|`` with ``J[s, x]``."""
    M = np.einsum("asy,sb->aby", W_t, J)  # M[x1, x2, y] = sum_s W(y|x1,s) J(s|x2)
    return float(np.abs(M - M.transpose(1, 0, 2)).max())


@dataclass(frozen=True)
class SymmetrizingKernel:
    """A kernel ``J[s, x] = J(s|x)`` that symmetrizes one channel slice.

    ``cost`` is ``sum_{x,s} p(x) J(s|x) l(s)`` when an input law was
    supplied, otherwise ``None``.  ``zero_one`` flags a deterministic
    kernel (all entries 0 or 1), a heuristic hint that the minimal cost
    is attained by a 0-1 law.
    """

    J: np.ndarray
    cost: float | None
    residual: float
    zero_one: bool


def _solve_symmetrizer(W_t, objective):
    A, b = _symm_system(W_t)
    res = linprog(objective, A_eq=A, b_eq=b)
    if res.status != "optimal":
        return None
    X, S, _ = W_t.shape
    j = np.clip(res.x, 0.0, None).reshape(X, S)
    j /= j.sum(axis=1, keepdims=True)
    return j.T.copy()


def find_symmetrizer(W_t, p=None, l=None):
    """Any ``J`` that symmetrizes ``W_t[x, s, y]``, or ``None`` if none exists.

    With ``p`` and ``l`` given, the returned kernel has least cost.
    """
    W_t = np.asarray(W_t, dtype=float)
    X, S, _ = W_t.shape
    if p is not None and l is not None:
        obj = np.outer(np.asarray(p, float), np.asarray(l, float)).ravel()
    else:
        obj = np.zeros(X * S)
    J = _solve_symmetrizer(W_t, obj)
    if J is None:
        return None
    cost = None if p is None or l is None else float(np.asarray(p) @ J.T @ np.asarray(l))
    zero_one = bool(np.all(np.minimum(np.abs(J), np.abs(J - 1)) <= 1e-9))
    return SymmetrizingKernel(J, cost, symmetrization_residual(W_t, J), zero_one)


def min_symm_cost(W_t, p_t, l):
    """Least average state cost of a symmetrizing kernel; ``inf`` if none exists."""
    kern = find_symmetrizer(W_t, p_t, l)
    return math.inf if kern is None else kern.cost


def _active(spec):
    return [t for t in range(spec.sizes[0]) if spec.P_T[t] > 0]


def symm_cost_profile(spec: DiscreteAVCSpec, p):
    """``sum_t P_T(t) * min_symm_cost(W_t, p(.|t), l)``."""
    T, X, _, _ = spec.sizes
    p = _as_rows(p, T, X, "p")
    total = 0.0
    for t in _active(spec):
        c = min_symm_cost(spec.W[t], p[t], spec.l)
        if math.isinf(c):
            return math.inf
        total += spec.P_T[t] * c
    return total


def nonsymmetrizable_params(spec: DiscreteAVCSpec):
    """Indices ``t`` (any mass) whose channel slice admits no symmetrizer."""
    return [t for t in range(spec.sizes[0]) if find_symmetrizer(spec.W[t]) is None]


@dataclass(frozen=True)
class _Lift:
    """Dual description of the symmetrizability cost.

    By LP duality ``min_symm_cost(W_t, p_t, l) = max { b_t . u : A_t^T u <= c(p_t) }``
    with ``c(p)[x*S + s] = p(x) l(s)``, which is linear in ``p``.
    """

    ts: list
    A: list
    b: list


def _lift(spec):
    ts, As, bs = [], [], []
    for t in _active(spec):
        A, b = independent_rows(*_symm_system(spec.W[t]))
        ts.append(t)
        As.append(A)
        bs.append(b)
    return _Lift(ts, As, bs)


def _lift_constraints(spec, lift):
    """Matrices for ``G z + h >= 0`` and ``E z = 1`` over ``z = (p, u_0, u_1, ...)``.

    The rows encode ``A_t^T u_t <= c(p_t)``, ``sum_t w_t b_t.u_t >= lam``
    and the input budget.
    """
    T, X, S, _ = spec.sizes
    w, phi, l = spec.P_T, spec.phi, spec.l
    sizes = [A.shape[0] for A in lift.A]
    n = T * X + sum(sizes)
    offs = np.cumsum([T * X] + sizes)[:-1]
    G, h = [], []
    for t, A, off in zip(lift.ts, lift.A, offs):
        for x in range(X):
            for s in range(S):
                r = np.zeros(n)
                r[t * X + x] = l[s]
                r[off:off + A.shape[0]] = -A[:, x * S + s]
                G.append(r)
                h.append(0.0)
    r = np.zeros(n)
    for t, b, off in zip(lift.ts, lift.b, offs):
        r[off:off + b.size] = w[t] * b
    G.append(r)
    h.append(-spec.lam)
    r = np.zeros(n)
    for t in range(T):
        r[t * X:(t + 1) * X] = -w[t] * phi
    G.append(r)
    h.append(spec.gamma)
    E = np.zeros((T, n))
    for t in range(T):
        E[t, t * X:(t + 1) * X] = 1.0
    return np.array(G), np.array(h), E, n


@dataclass(frozen=True)
class ThresholdResult:
    """Symmetrizability threshold and a maximizing input law."""

    value: float
    p: np.ndarray | None
    oracle_value: float | None = None


def symm_threshold(spec: DiscreteAVCSpec, oracle_grid=None):
    """Largest symmetrizability cost over inputs within the input budget.

    Solved exactly as one linear program in ``(p, u)`` through the dual
    description of each per-parameter cost.  ``oracle_grid=N`` adds a
    brute-force check over the ``1/N`` simplex grid (``|T| <= 2``).
    """
    T, X, S, _ = spec.sizes
    if any(find_symmetrizer(spec.W[t]) is None for t in _active(spec)):
        return ThresholdResult(math.inf, None)
    lift = _lift(spec)
    G, h, E, n = _lift_constraints(spec, lift)
    # drop the "b.u >= lam" row: here we maximize b.u instead
    objective = -G[-2]
    rows = np.r_[0:G.shape[0] - 2, G.shape[0] - 1]
    free = np.zeros(n, bool)
    free[T * X:] = True
    res = linprog(objective, A_eq=E, b_eq=np.ones(T), A_ub=-G[rows], b_ub=h[rows], free=free)
    if res.status != "optimal":
        raise SolverDidNotConverge(f"threshold LP ended with status {res.status}")
    p = np.clip(res.x[:T * X].reshape(T, X), 0, None)
    p /= p.sum(axis=1, keepdims=True)
    value = -res.value
    oracle = None
    if oracle_grid:
        oracle = _threshold_grid(spec, oracle_grid)
    return ThresholdResult(float(value), p, oracle)


def _threshold_grid(spec, N):
    T, X, _, _ = spec.sizes
    if T > 2:
        return None
    grid = _simplex_grid(X, N)
    cost = grid @ spec.phi
    tabs = []
    for t in range(T):
        if spec.P_T[t] == 0:
            tabs.append(np.zeros(len(grid)))
            continue
        tabs.append(np.array([min_symm_cost(spec.W[t], g, spec.l) for g in grid]))
    w = spec.P_T
    if T == 1:
        ok = cost <= spec.gamma + 1e-12
        return float(tabs[0][ok].max())
    tot = w[0] * tabs[0][:, None] + w[1] * tabs[1][None, :]
    ok = w[0] * cost[:, None] + w[1] * cost[None, :] <= spec.gamma + 1e-12
    return float(tot[ok].max())


# ---------------------------------------------------------------------------
# random code capacity
# ---------------------------------------------------------------------------

@dataclass
class CapacityResult:
    """Saddle value of the conditional mutual information game.

    ``value`` is ``max_p I(p, q)`` at the returned ``q`` (an upper bound
    on the game value); ``lower_bound`` is ``min_q I(p, q)`` at the
    returned ``p``.  Their difference is the certified duality gap.
    """

    value: float
    q: np.ndarray
    p: np.ndarray
    lower_bound: float
    gap: float
    iterations: int
    residual: float
    restarts: int
    oracle_value: float | None = None
    oracle_slack: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def oracle_gap(self):
        return None if self.oracle_value is None else self.value - self.oracle_value


def _spec_arrays(spec):
    return (np.ascontiguousarray(spec.W), np.ascontiguousarray(spec.P_T),
            np.ascontiguousarray(spec.phi), np.ascontiguousarray(spec.l))


def _random_start(rng, T, K, w, c, budget):
    v = rng.dirichlet(np.ones(K), size=T)
    out = np.empty_like(v)
    K_project(v, w, c, budget, out)
    return out


def K_project(v, w, c, budget, out):
    K.project(np.ascontiguousarray(v, dtype=float), w, c, float(budget), out)


def _uniform_start(T, K_, w, c, budget):
    out = np.empty((T, K_))
    K_project(np.full((T, K_), 1.0 / K_), w, c, budget, out)
    return out


def _auto_oracle_grid(spec):
    T, X, S, Y = spec.sizes
    if T > 2:
        return 0
    if max(X, S) <= 2:
        return 100
    if max(X, S) <= 3:
        return 30
    return 0


def random_capacity_fixed_params(spec: DiscreteAVCSpec, restarts=8, seed=0, oracle_grid=None,
                                 tol=OUTER_TOL, max_iter=MAX_ITER, check=True):
    """Random code capacity ``min_q max_p I_q(X;Y|T)`` under both cost budgets.

    Each restart runs projected-gradient descent on ``q`` (inner exact
    ascent on ``p``) and the mirror ascent on ``p``.  The best upper and
    lower values over all restarts bracket the game value.

    Parameters
    ----------
    oracle_grid : int, optional
        Grid resolution for the brute-force cross-check.  ``None`` picks
        100 for binary alphabets, 30 for ternary ones and skips larger
        problems; ``0`` disables it.
    check : bool
        Raise :class:`SolverDidNotConverge` when the gap exceeds 1e-5 bits.
    """
    W, w, phi, l = _spec_arrays(spec)
    T, X, S, _ = W.shape
    G, L = spec.gamma, spec.lam
    best_up, best_lo = None, None
    iters = 0
    for k in range(restarts):
        if k == 0:
            p0, q0 = _uniform_start(T, X, w, phi, G), _uniform_start(T, S, w, l, L)
        else:
            rng = _rng.stream(seed, "restart", k)
            p0, q0 = _random_start(rng, T, X, w, phi, G), _random_start(rng, T, S, w, l, L)
        q, p, f, it, gm = K.minmax(W, w, phi, G, l, L, p0, q0, tol, INNER_TOL, max_iter, max_iter)
        iters += it
        if best_up is None or f < best_up[0]:
            best_up = (f, q.copy(), p.copy(), gm)
        p2, q2, g, it2, gm2 = K.maxmin(W, w, phi, G, l, L, p0, q0, tol, INNER_TOL, max_iter, max_iter)
        iters += it2
        if best_lo is None or g > best_lo[0]:
            best_lo = (g, p2.copy(), q2.copy(), gm2)
    up, lo = from_nats(best_up[0]), from_nats(best_lo[0])
    gap = up - lo
    if check and gap > GAP_TOL:
        raise SolverDidNotConverge(
            f"min-max duality gap {gap:.3g} exceeds {GAP_TOL:g} after {iters} iterations",
            residual=gap,
        )
    res = CapacityResult(
        value=max(up, 0.0), q=best_up[1], p=best_lo[1], lower_bound=lo, gap=gap,
        iterations=iters, residual=max(best_up[3], best_lo[3]), restarts=restarts,
        diagnostics={"p_best_response": best_up[2], "q_best_response": best_lo[2]},
    )
    n = _auto_oracle_grid(spec) if oracle_grid is None else oracle_grid
    if n:
        orc = grid_oracle(spec, n, near=(res.p, res.q))
        if orc is not None:
            res.oracle_value = orc.value
            res.oracle_slack = orc.slack
    return res


# ---------------------------------------------------------------------------
# per-parameter decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionResult:
    """Value of the budget-split game and the optimal per-parameter budgets."""

    value: float
    omega: np.ndarray
    lam: np.ndarray
    evaluations: int


class _SliceGame:
    """Per-parameter saddle values ``C_t(omega, lam)`` with warm starts and a cache."""

    def __init__(self, spec, tol):
        self.W = np.ascontiguousarray(spec.W)
        self.phi = np.ascontiguousarray(spec.phi)
        self.l = np.ascontiguousarray(spec.l)
        self.one = np.ones(1)
        self.tol = tol
        self.cache = {}
        self.warm = {}
        self.calls = 0

    def __call__(self, t, omega, lam):
        key = (t, round(omega, 13), round(lam, 13))
        if key in self.cache:
            return self.cache[key]
        W = self.W[t:t + 1]
        X, S = W.shape[1], W.shape[2]
        if t in self.warm:
            p0, q0 = self.warm[t]
            pp, qq = np.empty_like(p0), np.empty_like(q0)
            K_project(p0, self.one, self.phi, omega, pp)
            K_project(q0, self.one, self.l, lam, qq)
        else:
            pp = _uniform_start(1, X, self.one, self.phi, omega)
            qq = _uniform_start(1, S, self.one, self.l, lam)
        q, p, f, _, _ = K.minmax(W, self.one, self.phi, omega, self.l, lam, pp, qq,
                                 self.tol, INNER_TOL, MAX_ITER, MAX_ITER)
        self.warm[t] = (p, q)
        self.calls += 1
        self.cache[key] = f
        return f


def _golden(fun, lo, hi, tol, maximize=False):
    """Golden-section search for a unimodal function on ``[lo, hi]``."""
    sign = -1.0 if maximize else 1.0
    if hi - lo <= tol:
        x = 0.5 * (lo + hi)
        return x, fun(x)
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = sign * fun(c), sign * fun(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = sign * fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = sign * fun(d)
    # compare the interior optimum with the end points (flat or monotone cases)
    cands = [(fc, c), (fd, d), (sign * fun(lo), lo), (sign * fun(hi), hi)]
    v, x = min(cands)
    return x, sign * v


def _split_budget(fun, w, cap, budget, tol, maximize):
    """Optimize ``fun(alloc)`` over ``{0 <= a_t <= cap, sum w_t a_t = budget}`` by pairwise exchange.

    Exact (a one-dimensional search) for two parameters.
    """
    T = w.size
    total_cap = float(w @ cap)
    if budget >= total_cap:
        a = cap.copy()
        return a, fun(a)
    a = cap * (budget / total_cap)
    best = fun(a)
    for _ in range(50):
        improved = False
        for i, j in itertools.combinations(range(T), 2):
            # move mass between i and j keeping w_i a_i + w_j a_j fixed
            m = w[i] * a[i] + w[j] * a[j]
            lo_i = max(0.0, (m - w[j] * cap[j]) / w[i])
            hi_i = min(cap[i], m / w[i])

            def along(x, i=i, j=j, m=m):
                b = a.copy()
                b[i] = x
                b[j] = max((m - w[i] * x) / w[j], 0.0)
                return fun(b)

            x, v = _golden(along, lo_i, hi_i, tol, maximize)
            better = v > best + 1e-12 if maximize else v < best - 1e-12
            if better:
                a[i] = x
                a[j] = max((m - w[i] * x) / w[j], 0.0)
                best = v
                improved = True
        if not improved or T == 2:
            break
    return a, best


def per_parameter_decomposition(spec: DiscreteAVCSpec, tol=1e-6):
    """``min_lam max_omega sum_t P_T(t) C_t(omega_t, lam_t)`` over budget splits.

    ``C_t`` is the single-parameter constrained saddle value, treated as
    a black box.  The splits are found by nested golden-section searches
    (exact for up to two parameters; pairwise exchange beyond that).
    """
    T = spec.sizes[0]
    active = np.array(_active(spec))
    w = spec.P_T[active]
    game = _SliceGame(spec, OUTER_TOL)
    phimax, lmax = float(spec.phi.max()), float(spec.l.max())
    cap_w = np.full(active.size, phimax)
    cap_l = np.full(active.size, lmax)

    def inner(lam_split):
        def total(om):
            return float(sum(wt * game(t, o, lm) for wt, t, o, lm in zip(w, active, om, lam_split)))

        om, v = _split_budget(total, w, cap_w, spec.gamma, tol, maximize=True)
        inner.last = om
        return v

    if active.size == 1:
        lam_split = np.array([min(spec.lam, lmax)])
        v = inner(lam_split)
    else:
        lam_split, v = _split_budget(inner, w, cap_l, spec.lam, tol, maximize=False)
        v = inner(lam_split)
    omega = np.zeros(T)
    lam = np.zeros(T)
    omega[active] = inner.last
    lam[active] = lam_split
    return DecompositionResult(from_nats(v), omega, lam, game.calls)


# ---------------------------------------------------------------------------
# deterministic code capacity
# ---------------------------------------------------------------------------

@dataclass
class DetCapacityResult:
    """Deterministic code capacity with the threshold that decides it."""

    value: float
    threshold: float
    boundary: bool
    nonsymmetrizable: list
    p: np.ndarray | None
    q: np.ndarray | None
    random: CapacityResult | None
    lower_bound: float | None = None
    constraint_active: bool = False


class _ConstrainedInputs:
    """Best response of the user restricted to ``symmetrizability cost >= lam``."""

    def __init__(self, spec):
        self.spec = spec
        self.W, self.w, self.phi, self.l = _spec_arrays(spec)
        T, X, _, _ = spec.sizes
        self.T, self.X = T, X
        lift = _lift(spec)
        self.G, self.h, self.E, self.n = _lift_constraints(spec, lift)
        self.z = None

    def _z0(self, p):
        z = np.zeros(self.n)
        z[:self.T * self.X] = p.ravel()
        return z

    def maximize(self, q, p0=None):
        """``max_p I(p, q)`` over the restricted input set (nats)."""
        W, w = self.W, self.w
        TX = self.T * self.X
        z0 = self.z if self.z is not None else self._z0(p0)

        def obj(z):
            p = np.ascontiguousarray(z[:TX].reshape(self.T, self.X))
            return -K.mutual_info(W, w, np.clip(p, 0, None), q)

        def jac(z):
            p = np.ascontiguousarray(np.clip(z[:TX], 0, None).reshape(self.T, self.X))
            g = np.zeros(self.n)
            g[:TX] = -K.grad_p(W, w, p, q).ravel()
            return g

        cons = [
            {"type": "ineq", "fun": lambda z: self.G @ z + self.h, "jac": lambda z: self.G},
            {"type": "eq", "fun": lambda z: self.E @ z - 1.0, "jac": lambda z: self.E},
        ]
        bounds = [(0.0, 1.0)] * TX + [(None, None)] * (self.n - TX)
        res = minimize(obj, z0, jac=jac, bounds=bounds, constraints=cons, method="SLSQP",
                       options={"ftol": 1e-14, "maxiter": 500})
        z = res.x
        viol = max(0.0, -(self.G @ z + self.h).min(), np.abs(self.E @ z - 1).max())
        if viol > 1e-7:
            raise SolverDidNotConverge(f"restricted input problem infeasible (violation {viol:.2g})")
        self.z = z
        p = np.clip(z[:TX].reshape(self.T, self.X), 0, None)
        p /= p.sum(axis=1, keepdims=True)
        return p, K.mutual_info(W, w, p, q)


def _descend_restricted(inputs, q0, p0, lam, tol, max_iter):
    """Projected-gradient descent on ``q`` against the restricted best response."""
    W, w, l = inputs.W, inputs.w, inputs.l
    q = q0.copy()
    p, f = inputs.maximize(q, p0)
    cand = np.empty_like(q)
    step = 1.0
    it = 0
    gm = np.inf
    while it < max_iter:
        it += 1
        g = K.grad_q(W, w, p, q)
        while True:
            K_project(q - step * g, w, l, lam, cand)
            pc, fc = inputs.maximize(cand)
            if fc <= f + K.ARMIJO * np.sum(g * (cand - q)) or step < 1e-12:
                break
            step *= 0.5
        gm = np.linalg.norm(cand - q) / step
        if fc <= f:
            q, p, f = cand.copy(), pc, fc
        if gm < tol or step < 1e-12:
            break
        step = min(2 * step, 1e4)
    return q, p, f, it


def _restricted_lower(inputs, p0, q0, lam, max_iter=300):
    """``max_p min_q I(p, q)`` over the restricted inputs (nats)."""
    W, w, l = inputs.W, inputs.w, inputs.l
    TX = inputs.T * inputs.X
    state = {"q": q0.copy()}

    def inner(z):
        p = np.ascontiguousarray(np.clip(z[:TX], 0, None).reshape(inputs.T, inputs.X))
        p /= p.sum(axis=1, keepdims=True)
        q, f, _, _ = K.descend_q(W, w, p, state["q"], l, lam, INNER_TOL, MAX_ITER)
        state["q"] = q
        return p, q, f

    def obj(z):
        return -inner(z)[2]

    def jac(z):
        p, q, _ = inner(z)
        g = np.zeros(inputs.n)
        g[:TX] = -K.grad_p(W, w, p, q).ravel()
        return g

    cons = [
        {"type": "ineq", "fun": lambda z: inputs.G @ z + inputs.h, "jac": lambda z: inputs.G},
        {"type": "eq", "fun": lambda z: inputs.E @ z - 1.0, "jac": lambda z: inputs.E},
    ]
    bounds = [(0.0, 1.0)] * TX + [(None, None)] * (inputs.n - TX)
    z0 = inputs.z.copy() if inputs.z is not None else inputs._z0(p0)
    res = minimize(obj, z0, jac=jac, bounds=bounds, constraints=cons, method="SLSQP",
                   options={"ftol": 1e-14, "maxiter": max_iter})
    z = res.x
    viol = max(0.0, -(inputs.G @ z + inputs.h).min(), np.abs(inputs.E @ z - 1).max())
    if viol > 1e-7:
        return -np.inf
    return inner(z)[2]


def deterministic_capacity_fixed_params(spec: DiscreteAVCSpec, restarts=8, seed=0,
                                        tol=OUTER_TOL, check=True):
    """Deterministic code capacity decided by the symmetrizability threshold.

    Zero when the threshold is below the jammer budget.  Otherwise the
    min-max of the random code problem with the user restricted to
    inputs whose symmetrizability cost is at least the jammer budget.
    A threshold within 1e-6 of the budget sets ``boundary=True``: the
    formula is still evaluated but the answer is not decided there.
    """
    thr = symm_threshold(spec)
    L = spec.lam
    boundary = abs(thr.value - L) <= BOUNDARY_TOL
    nonsym = [t for t in _active(spec) if find_symmetrizer(spec.W[t]) is None]
    if not thr.value > L:
        return DetCapacityResult(0.0, thr.value, boundary, nonsym, None, None, None)
    rnd = random_capacity_fixed_params(spec, restarts=restarts, seed=seed, tol=tol,
                                       oracle_grid=0, check=check)
    if math.isinf(thr.value) or symm_cost_profile(spec, rnd.p) >= L - 1e-12:
        # a max-min optimal input already meets the restriction
        return DetCapacityResult(rnd.value, thr.value, boundary, nonsym, rnd.p, rnd.q, rnd,
                                 lower_bound=rnd.lower_bound)
    inputs = _ConstrainedInputs(spec)
    W, w, phi, l = _spec_arrays(spec)
    T, X, S, _ = W.shape
    best = None
    for k in range(max(1, restarts // 2)):
        if k == 0:
            q0 = rnd.q.copy()
        else:
            q0 = _random_start(_rng.stream(seed, "det", k), T, S, w, l, L)
        inputs.z = None
        q, p, f, _ = _descend_restricted(inputs, q0, thr.p, L, tol, 500)
        if best is None or f < best[0]:
            best = (f, q, p)
    f, q, p = best
    inputs.z = None
    lower = _restricted_lower(inputs, p, q, L)
    up, lo = from_nats(f), from_nats(lower)
    if check and up - lo > GAP_TOL:
        raise SolverDidNotConverge(f"restricted min-max gap {up - lo:.3g} exceeds {GAP_TOL:g}",
                                   residual=up - lo)
    return DetCapacityResult(max(up, 0.0), thr.value, boundary, nonsym, p, q, rnd,
                             lower_bound=lo, constraint_active=True)


# ---------------------------------------------------------------------------
# exhaustive grid oracle
# ---------------------------------------------------------------------------

def _simplex_grid(k, N):
    """All points of the simplex in ``R^k`` with coordinates in ``{0, 1/N, ..., 1}``."""
    pts = []
    for bars in itertools.combinations(range(N + k - 1), k - 1):
        prev, c = -1, []
        for b in bars:
            c.append(b - prev - 1)
            prev = b
        c.append(N + k - 1 - prev - 1)
        pts.append(c)
    return np.array(pts, dtype=float) / N


def _grid_table(W_t, Gp, Gq):
    """``I[i, j]`` for inputs ``Gp[i]`` and states ``Gq[j]`` on one slice (nats)."""
    V = np.einsum("js,xsy->jxy", Gq, W_t)
    with np.errstate(divide="ignore", invalid="ignore"):
        vlv = np.where(V > 0, V * np.log(V), 0.0).sum(axis=2)  # (Nq, X)
        term1 = Gp @ vlv.T
        r = np.einsum("ix,jxy->ijy", Gp, V)
        term2 = np.where(r > 0, r * np.log(r), 0.0).sum(axis=2)
    return term1 - term2


def _nearest_index(points, index, x, N):
    """Index of the grid point obtained by largest-remainder rounding of ``x``."""
    scaled = np.asarray(x) * N
    base = np.floor(scaled).astype(int)
    rem = N - base.sum()
    order = np.argsort(-(scaled - base))
    base[order[:rem]] += 1
    return index[tuple(base)]


def _neighbours(c, index):
    out = []
    k = len(c)
    for a in range(k):
        if c[a] == 0:
            continue
        for b in range(k):
            if a != b:
                d = list(c)
                d[a] -= 1
                d[b] += 1
                out.append(index[tuple(d)])
    return out


@dataclass(frozen=True)
class OracleResult:
    """Grid min-max value and the local Lipschitz slack of the grid."""

    value: float
    slack: float | None
    step: float


def grid_oracle(spec: DiscreteAVCSpec, N=100, near=None):
    """Brute-force ``min_q max_p`` over the ``1/N`` grid on every simplex (``|T| <= 2``).

    Parameters
    ----------
    near : (p, q), optional
        A candidate saddle point.  The slack is the largest change of
        the objective over one grid step around it, summed over the
        directions a rounding can move (``|X|-1`` for inputs and
        ``|S|-1`` for states).
    """
    T, X, S, _ = spec.sizes
    if T > 2:
        return None
    w = spec.P_T
    Gp, Gq = _simplex_grid(X, N), _simplex_grid(S, N)
    cp, cq = Gp @ spec.phi, Gq @ spec.l
    tabs = [_grid_table(spec.W[t], Gp, Gq) for t in range(T)]
    eps = 1e-12
    if T == 1:
        I = tabs[0][cp <= spec.gamma + eps][:, cq <= spec.lam + eps]
        val = I.max(axis=0).min()
    else:
        # inputs: for each i0 the best i1 within the remaining budget, via prefix maxima
        order = np.argsort(cp, kind="stable")
        cps = cp[order]
        prefix = np.maximum.accumulate(tabs[1][order], axis=0)  # (Np, Nq)
        feas0 = np.flatnonzero(w[0] * cp <= spec.gamma + eps)
        rem = (spec.gamma + eps - w[0] * cp[feas0]) / w[1] if w[1] > 0 else np.full(feas0.size, np.inf)
        cnt = np.searchsorted(cps, rem, side="right")
        ok = cnt > 0
        feas0, cnt = feas0[ok], cnt[ok]
        A = w[0] * tabs[0][feas0]               # (n0, Nq0)
        B = w[1] * prefix[cnt - 1]              # (n0, Nq1)
        qok = w[0] * cq[:, None] + w[1] * cq[None, :] <= spec.lam + eps
        val = np.inf
        for j0 in range(len(Gq)):
            js = np.flatnonzero(qok[j0])
            if js.size == 0:
                continue
            inner = (A[:, j0][:, None] + B[:, js]).max(axis=0)
            val = min(val, inner.min())
    slack = None
    if near is not None:
        p, q = near
        pidx = {tuple(int(round(v)) for v in g * N): i for i, g in enumerate(Gp)}
        qidx = {tuple(int(round(v)) for v in g * N): i for i, g in enumerate(Gq)}
        slack = 0.0
        for t in range(T):
            i = _nearest_index(Gp, pidx, p[t], N)
            j = _nearest_index(Gq, qidx, q[t], N)
            ci = tuple(int(round(v)) for v in Gp[i] * N)
            cj = tuple(int(round(v)) for v in Gq[j] * N)
            dp = max((abs(tabs[t][k, j] - tabs[t][i, j]) for k in _neighbours(ci, pidx)), default=0.0)
            dq = max((abs(tabs[t][i, k] - tabs[t][i, j]) for k in _neighbours(cj, qidx)), default=0.0)
            slack += w[t] * ((X - 1) * dp + (S - 1) * dq)
        slack = from_nats(slack)
    return OracleResult(from_nats(float(val)), slack, 1.0 / N)


# ---------------------------------------------------------------------------
# binary symmetric example
# ---------------------------------------------------------------------------

def bsc_spec(eps, P_T, gamma, lam):
    """Additive BSC ``Y = X + S + Z_t mod 2`` with Hamming costs on input and state."""
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    W = np.zeros((eps.size, 2, 2, 2))
    for t, e in enumerate(eps):
        for x in range(2):
            for s in range(2):
                W[t, x, s, x ^ s] = 1 - e
                W[t, x, s, 1 - (x ^ s)] = e
    return DiscreteAVCSpec(W, P_T, [0.0, 1.0], [0.0, 1.0], Constraints(gamma, lam))


def bsc_constant_capacity(omega, lam, eps):
    """Capacity of the constant-parameter additive BSC under input cost ``omega`` and state cost ``lam``.

    Zero once the jammer can match the input weight (``omega <= lam``)
    or erase the channel (``lam >= 1/2``).
    """
    if lam >= 0.5 or omega <= lam:
        return 0.0
    c = bconv(lam, eps)
    if omega < 0.5:
        return binary_entropy(bconv(omega, c)) - binary_entropy(c)
    return from_nats(math.log(2)) - binary_entropy(c)


@dataclass(frozen=True)
class BSCExampleReport:
    """Joint versus split coding on a two-parameter BSC.

    ``C_joint`` is the closed form ``h(gamma * c) - h(c)`` where ``c`` is
    the common effective crossover after the jammer equalizes both
    slices with ``lam_alloc``; ``C_split`` is the average of the
    per-slice capacities at the same allocation.
    """

    C_joint: float
    C_split: float
    superadditive: bool
    omega: tuple
    lam_alloc: tuple
    crossover: float
    threshold: float


def bsc_example(eps0, eps1, gamma, lam):
    """Closed-form super-additivity check on the two-slice BSC with uniform parameter type."""
    if not 0 < eps0 < eps1 < 0.5:
        raise DomainError(f"need 0 < eps0 < eps1 < 1/2, got {eps0}, {eps1}")
    if not (0 < gamma and 0 < lam):
        raise DomainError("budgets must be positive")
    # lam0 * eps0 == lam1 * eps1 with (lam0 + lam1) / 2 == lam
    k0, k1 = 1 - 2 * eps0, 1 - 2 * eps1
    lam0 = (eps1 - eps0 + 2 * lam * k1) / (k0 + k1)
    lam1 = 2 * lam - lam0
    if not (0 <= lam0 < 0.5 and 0 <= lam1 < 0.5):
        raise DomainError(f"equalizing jammer split ({lam0:.4g}, {lam1:.4g}) leaves [0, 1/2)")
    c = bconv(lam0, eps0)
    threshold = min(gamma, 0.5)
    if threshold > lam:
        w = min(gamma, 0.5)
        joint = binary_entropy(bconv(w, c)) - binary_entropy(c)
    else:
        joint = 0.0
    split = 0.5 * bsc_constant_capacity(gamma, lam0, eps0) + 0.5 * bsc_constant_capacity(gamma, lam1, eps1)
    return BSCExampleReport(joint, split, joint > split, (gamma, gamma), (lam0, lam1), c, threshold)
