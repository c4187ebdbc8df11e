"""Compiled kernels for the conditional mutual information game.

Arrays follow one layout throughout: ``W[t, x, s, y]``, weights
``w[t]`` (the parameter type), inputs ``p[t, x]`` and states ``q[t, s]``.
All values are in nats.

The feasible sets are products of simplices cut by one weighted cost
halfspace ``sum_t w_t <c, row_t> <= B``.  Projection onto such a set is
``row_t = simplex(v_t - mu w_t c)`` for the smallest ``mu >= 0`` that
meets the budget, found by bisection.
"""

import numba
import numpy as np

TINY = 1e-300
ARMIJO = 1e-4
MEMORY = 10


@numba.njit(cache=True)
def simplex_row(v, out):
    """Euclidean projection of ``v`` onto the probability simplex."""
    k = v.size
    u = np.sort(v)[::-1]
    css = 0.0
    tau = 0.0
    for j in range(k):
        css += u[j]
        t = (css - 1.0) / (j + 1)
        if u[j] - t > 0:
            tau = t
    for j in range(k):
        out[j] = max(v[j] - tau, 0.0)


@numba.njit(cache=True)
def _rows_shifted(v, w, c, mu, out):
    T, K = v.shape
    row = np.empty(K)
    cost = 0.0
    for t in range(T):
        for j in range(K):
            row[j] = v[t, j] - mu * w[t] * c[j]
        simplex_row(row, out[t])
        for j in range(K):
            cost += w[t] * c[j] * out[t, j]
    return cost


@numba.njit(cache=True)
def project(v, w, c, budget, out):
    """Project rows of ``v`` onto simplices with ``sum_t w_t <c, out_t> <= budget``."""
    T, K = v.shape
    cost = _rows_shifted(v, w, c, 0.0, out)
    if cost <= budget:
        return
    if budget <= 0.0:
        # only zero-cost symbols are allowed
        masked = v.copy()
        for t in range(T):
            for j in range(K):
                if c[j] > 0 and w[t] > 0:
                    masked[t, j] = -1e300
        _rows_shifted(masked, w, c, 0.0, out)
        return
    lo, hi = 0.0, 1.0
    while _rows_shifted(v, w, c, hi, out) > budget:
        lo = hi
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _rows_shifted(v, w, c, mid, out) > budget:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    _rows_shifted(v, w, c, hi, out)


@numba.njit(cache=True)
def channel(W, q):
    """Averaged channel ``V[t, x, y] = sum_s q[t, s] W[t, x, s, y]``."""
    T, X, S, Y = W.shape
    V = np.zeros((T, X, Y))
    for t in range(T):
        for x in range(X):
            for s in range(S):
                qs = q[t, s]
                if qs != 0.0:
                    for y in range(Y):
                        V[t, x, y] += qs * W[t, x, s, y]
    return V


@numba.njit(cache=True)
def _output(V, p):
    T, X, Y = V.shape
    r = np.zeros((T, Y))
    for t in range(T):
        for x in range(X):
            for y in range(Y):
                r[t, y] += p[t, x] * V[t, x, y]
    return r


@numba.njit(cache=True)
def mutual_info(W, w, p, q):
    """``sum_t w_t I(p_t, V_t)`` in nats with ``0 log 0 = 0``."""
    V = channel(W, q)
    r = _output(V, p)
    T, X, Y = V.shape
    total = 0.0
    for t in range(T):
        acc = 0.0
        for x in range(X):
            if p[t, x] == 0.0:
                continue
            for y in range(Y):
                v = V[t, x, y]
                if v > 0.0:
                    acc += p[t, x] * v * np.log(v / max(r[t, y], TINY))
        total += w[t] * acc
    return total


@numba.njit(cache=True)
def grad_p(W, w, p, q):
    V = channel(W, q)
    r = _output(V, p)
    T, X, Y = V.shape
    g = np.zeros((T, X))
    for t in range(T):
        for x in range(X):
            acc = 0.0
            for y in range(Y):
                v = V[t, x, y]
                if v > 0.0:
                    acc += v * np.log(v / max(r[t, y], TINY))
            g[t, x] = w[t] * (acc - 1.0)
    return g


@numba.njit(cache=True)
def grad_q(W, w, p, q):
    V = channel(W, q)
    r = _output(V, p)
    T, X, S, Y = W.shape
    g = np.zeros((T, S))
    for t in range(T):
        for s in range(S):
            acc = 0.0
            for x in range(X):
                px = p[t, x]
                if px == 0.0:
                    continue
                for y in range(Y):
                    wv = W[t, x, s, y]
                    if wv > 0.0:
                        acc += px * wv * np.log(max(V[t, x, y], TINY) / max(r[t, y], TINY))
            g[t, s] = w[t] * acc
    return g


@numba.njit(cache=True)
def _objective(W, w, x, other, which):
    if which == 0:
        return mutual_info(W, w, x, other)
    return -mutual_info(W, w, other, x)


@numba.njit(cache=True)
def _gradient(W, w, x, other, which):
    if which == 0:
        return grad_p(W, w, x, other)
    return -grad_q(W, w, other, x)


@numba.njit(cache=True)
def _spg(W, w, other, x0, c, budget, tol, max_iter, which):
    """Spectral projected gradient ascent (Barzilai-Borwein steps, nonmonotone
    Armijo search over the last ``MEMORY`` values) on one player's variable.

    ``which == 0`` maximizes ``I(x, other)`` over inputs, ``which == 1``
    maximizes ``-I(other, x)`` over states.  Stops when the unit-step
    projected gradient ``|P(x + g) - x|`` drops below ``tol`` or the
    predicted gain is at roundoff level.
    """
    x = x0.copy()
    trial = np.empty_like(x)
    pg = np.empty_like(x)
    f = _objective(W, w, x, other, which)
    g = _gradient(W, w, x, other, which)
    hist = np.full(MEMORY, -np.inf)
    hist[0] = f
    alpha = 1.0
    res = np.inf
    it = 0
    while it < max_iter:
        project(x + g, w, c, budget, pg)
        res = np.sqrt(np.sum((pg - x) ** 2))
        if res < tol:
            break
        it += 1
        project(x + alpha * g, w, c, budget, trial)
        d = trial - x
        slope = np.sum(g * d)
        if slope <= 1e-16 * (1.0 + abs(f)):
            break
        ref = hist.max()
        lam = 1.0
        while True:
            xn = x + lam * d
            fn = _objective(W, w, xn, other, which)
            if fn >= ref + ARMIJO * lam * slope:
                break
            if lam * slope <= 1e-17 * (1.0 + abs(f)):
                break
            lam *= 0.5
        gn = _gradient(W, w, xn, other, which)
        sv = xn - x
        yv = gn - g
        sy = np.sum(sv * yv)
        if sy < 0:
            alpha = min(max(np.sum(sv * sv) / -sy, 1e-10), 1e10)
        else:
            alpha = 1e4
        x = xn
        g = gn
        f = fn
        hist[it % MEMORY] = f
    return x, f, it, res


@numba.njit(cache=True)
def ascend_p(W, w, q, p0, phi, gamma, tol, max_iter):
    """Maximize ``I(., q)`` over feasible inputs.

    Returns ``(p, value, iterations, projected-gradient norm)``.
    """
    p, f, it, res = _spg(W, w, q, p0, phi, gamma, tol, max_iter, 0)
    return p, mutual_info(W, w, p, q), it, res


@numba.njit(cache=True)
def descend_q(W, w, p, q0, l, lam, tol, max_iter):
    """Minimize ``I(p, .)`` over feasible states.  Mirror of :func:`ascend_p`."""
    q, f, it, res = _spg(W, w, p, q0, l, lam, tol, max_iter, 1)
    return q, mutual_info(W, w, p, q), it, res


@numba.njit(cache=True)
def _outer(W, w, phi, gamma, l, lam, p0, q0, tol, inner_tol, max_iter, inner_iter, which):
    """Spectral projected gradient on one player's value function.

    ``which == 0``: descend ``f(q) = max_p I(p, q)`` (outer ``q``).
    ``which == 1``: ascend ``g(p) = min_q I(p, q)`` (outer ``p``).
    The gradient is that of ``I`` at the inner optimum (Danskin), whose
    solve is warm-started from the previous one.  Steps are accepted by
    a monotone Armijo test.  Returns ``(outer, inner, value, iterations,
    projected-gradient norm)``.
    """
    if which == 0:
        x, y = q0.copy(), p0.copy()
        c, budget, sgn = l, lam, -1.0
        y, val, _, _ = ascend_p(W, w, x, y, phi, gamma, inner_tol, inner_iter)
        G = -grad_q(W, w, y, x)
    else:
        x, y = p0.copy(), q0.copy()
        c, budget, sgn = phi, gamma, 1.0
        y, val, _, _ = descend_q(W, w, x, y, l, lam, inner_tol, inner_iter)
        G = grad_p(W, w, x, y)
    F = sgn * val
    pg = np.empty_like(x)
    trial = np.empty_like(x)
    alpha = 1.0
    res = np.inf
    it = 0
    while it < max_iter:
        project(x + G, w, c, budget, pg)
        res = np.sqrt(np.sum((pg - x) ** 2))
        if res < tol:
            break
        it += 1
        project(x + alpha * G, w, c, budget, trial)
        d = trial - x
        slope = np.sum(G * d)
        if slope <= 1e-15 * (1.0 + abs(F)):
            break
        step = 1.0
        moved = False
        while True:
            xn = x + step * d
            if which == 0:
                yn, valn, _, _ = ascend_p(W, w, xn, y, phi, gamma, inner_tol, inner_iter)
            else:
                yn, valn, _, _ = descend_q(W, w, xn, y, l, lam, inner_tol, inner_iter)
            Fn = sgn * valn
            if Fn >= F + ARMIJO * step * slope:
                moved = True
                break
            if step * slope <= 1e-15 * (1.0 + abs(F)):
                break
            step *= 0.5
        if not moved:
            break
        if which == 0:
            Gn = -grad_q(W, w, yn, xn)
        else:
            Gn = grad_p(W, w, xn, yn)
        sv = xn - x
        sy = np.sum(sv * (Gn - G))
        if sy < 0:
            alpha = min(max(np.sum(sv * sv) / -sy, 1e-10), 1e10)
        else:
            alpha = 1e4
        x, y, F, G = xn, yn, Fn, Gn
    return x, y, sgn * F, it, res


@numba.njit(cache=True)
def minmax(W, w, phi, gamma, l, lam, p0, q0, tol, inner_tol, max_iter, inner_iter):
    """Minimize ``f(q) = max_p I(p, q)``; returns ``(q, p, f(q), iterations, residual)``."""
    return _outer(W, w, phi, gamma, l, lam, p0, q0, tol, inner_tol, max_iter, inner_iter, 0)


@numba.njit(cache=True)
def maxmin(W, w, phi, gamma, l, lam, p0, q0, tol, inner_tol, max_iter, inner_iter):
    """Maximize ``g(p) = min_q I(p, q)``; returns ``(p, q, g(p), iterations, residual)``."""
    return _outer(W, w, phi, gamma, l, lam, p0, q0, tol, inner_tol, max_iter, inner_iter, 1)
