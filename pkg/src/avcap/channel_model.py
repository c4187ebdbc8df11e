"""Channel specifications, validation and JSON ingestion.

Four kinds of spec are supported, each with a fixed JSON schema::

    product   {"d", "sigma2", "gamma", "lambda"}
    spectral  {"psd": {"grid": [...]} | {"autocorr": [...]}, "gamma", "lambda"}
    discrete  {"X", "S", "T", "Y", "W", "P_T", "phi", "l", "gamma", "lambda"}
    fading    {"theta", "P_T", "sigma2", "gamma", "lambda"}

Specs are frozen dataclasses holding read-only numpy arrays.  Direct
construction accepts zero budgets (used internally as degenerate
limits); files with a zero budget are rejected by :func:`load_spec`.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

__all__ = [
    "Constraints",
    "ParallelGaussianSpec",
    "SpectralSpec",
    "DiscreteAVCSpec",
    "FadingSpec",
    "load_spec",
    "parse_spec",
    "spec_to_dict",
    "dump_spec",
    "spec_digest",
    "ar1_autocorr",
]

STOCHASTIC_TOL = 1e-12
KINDS = ("product", "spectral", "discrete", "fading")


def _frozen_array(values, name, ndim=None):
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(name, f"not numeric ({exc})") from None
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(name, f"expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(name, "contains non-finite entries")
    arr.setflags(write=False)
    return arr


def _check_pmf(vec, name, tol=STOCHASTIC_TOL):
    if np.any(vec < 0):
        raise ValidationError(name, "has negative entries")
    if abs(vec.sum() - 1.0) > tol:
        raise ValidationError(name, f"sums to {vec.sum()!r}, not 1")


class _ArrayEq:
    """Field-wise equality that compares arrays bit-exactly."""

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
                if a is None or b is None or not np.array_equal(a, b):
                    return False
            elif a != b:
                return False
        return True

    __hash__ = None


@dataclass(frozen=True)
class Constraints:
    """Per-symbol average budgets for the user (``gamma``) and the jammer (``lam``)."""

    gamma: float
    lam: float

    def __post_init__(self):
        for name, v in (("gamma", self.gamma), ("lambda", self.lam)):
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise ValidationError(name, f"must be a finite number, got {v!r}")
            if v < 0:
                raise ValidationError(name, f"must be nonnegative, got {v!r}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "lam", float(self.lam))


@dataclass(frozen=True, eq=False)
class ParallelGaussianSpec(_ArrayEq):
    """``d`` parallel additive Gaussian channels with noise variances ``sigma2``."""

    sigma2: np.ndarray
    constraints: Constraints

    def __post_init__(self):
        s = _frozen_array(self.sigma2, "sigma2", ndim=1)
        if s.size == 0:
            raise ValidationError("sigma2", "needs at least one channel")
        if np.any(s <= 0):
            raise ValidationError("sigma2", "all noise variances must be > 0")
        object.__setattr__(self, "sigma2", s)

    @property
    def d(self):
        return self.sigma2.size

    @property
    def gamma(self):
        return self.constraints.gamma

    @property
    def lam(self):
        return self.constraints.lam


@dataclass(frozen=True, eq=False)
class SpectralSpec(_ArrayEq):
    """Noise power spectral density on ``[-pi, pi]``.

    Exactly one of ``psd_grid`` and ``autocorr`` is set.

    ``psd_grid`` holds ``M`` samples at the cell midpoints
    ``omega_k = -pi + (k + 1/2) 2 pi / M``; between samples the density
    is piecewise constant.  ``autocorr`` holds ``r(0..L)`` and defines
    ``Psi(w) = r(0) + 2 sum_l r(l) cos(l w)``.
    """

    constraints: Constraints
    psd_grid: np.ndarray | None = None
    autocorr: np.ndarray | None = None

    def __post_init__(self):
        if (self.psd_grid is None) == (self.autocorr is None):
            raise ValidationError("psd", "give exactly one of 'grid' or 'autocorr'")
        if self.psd_grid is not None:
            g = _frozen_array(self.psd_grid, "psd.grid", ndim=1)
            if g.size == 0:
                raise ValidationError("psd.grid", "is empty")
            if np.any(g < 0):
                k = int(np.argmin(g))
                raise ValidationError(f"psd.grid[{k}]", f"negative sample {g[k]!r}")
            if not np.allclose(g, g[::-1], rtol=1e-12, atol=1e-12):
                raise ValidationError("psd.grid", "samples are not symmetric under w -> -w")
            object.__setattr__(self, "psd_grid", g)
        else:
            r = _frozen_array(self.autocorr, "psd.autocorr", ndim=1)
            if r.size == 0:
                raise ValidationError("psd.autocorr", "is empty")
            object.__setattr__(self, "autocorr", r)
            # nonnegativity is checked on a fine grid
            w = midpoint_grid(max(4096, 8 * r.size))
            vals = self._series(w)
            if vals.min() < -1e-9 * max(1.0, abs(r[0])):
                raise ValidationError("psd.autocorr", f"series is negative (min {vals.min():.3g})")

    @property
    def gamma(self):
        return self.constraints.gamma

    @property
    def lam(self):
        return self.constraints.lam

    def _series(self, omega):
        r = self.autocorr
        lags = np.arange(1, r.size)
        return r[0] + 2.0 * np.cos(np.multiply.outer(omega, lags)) @ r[1:]

    def psd(self, omega):
        """Evaluate the density at the angular frequencies ``omega``."""
        omega = np.asarray(omega, dtype=float)
        if self.autocorr is not None:
            # roundoff-level negatives were accepted at validation
            return np.maximum(self._series(omega), 0.0)
        m = self.psd_grid.size
        wrapped = np.mod(omega + np.pi, 2 * np.pi)
        idx = np.minimum((wrapped * m / (2 * np.pi)).astype(int), m - 1)
        return self.psd_grid[idx]


@dataclass(frozen=True, eq=False)
class DiscreteAVCSpec(_ArrayEq):
    """Finite-alphabet AVC with a known parameter type.

    ``W[t, x, s, y]`` is the channel law, ``P_T`` the parameter type,
    ``phi`` and ``l`` the input and state costs.
    """

    W: np.ndarray
    P_T: np.ndarray
    phi: np.ndarray
    l: np.ndarray
    constraints: Constraints

    def __post_init__(self):
        W = _frozen_array(self.W, "W", ndim=4)
        P_T = _frozen_array(self.P_T, "P_T", ndim=1)
        phi = _frozen_array(self.phi, "phi", ndim=1)
        l = _frozen_array(self.l, "l", ndim=1)
        T, X, S, Y = W.shape
        if min(W.shape) == 0:
            raise ValidationError("W", f"empty alphabet in shape {W.shape}")
        if P_T.size != T:
            raise ValidationError("P_T", f"length {P_T.size} but |T| = {T}")
        if phi.size != X:
            raise ValidationError("phi", f"length {phi.size} but |X| = {X}")
        if l.size != S:
            raise ValidationError("l", f"length {l.size} but |S| = {S}")
        if np.any(W < 0):
            t, x, s, _ = np.argwhere(W < 0)[0]
            raise ValidationError(f"W[{t}][{x}][{s}]", "has a negative probability")
        dev = np.abs(W.sum(axis=3) - 1.0)
        if dev.max() > STOCHASTIC_TOL:
            t, x, s = np.unravel_index(int(np.argmax(dev)), dev.shape)
            raise ValidationError(
                f"W[{t}][{x}][{s}]",
                f"row (t={t}, x={x}, s={s}) sums to {W[t, x, s].sum()!r}, not 1",
            )
        _check_pmf(P_T, "P_T")
        for name, c in (("phi", phi), ("l", l)):
            if np.any(c < 0):
                raise ValidationError(name, "costs must be nonnegative")
            if c.min() != 0.0:
                raise ValidationError(name, "minimum cost must be exactly 0")
        for name, v in (("W", W), ("P_T", P_T), ("phi", phi), ("l", l)):
            object.__setattr__(self, name, v)

    @property
    def sizes(self):
        """``(|T|, |X|, |S|, |Y|)``."""
        return self.W.shape

    @property
    def gamma(self):
        return self.constraints.gamma

    @property
    def lam(self):
        return self.constraints.lam


@dataclass(frozen=True, eq=False)
class FadingSpec(_ArrayEq):
    """Fixed fading coefficients ``theta`` with type ``P_T`` and noise variance ``sigma2``."""

    theta: np.ndarray
    P_T: np.ndarray
    sigma2: float
    constraints: Constraints

    def __post_init__(self):
        theta = _frozen_array(self.theta, "theta", ndim=1)
        P_T = _frozen_array(self.P_T, "P_T", ndim=1)
        if theta.size == 0:
            raise ValidationError("theta", "is empty")
        if P_T.size != theta.size:
            raise ValidationError("P_T", f"length {P_T.size} but {theta.size} coefficients")
        _check_pmf(P_T, "P_T")
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValidationError("sigma2", f"must be > 0, got {self.sigma2!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "P_T", P_T)
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def gamma(self):
        return self.constraints.gamma

    @property
    def lam(self):
        return self.constraints.lam


def midpoint_grid(m):
    """Cell midpoints of a uniform ``m``-cell partition of ``[-pi, pi]``."""
    return -np.pi + (np.arange(m) + 0.5) * (2 * np.pi / m)


def ar1_autocorr(rho, max_lag=None, variance=1.0):
    """Autocorrelation ``variance * rho**l`` truncated where it drops below 1e-18."""
    if not -1 < rho < 1:
        raise ValidationError("rho", f"must lie in (-1, 1), got {rho!r}")
    if max_lag is None:
        max_lag = 0 if rho == 0 else int(math.ceil(math.log(1e-18) / math.log(abs(rho))))
    return variance * rho ** np.arange(max_lag + 1, dtype=float)


# ---------------------------------------------------------------------------
# JSON ingestion
# ---------------------------------------------------------------------------

def _get(obj, key, kind):
    if key not in obj:
        raise ParseError(f"{kind} spec is missing key {key!r}")
    return obj[key]


def _number(obj, key, kind):
    v = _get(obj, key, kind)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{key!r} must be a number, got {type(v).__name__}")
    return float(v)


def _budgets(obj, kind):
    g = _number(obj, "gamma", kind)
    lam = _number(obj, "lambda", kind)
    for name, v in (("gamma", g), ("lambda", lam)):
        if not v > 0:
            raise ValidationError(name, f"budget must be > 0, got {v!r}")
    return Constraints(g, lam)


def _int(obj, key, kind):
    v = _get(obj, key, kind)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"{key!r} must be an integer")
    return v


def parse_spec(obj, kind):
    """Build a validated spec from a decoded JSON object."""
    if kind not in KINDS:
        raise ValueError(f"unknown spec kind {kind!r}")
    if not isinstance(obj, dict):
        raise ParseError(f"{kind} spec must be a JSON object")
    cons = _budgets(obj, kind)
    if kind == "product":
        sigma2 = _get(obj, "sigma2", kind)
        d = _int(obj, "d", kind)
        if not isinstance(sigma2, list) or len(sigma2) != d:
            raise ValidationError("d", f"d = {d} but sigma2 has {len(sigma2) if isinstance(sigma2, list) else '?'} entries")
        return ParallelGaussianSpec(sigma2, cons)
    if kind == "spectral":
        psd = _get(obj, "psd", kind)
        if not isinstance(psd, dict) or len(psd) != 1 or not ({"grid", "autocorr"} & psd.keys()):
            raise ParseError("'psd' must be {'grid': [...]} or {'autocorr': [...]}")
        if "grid" in psd:
            return SpectralSpec(cons, psd_grid=psd["grid"])
        return SpectralSpec(cons, autocorr=psd["autocorr"])
    if kind == "discrete":
        T, X, S, Y = (_int(obj, k, kind) for k in ("T", "X", "S", "Y"))
        W = _get(obj, "W", kind)
        try:
            arr = np.array(W, dtype=float)
        except (TypeError, ValueError):
            raise ParseError("'W' must be a rectangular nested list of numbers") from None
        if arr.shape != (T, X, S, Y):
            raise ValidationError("W", f"shape {arr.shape} does not match (T, X, S, Y) = {(T, X, S, Y)}")
        return DiscreteAVCSpec(
            arr, _get(obj, "P_T", kind), _get(obj, "phi", kind), _get(obj, "l", kind), cons
        )
    return FadingSpec(
        _get(obj, "theta", kind), _get(obj, "P_T", kind), _number(obj, "sigma2", kind), cons
    )


def load_spec(path, kind):
    """Read and validate a JSON spec file.

    Raises
    ------
    ParseError
        File missing or not valid JSON.
    ValidationError
        An invariant is violated; ``err.field`` names the field.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    return parse_spec(obj, kind)


def spec_to_dict(spec):
    """Inverse of :func:`parse_spec`."""
    c = spec.constraints
    tail = {"gamma": c.gamma, "lambda": c.lam}
    if isinstance(spec, ParallelGaussianSpec):
        return {"d": spec.d, "sigma2": spec.sigma2.tolist(), **tail}
    if isinstance(spec, SpectralSpec):
        if spec.psd_grid is not None:
            psd = {"grid": spec.psd_grid.tolist()}
        else:
            psd = {"autocorr": spec.autocorr.tolist()}
        return {"psd": psd, **tail}
    if isinstance(spec, DiscreteAVCSpec):
        T, X, S, Y = spec.sizes
        return {
            "X": X, "S": S, "T": T, "Y": Y,
            "W": spec.W.tolist(), "P_T": spec.P_T.tolist(),
            "phi": spec.phi.tolist(), "l": spec.l.tolist(), **tail,
        }
    if isinstance(spec, FadingSpec):
        return {"theta": spec.theta.tolist(), "P_T": spec.P_T.tolist(), "sigma2": spec.sigma2, **tail}
    raise TypeError(f"not a spec: {type(spec).__name__}")


def dump_spec(spec, path=None):
    """Serialize to JSON text; also write it to ``path`` if given."""
    text = json.dumps(spec_to_dict(spec))
    if path is not None:
        Path(path).write_text(text)
    return text


def spec_digest(data):
    """SHA-256 hex digest of raw spec bytes (or text)."""
    if isinstance(data, str):
        data = data.encode()
    return hashlib.sha256(data).hexdigest()
