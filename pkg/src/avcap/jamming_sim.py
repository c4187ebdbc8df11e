"""Monte Carlo check of the jamming phase transition on the scalar Gaussian AVC.

Codewords lie on the power sphere of radius ``sqrt(n gamma)`` and are
decoded by minimum Euclidean distance.  Two jammers are available: an
i.i.d. Gaussian one just under its power limit, and one that transmits
a (rescaled) codeword of its own choosing, which confuses the decoder
whenever it can afford the user's power.

Codebook sizes up to ``EXPLICIT_MAX`` are drawn once per run and kept
fixed over all trials.  Beyond that (e.g. ``2^153.6`` codewords) the
codebook cannot be stored; the simulator then averages over the
ensemble of random spherical codes instead.  Given the received vector,
each of the other codewords independently lands closer than the sent
one with a probability that is a regularized incomplete beta function,
so the conditional error probability is available in closed form and a
single Bernoulli draw per trial replaces the search.

Randomness for trial block ``k`` comes from a generator keyed on
``(seed, "trials", k)``, so reports do not depend on evaluation order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from ._rng import stream

__all__ = [
    "Strategy",
    "SimConfig",
    "SimReport",
    "gen_codebook",
    "min_dist_decode",
    "make_state",
    "simulate",
    "EXPLICIT_MAX",
]

EXPLICIT_MAX = 2 ** 12
BLOCK = 1000
Z95 = 1.96


class Strategy(str, enum.Enum):
    IID_GAUSSIAN = "iid"
    CODEWORD_MIMIC = "mimic"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"iidgaussian": cls.IID_GAUSSIAN, "iid_gaussian": cls.IID_GAUSSIAN,
                   "codewordmimic": cls.CODEWORD_MIMIC, "codeword_mimic": cls.CODEWORD_MIMIC}
        key = str(value).lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class SimConfig:
    n: int
    rate: float
    gamma: float
    lam: float
    sigma2: float
    strategy: Strategy
    trials: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy.parse(self.strategy))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.rate <= 0 or self.gamma <= 0 or self.lam < 0 or self.sigma2 < 0:
            raise ValueError("need rate > 0, gamma > 0, lam >= 0, sigma2 >= 0")
        if self.M < 2:
            raise ValueError(f"2^(n R) rounds to {self.M}, need at least 2 codewords")

    @property
    def log2_M(self):
        return self.n * self.rate

    @property
    def M(self):
        """Codebook size ``round(2^(n R))`` as an exact integer."""
        return int(round(2.0 ** self.log2_M))

    @classmethod
    def from_codebook_size(cls, n, M, **kw):
        return cls(n=n, rate=math.log2(M) / n, **kw)


@dataclass(frozen=True)
class SimReport:
    error_rate: float
    half_width: float
    errors: int
    trials: int
    mode: str  # "explicit" or "ensemble"
    config: SimConfig
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["config"]["strategy"] = self.config.strategy.value
        return d


def gen_codebook(n, M, gamma, rng):
    """``M`` distinct codewords, each uniform on the sphere ``|x|^2 = n gamma``."""
    if M < 2:
        raise ValueError("M must be >= 2")
    if n == 1 and M > 2:
        raise ValueError("the one-dimensional sphere has only two points")
    x = rng.standard_normal((M, n))
    while True:
        x *= np.sqrt(n * gamma) / np.linalg.norm(x, axis=1, keepdims=True)
        _, first = np.unique(x, axis=0, return_index=True)
        dup = np.setdiff1d(np.arange(M), first)
        if dup.size == 0:
            return x
        x[dup] = rng.standard_normal((dup.size, n))


def _sq_dists(y, codebook):
    diff = y[..., None, :] - codebook
    return np.einsum("...mk,...mk->...m", diff, diff)


def min_dist_decode(y, codebook):
    """Index of the nearest codeword (lowest index on ties).  ``y`` may hold a batch of rows."""
    y = np.asarray(y, dtype=float)
    codebook = np.asarray(codebook, dtype=float)
    if y.shape[-1] != codebook.shape[1]:
        raise ValueError(f"received length {y.shape[-1]} but codewords have length {codebook.shape[1]}")
    return np.argmin(_sq_dists(y, codebook), axis=-1)


def _iid_state(n, lam, rng, count):
    if lam == 0:
        return np.zeros((count, n))
    var = 0.99 * lam
    s = rng.normal(0.0, np.sqrt(var), (count, n))
    bad = np.einsum("ij,ij->i", s, s) > n * lam
    while bad.any():
        s[bad] = rng.normal(0.0, np.sqrt(var), (int(bad.sum()), n))
        bad = np.einsum("ij,ij->i", s, s) > n * lam
    return s


def _rescale(x, n, gamma, lam):
    if lam >= gamma:
        return x.copy()
    return x * np.sqrt(n * lam) / np.linalg.norm(x, axis=-1, keepdims=True)


def make_state(strategy, codebook, lam, rng, gamma=None):
    """One jammer state with ``|s|^2 <= n lam``.

    ``iid``: i.i.d. ``N(0, 0.99 lam)`` entries, redrawn while over budget.
    ``mimic``: a uniformly chosen codeword, shrunk to norm
    ``sqrt(n min(gamma, lam))``; ``gamma`` defaults to the codeword power.
    """
    strategy = Strategy.parse(strategy)
    codebook = np.asarray(codebook, dtype=float)
    M, n = codebook.shape
    if strategy is Strategy.IID_GAUSSIAN:
        return _iid_state(n, lam, rng, 1)[0]
    x = codebook[rng.integers(M)]
    if gamma is None:
        gamma = float(x @ x) / n
    return _rescale(x, n, gamma, lam)


def _explicit_block(cfg, codebook, rng, count):
    n, M = cfg.n, codebook.shape[0]
    msg = rng.integers(M, size=count)
    if cfg.strategy is Strategy.IID_GAUSSIAN:
        s = _iid_state(n, cfg.lam, rng, count)
    else:
        s = _rescale(codebook[rng.integers(M, size=count)], n, cfg.gamma, cfg.lam)
    z = rng.normal(0.0, np.sqrt(cfg.sigma2), (count, n))
    y = codebook[msg] + s + z
    return int(np.sum(min_dist_decode(y, codebook) != msg))


def _log_beats(y, d2, n, gamma):
    """Log probability that a fresh codeword is strictly closer to ``y`` than distance ``sqrt(d2)``."""
    ny = np.sqrt(np.einsum("ij,ij->i", y, y))
    r = np.sqrt(n * gamma)
    a = (ny ** 2 + r * r - d2) / (2 * ny * r)
    a = np.clip(a, -1.0, 1.0)
    # cos^2 of a uniform direction is Beta(1/2, (n - 1)/2)
    tail = np.log(0.5) + beta_dist.logsf(a * a, 0.5, (n - 1) / 2)
    return np.where(a >= 0, tail, np.log1p(-np.exp(tail)))


def _ensemble_block(cfg, rng, count):
    n, g = cfg.n, cfg.gamma
    r = np.sqrt(n * g)
    x = rng.standard_normal((count, n))
    x *= r / np.linalg.norm(x, axis=1, keepdims=True)
    z = rng.normal(0.0, np.sqrt(cfg.sigma2), (count, n))
    others = cfg.M - 1
    if cfg.strategy is Strategy.IID_GAUSSIAN:
        y = x + _iid_state(n, cfg.lam, rng, count) + z
        lost = np.zeros(count, bool)
    else:
        mimic = rng.standard_normal((count, n))
        mimic *= r / np.linalg.norm(mimic, axis=1, keepdims=True)
        y = x + _rescale(mimic, n, g, cfg.lam) + z
        d_sent = np.einsum("ij,ij->i", y - x, y - x)
        lost = np.einsum("ij,ij->i", y - mimic, y - mimic) < d_sent
        others -= 1
    d2 = np.einsum("ij,ij->i", y - x, y - x)
    lp = _log_beats(y, d2, n, g)
    # P(at least one of `others` codewords wins) = 1 - (1 - p)^others
    with np.errstate(divide="ignore"):
        log_keep = others * np.log1p(-np.exp(lp)) if others else np.zeros(count)
    p_err = -np.expm1(log_keep)
    u = rng.random(count)
    return int(np.sum(lost | (u < p_err)))


def simulate(config: SimConfig, block=BLOCK):
    """Run ``config.trials`` transmissions and report the block error rate.

    Returns
    -------
    SimReport
        Error rate with a 95% normal-approximation half-width.
    """
    cfg = config
    explicit = cfg.M <= EXPLICIT_MAX
    codebook = gen_codebook(cfg.n, cfg.M, cfg.gamma, stream(cfg.seed, "codebook")) if explicit else None
    errors = 0
    for k, start in enumerate(range(0, cfg.trials, block)):
        count = min(block, cfg.trials - start)
        rng = stream(cfg.seed, "trials", k)
        if explicit:
            errors += _explicit_block(cfg, codebook, rng, count)
        else:
            errors += _ensemble_block(cfg, rng, count)
    p = errors / cfg.trials
    hw = Z95 * math.sqrt(p * (1 - p) / cfg.trials)
    meta = {"log2_M": cfg.log2_M, "block": block,
            "capacity_bits": 0.5 * math.log2(1 + cfg.gamma / (cfg.sigma2 + cfg.lam))
            if cfg.sigma2 + cfg.lam > 0 else math.inf}
    return SimReport(p, hw, errors, cfg.trials, "explicit" if explicit else "ensemble", cfg, meta)
