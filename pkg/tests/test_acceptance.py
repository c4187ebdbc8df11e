"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` or directly with
``python tests/test_acceptance.py``; the lines are printed in the
terminal summary either way.
"""

import math
import sys
import time
import timeit

import numpy as np
import pytest

from avcap.channel_model import Constraints, ParallelGaussianSpec, SpectralSpec, ar1_autocorr
from avcap.discrete_avc import (
    bsc_example, bsc_spec, find_symmetrizer, min_symm_cost, per_parameter_decomposition,
    random_capacity_fixed_params, symm_threshold, symmetrization_residual,
)
from avcap.jamming_sim import SimConfig, simulate
from avcap.spectral import colored_capacity, szego_convergence, toeplitz_capacity
from avcap.waterfill import (
    closed_form_capacity, deterministic_code_capacity_product, double_waterfill,
    random_code_capacity_product, saddle_check, verify_kkt,
)
from conftest import ACCEPTANCE_LINES
from fixtures import binary_fixtures


def record(k, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def h2(x):
    return 0.0 if x in (0.0, 1.0) else -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def random_product_specs(count=200, seed=2024):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        d = int(rng.integers(1, 17))
        yield ParallelGaussianSpec(rng.uniform(0.1, 10, d),
                                   Constraints(rng.uniform(0.1, 30), rng.uniform(0.0, 30)))


def test_criterion_01_fig1():
    spec = ParallelGaussianSpec(np.array([5, 8, 3, 1.5, 2.5, 1.8, 3.2, 9, 4.5, 5.5]), Constraints(13, 8))
    a = double_waterfill(spec)
    N_ref = np.array([0, 0, 1, 2.5, 1.5, 2.2, 0.8, 0, 0, 0])
    P_ref = np.maximum(a.alpha - np.maximum(a.beta, spec.sigma2), 0)
    err = max(abs(a.beta - 4), abs(a.alpha - 6), np.abs(a.N_star - N_ref).max(),
              np.abs(a.P_star - P_ref).max())
    secs = min(timeit.repeat(lambda: double_waterfill(spec), number=100, repeat=5)) / 100
    ok = err <= 1e-9 and abs(a.P_star.sum() - 13) <= 1e-9 and secs < 1e-3
    record(1, ok, f"beta={a.beta:.12g} alpha={a.alpha:.12g} max err {err:.1e}, {secs * 1e6:.0f} us per call")


def test_criterion_02_scalar():
    rng = np.random.default_rng(1)
    worst, det_ok = 0.0, True
    for _ in range(1000):
        g, lam, s2 = rng.uniform(0.01, 20), rng.uniform(0, 20), rng.uniform(0.01, 20)
        if rng.random() < 0.05:
            lam = g  # hit the boundary on purpose
        spec = ParallelGaussianSpec(np.array([s2]), Constraints(g, lam))
        ref = 0.5 * math.log2(1 + g / (s2 + lam))
        worst = max(worst, abs(random_code_capacity_product(spec) - ref))
        det = deterministic_code_capacity_product(spec)
        det_ok &= (det == 0) == (lam >= g)
    record(2, worst <= 1e-12 and det_ok, f"max |C - formula| = {worst:.1e}, zero iff lam >= gamma: {det_ok}")


def test_criterion_03_kkt_and_saddle():
    t0 = time.perf_counter()
    kkt_fail, user_gain, jam_gain = 0, -math.inf, -math.inf
    for i, spec in enumerate(random_product_specs()):
        a = double_waterfill(spec)
        rep = verify_kkt(spec, a, tol=1e-8)
        theta = (a.alpha - a.beta) / (a.alpha * a.beta)
        kkt_fail += (not rep.passed) or not math.isclose(rep.theta, theta, rel_tol=1e-12)
        s = saddle_check(spec, a, trials=10_000, seed=i)
        user_gain, jam_gain = max(user_gain, s.max_user_gain), max(jam_gain, s.max_jammer_gain)
    secs = time.perf_counter() - t0
    ok = kkt_fail == 0 and user_gain <= 1e-7 and jam_gain <= 1e-7 and secs < 30
    record(3, ok, f"KKT failures {kkt_fail}/200, best deviation gains user {user_gain:.1e} "
                  f"jammer {jam_gain:.1e}, {secs:.1f} s")


def test_criterion_04_level_identity():
    worst = max(abs(random_code_capacity_product(s) - closed_form_capacity(s)) for s in random_product_specs())
    record(4, worst <= 1e-9, f"max |allocation form - level form| = {worst:.1e} over 200 specs")


def test_criterion_05_flat_colored():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(50):
        s2, g, lam = rng.uniform(0.05, 10), rng.uniform(0.01, 10), rng.uniform(0, 10)
        spec = SpectralSpec(Constraints(g, lam), psd_grid=np.full(128, s2))
        worst = max(worst, abs(colored_capacity(spec, 4096)[0] - 0.5 * math.log2(1 + g / (s2 + lam))))
    record(5, worst <= 1e-6, f"max |colored - scalar| = {worst:.1e} over 50 flat densities")


def test_criterion_06_szego():
    t0 = time.perf_counter()
    tab = szego_convergence(ar1_autocorr(0.5), 2.0, 0.5, [64, 1024])
    secs = time.perf_counter() - t0
    g64, g1024 = tab.gap
    flat = 0.0
    for n in list(range(1, 33)) + [64, 128, 256]:
        flat = max(flat, abs(toeplitz_capacity([1.5], n, 2.0, 0.5) - 0.5 * math.log2(1 + 2 / 2.0)))
    ok = g1024 < 1e-2 and g1024 < g64 and flat <= 1e-9 and secs < 60
    record(6, ok, f"AR(1) gap n=64 {g64:.3e}, n=1024 {g1024:.3e}; flat max gap {flat:.1e}; {secs:.1f} s")


def test_criterion_07_symmetrizability_lp():
    W = bsc_spec([0.2], [1.0], 0.5, 0.5).W[0]
    rng = np.random.default_rng(7)
    l = np.array([0.0, 1.0])
    worst, resid = 0.0, 0.0
    for p1 in rng.uniform(0, 1, 200):
        p = np.array([1 - p1, p1])
        kern = find_symmetrizer(W, p, l)
        worst = max(worst, abs(kern.cost - p.min()))
        resid = max(resid, kern.residual, symmetrization_residual(W, kern.J))
    ident = np.zeros((2, 2, 2))
    ident[0, :, 0] = ident[1, :, 1] = 1
    refused = find_symmetrizer(ident) is None and math.isinf(min_symm_cost(ident, [0.5, 0.5], l))
    ok = worst <= 1e-8 and resid <= 1e-8 and refused
    record(7, ok, f"max |cost - min p| = {worst:.1e}, max residual {resid:.1e}, identity refused: {refused}")


def test_criterion_08_example1():
    rep = bsc_example(0.25, 5 / 12, 5 / 16, 0.25)
    a, b = 5 / 16, 7 / 16
    closed = h2(a * (1 - b) + (1 - a) * b) - h2(b)
    L = symm_threshold(bsc_spec([0.25, 5 / 12], [0.5, 0.5], 5 / 16, 0.25)).value
    ok = (abs(L - 5 / 16) <= 1e-6 and abs(rep.threshold - 5 / 16) <= 1e-6
          and abs(rep.C_joint - closed) <= 1e-9 and rep.C_split < rep.C_joint and rep.superadditive)
    record(8, ok, f"L* = {L:.9f}, joint {rep.C_joint:.10f} vs closed form {closed:.10f}, "
                  f"split {rep.C_split:.10f}, superadditive {rep.superadditive}")


@pytest.mark.parametrize("name,spec", binary_fixtures(), ids=lambda v: v if isinstance(v, str) else "")
def test_criterion_09_oracle_agreement(name, spec):
    t0 = time.perf_counter()
    res = random_capacity_fixed_params(spec, oracle_grid=100)
    dec = per_parameter_decomposition(spec)
    secs = time.perf_counter() - t0
    off = abs(res.value - res.oracle_value)
    ok = off <= res.oracle_slack and abs(dec.value - res.value) <= 2e-3 and secs < 120
    record(9, ok, f"[{name}] |solver - grid| {off:.1e} <= slack {res.oracle_slack:.1e}, "
                  f"|decomposition - solver| {abs(dec.value - res.value):.1e}, {secs:.1f} s")


def test_criterion_10_simulation():
    t0 = time.perf_counter()
    conv = SimConfig.from_codebook_size(256, 16, gamma=1.0, lam=1.0, sigma2=0.1,
                                        strategy="mimic", trials=20000, seed=7)
    ach = SimConfig(n=512, rate=0.3, gamma=2.0, lam=0.5, sigma2=0.5, strategy="iid", trials=5000, seed=7)
    r1, r2 = simulate(conv), simulate(ach)
    same = simulate(conv) == r1 and simulate(ach) == r2
    secs = time.perf_counter() - t0
    ok = r1.error_rate >= 0.20 and r2.error_rate <= 0.05 and same and secs < 120
    record(10, ok, f"mimic error {r1.error_rate:.4f} (>= 0.20), iid error {r2.error_rate:.4f} "
                   f"(<= 0.05, {r2.mode}), reproducible {same}, {secs:.1f} s")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
