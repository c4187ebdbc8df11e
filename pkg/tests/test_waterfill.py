import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize

from avcap.channel_model import Constraints, ParallelGaussianSpec
from avcap.errors import DimensionMismatch
from avcap.units import log_base
from avcap.waterfill import (
    WaterfillAllocation, closed_form_capacity, deterministic_code_capacity_product,
    double_waterfill, gaussian_symm_cost, random_code_capacity_product, saddle_check,
    scalar_capacity, verify_kkt, water_level,
)

FIG1 = [5, 8, 3, 1.5, 2.5, 1.8, 3.2, 9, 4.5, 5.5]
noise = st.lists(st.floats(0.05, 20), min_size=1, max_size=16)
budget = st.floats(0.0, 30)


def test_fig1_levels_and_allocations():
    spec = ParallelGaussianSpec(FIG1, Constraints(13, 8))
    a = double_waterfill(spec)
    assert a.beta == pytest.approx(4, abs=1e-9)
    assert a.alpha == pytest.approx(6, abs=1e-9)
    assert np.allclose(a.N_star, [0, 0, 1, 2.5, 1.5, 2.2, 0.8, 0, 0, 0], atol=1e-9)
    assert np.allclose(a.P_star, [1, 0, 2, 2, 2, 2, 2, 0, 1.5, 0.5], atol=1e-9)


@given(st.lists(st.floats(-5, 20), min_size=1, max_size=20), st.floats(0, 50))
def test_water_level_conserves_volume(floor, volume):
    L = water_level(floor, volume)
    assert np.sum(np.maximum(L - np.array(floor), 0)) == pytest.approx(volume, abs=1e-9)


@given(st.lists(st.floats(0, 10), min_size=2, max_size=10), st.floats(0, 10), st.floats(0, 10))
def test_water_level_monotone(floor, v1, v2):
    lo, hi = sorted((v1, v2))
    assert water_level(floor, lo) <= water_level(floor, hi) + 1e-12


def test_water_level_weights_and_infinite_floors():
    L = water_level([1.0, np.inf, 2.0], 3.0, weights=[2.0, 1.0, 1.0])
    # 2 (L - 1) + (L - 2) = 3
    assert L == pytest.approx(7 / 3)
    assert water_level([2.0, 1.0], 0.0) == 1.0
    with pytest.raises(ValueError):
        water_level([1.0], -1.0)


@given(noise, budget, budget)
def test_allocation_structure(sigma2, g, lam):
    spec = ParallelGaussianSpec(sigma2, Constraints(g, lam))
    a = double_waterfill(spec)
    s = np.array(sigma2)
    assert a.N_star.sum() == pytest.approx(lam, abs=1e-9)
    assert a.P_star.sum() == pytest.approx(g, abs=1e-9)
    assert np.allclose(a.N_star, np.maximum(a.beta - s, 0), atol=1e-9)
    assert np.allclose(a.P_star, np.maximum(a.alpha - np.maximum(a.beta, s), 0), atol=1e-9)
    assert a.alpha >= a.beta - 1e-12


@given(noise, st.floats(0.01, 30), budget)
def test_two_capacity_forms_agree(sigma2, g, lam):
    spec = ParallelGaussianSpec(sigma2, Constraints(g, lam))
    assert closed_form_capacity(spec) == pytest.approx(random_code_capacity_product(spec), abs=1e-9)


@given(st.floats(0.01, 30), st.floats(0, 30), st.floats(0.01, 30))
def test_scalar_reduction(g, lam, s2):
    spec = ParallelGaussianSpec([s2], Constraints(g, lam))
    expect = 0.5 * math.log2(1 + g / (s2 + lam))
    assert random_code_capacity_product(spec) == pytest.approx(expect, abs=1e-12)
    rnd, det = scalar_capacity(g, lam, s2)
    assert rnd == pytest.approx(expect, abs=1e-12)
    assert (det == 0) == (lam >= g)


def test_deterministic_boundary_and_order():
    spec = ParallelGaussianSpec([1.0, 2.0], Constraints(1.5, 1.5))
    assert deterministic_code_capacity_product(spec) == 0.0
    spec = ParallelGaussianSpec([1.0, 2.0], Constraints(1.6, 1.5))
    assert deterministic_code_capacity_product(spec) == random_code_capacity_product(spec)


def test_no_jammer_is_classical_water_filling():
    spec = ParallelGaussianSpec([1.0, 2.0, 4.0], Constraints(3, 0))
    a = double_waterfill(spec)
    assert np.all(a.N_star == 0)
    assert np.allclose(a.P_star, [2, 1, 0])
    assert a.beta == 1.0


def test_nats_unit():
    spec = ParallelGaussianSpec([1.0], Constraints(2, 1))
    with log_base("e"):
        assert random_code_capacity_product(spec) == pytest.approx(0.5 * math.log(2))


@given(noise, st.floats(0.01, 30), st.floats(0.01, 30))
def test_kkt_multiplier(sigma2, g, lam):
    spec = ParallelGaussianSpec(sigma2, Constraints(g, lam))
    a = double_waterfill(spec)
    rep = verify_kkt(spec, a, tol=1e-8)
    assert rep.passed
    assert rep.theta == pytest.approx((a.alpha - a.beta) / (a.alpha * a.beta))


def test_kkt_detects_a_wrong_allocation():
    spec = ParallelGaussianSpec(FIG1, Constraints(13, 8))
    a = double_waterfill(spec)
    bad = WaterfillAllocation(a.beta, a.alpha, np.full(10, 0.8), a.P_star)
    assert not verify_kkt(spec, bad).passed
    with pytest.raises(DimensionMismatch):
        verify_kkt(spec, WaterfillAllocation(1, 2, np.zeros(3), np.zeros(3)))


def test_saddle_random_deviations():
    spec = ParallelGaussianSpec(FIG1, Constraints(13, 8))
    rep = saddle_check(spec, double_waterfill(spec), trials=5000, seed=1)
    assert rep.max_user_gain <= 1e-7 and rep.max_jammer_gain <= 1e-7
    assert rep == saddle_check(spec, double_waterfill(spec), trials=5000, seed=1)


def _best_response(objective, d, total):
    cons = [{"type": "eq", "fun": lambda x: x.sum() - total}]
    best = np.inf
    for x0 in (np.full(d, total / d), np.eye(d)[0] * total):
        r = minimize(objective, x0, bounds=[(0, None)] * d, constraints=cons, method="SLSQP",
                     options={"ftol": 1e-14, "maxiter": 500})
        best = min(best, r.fun)
    return best


@pytest.mark.parametrize("seed", range(5))
def test_saddle_against_numerical_best_responses(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 7))
    s = rng.uniform(0.2, 6, d)
    spec = ParallelGaussianSpec(s, Constraints(rng.uniform(1, 10), rng.uniform(0.5, 8)))
    a = double_waterfill(spec)
    val = np.sum(0.5 * np.log1p(a.P_star / (a.N_star + s)))
    user = -_best_response(lambda P: -np.sum(0.5 * np.log1p(P / (a.N_star + s))), d, spec.gamma)
    jam = _best_response(lambda N: np.sum(0.5 * np.log1p(a.P_star / (N + s))), d, spec.lam)
    assert user <= val + 1e-8
    assert jam >= val - 1e-8


def test_gaussian_symm_cost():
    assert gaussian_symm_cost([1.0, 2.5]) == 3.5
    with pytest.raises(ValueError):
        gaussian_symm_cost([-1.0])
