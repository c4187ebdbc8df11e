import numpy as np
import pytest

from avcap._rng import stream
from avcap.jamming_sim import (
    EXPLICIT_MAX, SimConfig, Strategy, gen_codebook, make_state, min_dist_decode, simulate,
)


def mimic(n=64, M=16, gamma=1.0, lam=1.0, sigma2=0.1, trials=2000, seed=3):
    return SimConfig.from_codebook_size(n, M, gamma=gamma, lam=lam, sigma2=sigma2,
                                        strategy="mimic", trials=trials, seed=seed)


def test_codebook_on_sphere_and_distinct():
    rng = np.random.default_rng(0)
    cb = gen_codebook(32, 200, 2.5, rng)
    assert np.allclose(np.sum(cb ** 2, axis=1), 32 * 2.5, atol=1e-9)
    assert np.unique(cb, axis=0).shape[0] == 200


def test_codebook_one_dimension():
    cb = gen_codebook(1, 2, 3.0, np.random.default_rng(1))
    assert np.allclose(np.abs(cb), np.sqrt(3.0))
    with pytest.raises(ValueError):
        gen_codebook(1, 3, 3.0, np.random.default_rng(1))
    with pytest.raises(ValueError):
        gen_codebook(4, 1, 3.0, np.random.default_rng(1))


def test_codebook_nearly_orthogonal():
    n, g = 512, 1.0
    cb = gen_codebook(n, 64, g, np.random.default_rng(2))
    gram = cb @ cb.T / (n * g)
    off = np.abs(gram[np.triu_indices(64, 1)])
    assert off.mean() < 0.2 and off.max() < 0.3


def test_decode_exact_tie_and_noise():
    cb = gen_codebook(16, 8, 1.0, np.random.default_rng(3))
    assert min_dist_decode(cb[3], cb) == 3
    tie = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 5.0]])
    assert min_dist_decode(np.zeros(2), tie) == 0
    d = np.sqrt(((cb[:, None] - cb[None]) ** 2).sum(-1))
    gap = d[np.triu_indices(8, 1)].min()
    z = np.random.default_rng(4).normal(size=16)
    z *= 0.4 * gap / np.linalg.norm(z)
    assert min_dist_decode(cb[5] + z, cb) == 5
    assert np.array_equal(min_dist_decode(cb + 0.0, cb), np.arange(8))
    with pytest.raises(ValueError):
        min_dist_decode(np.zeros(3), cb)


def test_states():
    n, g = 64, 1.0
    cb = gen_codebook(n, 16, g, np.random.default_rng(5))
    rng = np.random.default_rng(6)
    same = make_state(Strategy.CODEWORD_MIMIC, cb, g, rng, g)
    assert np.any(np.all(cb == same, axis=1))
    big = make_state("mimic", cb, 2.0, rng, g)
    assert big @ big == pytest.approx(n * g)
    small = make_state("mimic", cb, 0.3, rng, g)
    assert small @ small == pytest.approx(n * 0.3)
    for lam in (0.0, 0.01, 1.0, 4.0):
        for _ in range(50):
            s = make_state("iid", cb, lam, rng)
            assert s @ s <= n * lam
    # a single-coordinate block trips the budget often and must resample
    cb1 = gen_codebook(1, 2, 1.0, rng)
    assert all(make_state("iid", cb1, 0.5, rng) ** 2 <= 0.5 for _ in range(200))


def test_strategy_aliases():
    assert Strategy.parse("CodewordMimic") is Strategy.CODEWORD_MIMIC
    assert Strategy.parse("IidGaussian") is Strategy.IID_GAUSSIAN
    with pytest.raises(ValueError):
        Strategy.parse("sweep")


def test_config_validation():
    kw = dict(gamma=1.0, lam=1.0, sigma2=0.1, strategy="iid", trials=10)
    with pytest.raises(ValueError):
        SimConfig(n=4, rate=0.1, **kw)  # 2^0.4 rounds to 1
    with pytest.raises(ValueError):
        SimConfig(n=0, rate=1.0, **kw)
    with pytest.raises(ValueError):
        SimConfig(n=4, rate=1.0, **{**kw, "trials": 0})
    c = SimConfig(n=256, rate=0.015625, **kw)
    assert c.M == 16 and c.log2_M == pytest.approx(4)
    assert SimConfig(n=512, rate=0.3, **kw).M > EXPLICIT_MAX


def test_single_trial():
    rep = simulate(mimic(trials=1))
    assert rep.error_rate in (0.0, 1.0) and rep.half_width == 0.0


def test_reproducible():
    a, b = simulate(mimic(trials=2500)), simulate(mimic(trials=2500))
    assert a == b and a.to_dict() == b.to_dict()
    assert simulate(mimic(trials=2500, seed=4)).errors != a.errors
    big = SimConfig(n=512, rate=0.3, gamma=2.0, lam=0.5, sigma2=0.5, strategy="iid", trials=300, seed=1)
    assert simulate(big) == simulate(big)
    # block k always draws from the same stream
    assert stream(7, "trials", 2).random() == stream(7, "trials", 2).random()


def test_low_noise_mimic_reaches_confusion_limit():
    M = 16
    rep = simulate(mimic(n=256, M=M, sigma2=1e-4, trials=4000, seed=1))
    assert abs(rep.error_rate - 0.5 * (1 - 1 / M)) < 0.05


def test_mimic_monotone_in_budget_gap():
    rates = [simulate(mimic(lam=lam)).error_rate for lam in (1.5, 1.0, 0.8, 0.6, 0.4, 0.0)]
    inversions = sum(b > a for a, b in zip(rates, rates[1:]))
    assert inversions <= 1
    assert rates[0] > 0.4 and rates[-1] < 0.01


def test_ensemble_matches_explicit_on_average(monkeypatch):
    # ensemble mode averages over codebooks; compare with explicit runs over several codebooks
    kw = dict(gamma=1.0, lam=0.3, sigma2=0.8, strategy="iid", trials=4000)
    n, M = 24, 64
    explicit = np.mean([simulate(SimConfig.from_codebook_size(n, M, seed=s, **kw)).error_rate
                        for s in range(6)])
    monkeypatch.setattr("avcap.jamming_sim.EXPLICIT_MAX", 1)
    ens = simulate(SimConfig.from_codebook_size(n, M, seed=0, **{**kw, "trials": 24000}))
    assert ens.mode == "ensemble"
    assert abs(ens.error_rate - explicit) < 0.02


def test_report_fields():
    rep = simulate(mimic(trials=500))
    assert rep.mode == "explicit" and 0 <= rep.error_rate <= 1
    p = rep.error_rate
    assert rep.half_width == pytest.approx(1.96 * np.sqrt(p * (1 - p) / 500))
    d = rep.to_dict()
    assert d["config"]["strategy"] == "mimic" and d["metadata"]["log2_M"] == pytest.approx(4)
