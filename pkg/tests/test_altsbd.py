import math

import numpy as np
import pytest
from scipy import stats

import relikit.altsbd as altsbd
from relikit.altsbd import (AltCampaignState, AltParams, AltPriors,
                            AltTestDatum, MaterialTestConfig, UseProfile,
                            alt_loglik, exhaustive_c_optimal, fim,
                            fit_alt_ml, local_c_optimal, log_quantile,
                            mu_model, mu_partials, posterior_sample,
                            propose_next, record_result, run_campaign_sim,
                            sbd_objective, weighted_avar)
from relikit.distcore import StdKind
from relikit.mtrp import gelman_rubin

CFG = MaterialTestConfig(sigma_ult=1339.67)
TH0 = AltParams(0.0157, 0.3188, 0.7259)
PROFILE = UseProfile((0.1,), (1.0,))


def oracle_mu(q, A, B, cfg):
    """Independent scripted evaluation of the stress-life location."""
    psi = 1.0 / cfg.R if cfg.R >= 1 else cfg.R
    g = 1.6 - psi * abs(math.sin(cfg.alpha_angle))
    x = q * cfg.sigma_ult
    bracket = ((B / A) * cfg.freq ** B * (cfg.sigma_ult / x - 1.0)
               * (cfg.sigma_ult / x) ** (g - 1.0) * (1.0 - psi) ** (-g))
    return math.log(bracket + 1.0) / B


# ---------------------------------------------------------------------------
# stress-life model


def test_mu_at_ultimate_stress_is_zero():
    assert mu_model(1.0, TH0.A, TH0.B, CFG) == 0.0
    assert mu_model(0.999999, TH0.A, TH0.B, CFG) == pytest.approx(0.0, abs=1e-4)


def test_gamma_alpha_at_zero_angle():
    assert CFG.gamma_alpha() == pytest.approx(1.6, abs=1e-15)


def test_mu_matches_independent_oracle():
    for q in (0.35, 0.46, 0.52, 0.72, 0.75):
        assert mu_model(q, TH0.A, TH0.B, CFG) == pytest.approx(
            oracle_mu(q, TH0.A, TH0.B, CFG), rel=1e-12)


def test_mu_domain_error():
    with pytest.raises(ValueError):
        mu_model(0.0, TH0.A, TH0.B, CFG)
    with pytest.raises(ValueError):
        mu_model(-0.3, TH0.A, TH0.B, CFG)


def test_log_quantile_median_and_shift():
    u = 0.5
    mu = mu_model(u, TH0.A, TH0.B, CFG)
    assert log_quantile(0.5, u, TH0, CFG) == pytest.approx(mu, abs=1e-12)
    assert log_quantile(0.05, u, TH0, CFG) == pytest.approx(
        mu - 1.6448536269514722 * 0.7259, abs=1e-9)
    qs = [log_quantile(p, u, TH0, CFG) for p in (0.01, 0.1, 0.5, 0.9)]
    assert np.all(np.diff(qs) > 0)


# ---------------------------------------------------------------------------
# likelihood


def test_loglik_single_failure_hand():
    d = AltTestDatum(0.5, 1e4, 0)
    mu = oracle_mu(0.5, TH0.A, TH0.B, CFG)
    z = (math.log(1e4) - mu) / TH0.nu
    hand = (math.log(stats.norm.pdf(z)) - math.log(1e4) - math.log(TH0.nu))
    assert alt_loglik(TH0, [d], CFG) == pytest.approx(hand, abs=1e-10)


def test_loglik_all_censored_structure():
    data = [AltTestDatum(q, CFG.censor_cycles, 1) for q in (0.4, 0.6)]
    total = 0.0
    for d in data:
        z = (math.log(d.cycles) - oracle_mu(d.q, TH0.A, TH0.B, CFG)) / TH0.nu
        total += math.log(stats.norm.sf(z))
    assert alt_loglik(TH0, data, CFG) == pytest.approx(total, abs=1e-10)


def test_loglik_duplicate_doubles():
    d = AltTestDatum(0.5, 1e4, 0)
    one = alt_loglik(TH0, [d], CFG)
    two = alt_loglik(TH0, [d, d], CFG)
    assert two == pytest.approx(2 * one, abs=1e-12)


def test_datum_validation():
    with pytest.raises(ValueError):
        AltTestDatum(1.2, 100, 0)
    with pytest.raises(ValueError):
        AltTestDatum(0.5, -1, 0)
    with pytest.raises(ValueError):
        AltTestDatum(0.5, 100, 2)


def test_ml_fit_recovers_truth():
    rng = np.random.default_rng(0)
    data = []
    for q in np.tile([0.4, 0.55, 0.7], 60):
        mu = mu_model(q, TH0.A, TH0.B, CFG)
        t = math.exp(mu + TH0.nu * rng.standard_normal())
        c = int(t >= CFG.censor_cycles)
        data.append(AltTestDatum(q, min(t, CFG.censor_cycles), c))
    est = fit_alt_ml(data, CFG)
    assert est.A == pytest.approx(TH0.A, rel=0.5)
    assert est.B == pytest.approx(TH0.B, rel=0.3)
    assert est.nu == pytest.approx(TH0.nu, rel=0.2)


# ---------------------------------------------------------------------------
# information and avar


def test_fim_uncensored_normal_reduction():
    # with no effective censoring the (mu, nu) information is
    # diag(1/nu^2, 2/nu^2); fim maps it through the mu partials
    cfg = MaterialTestConfig(sigma_ult=1339.67, censor_cycles=1e30)
    q = 0.5
    I = fim(TH0, [q], cfg)
    dA, dB = mu_partials(q, TH0.A, TH0.B, cfg)
    G = np.array([[dA, dB, 0.0], [0.0, 0.0, 1.0]])
    I2 = np.diag([1.0 / TH0.nu**2, 2.0 / TH0.nu**2])
    assert np.allclose(I, G.T @ I2 @ G, rtol=1e-8, atol=1e-10)


def test_fim_additivity():
    I_joint = fim(TH0, [0.4, 0.4, 0.6], CFG)
    I_parts = fim(TH0, [0.4], CFG) * 2 + fim(TH0, [0.6], CFG)
    assert np.allclose(I_joint, I_parts, rtol=1e-12)


def test_fim_positive_semidefinite():
    I = fim(TH0, [0.4, 0.6, 0.75], CFG)
    assert np.all(np.linalg.eigvalsh(I) > -1e-10)
    assert np.allclose(I, I.T)


def test_fim_matches_mc_hessian():
    # per-unit expected information vs Monte-Carlo average of score
    # outer products from simulated censored data
    q, reps = 0.6, 4000
    rng = np.random.default_rng(1)
    mu = mu_model(q, TH0.A, TH0.B, CFG)
    eps = 1e-5
    base = np.array([TH0.A, TH0.B, TH0.nu])
    acc = np.zeros((3, 3))
    for _ in range(reps):
        t = math.exp(mu + TH0.nu * rng.standard_normal())
        c = int(t >= CFG.censor_cycles)
        d = [AltTestDatum(q, min(t, CFG.censor_cycles), c)]
        g = np.zeros(3)
        for j in range(3):
            hi, lo = base.copy(), base.copy()
            hi[j] += eps * base[j]
            lo[j] -= eps * base[j]
            g[j] = ((alt_loglik(AltParams(*hi), d, CFG)
                     - alt_loglik(AltParams(*lo), d, CFG))
                    / (2 * eps * base[j]))
        acc += np.outer(g, g)
    mc = acc / reps
    I = fim(TH0, [q], CFG)
    assert np.allclose(I, mc, rtol=0.1, atol=0.05 * np.max(np.abs(I)))


def test_mu_partials_match_central_differences():
    eps = 1e-7
    for q in (0.35, 0.5, 0.75):
        for A, B in [(0.0157, 0.3188), (0.0005, 0.7429), (0.08, 1.0)]:
            dA, dB = mu_partials(q, A, B, CFG)
            fdA = (mu_model(q, A + eps * A, B, CFG)
                   - mu_model(q, A - eps * A, B, CFG)) / (2 * eps * A)
            fdB = (mu_model(q, A, B + eps * B, CFG)
                   - mu_model(q, A, B - eps * B, CFG)) / (2 * eps * B)
            assert dA == pytest.approx(fdA, rel=1e-6)
            assert dB == pytest.approx(fdB, rel=1e-6)


def test_weighted_avar_single_level_reduction():
    design = [0.4, 0.6]
    v = weighted_avar(TH0, design, UseProfile((0.3,), (1.0,)), 0.05, CFG)
    I = fim(TH0, design, CFG)
    dA, dB = mu_partials(0.3, TH0.A, TH0.B, CFG)
    c = np.array([dA, dB, stats.norm.ppf(0.05)])
    assert v == pytest.approx(float(c @ np.linalg.inv(I) @ c), rel=1e-9)


def test_weighted_avar_scaling():
    design = [0.4, 0.6]
    v1 = weighted_avar(TH0, design, PROFILE, 0.05, CFG)
    v2 = weighted_avar(TH0, design * 2, PROFILE, 0.05, CFG)
    assert v2 == pytest.approx(v1 / 2, rel=1e-9)


# ---------------------------------------------------------------------------
# posterior


def test_posterior_matches_prior_without_data():
    rng = np.random.default_rng(2)
    draws = posterior_sample(AltPriors(), [], CFG, 4000, rng)
    # MCMC standard error inflated for autocorrelation
    assert abs(np.mean(draws[:, 0]) - 0.08) < 0.004
    assert abs(np.mean(draws[:, 1]) - 1.0) < 0.05
    assert np.std(draws[:, 0]) == pytest.approx(math.sqrt(0.0008), rel=0.2)


def test_posterior_concentrates_with_data():
    rng = np.random.default_rng(3)
    data = []
    for q in np.tile([0.4, 0.55, 0.7], 167):
        mu = mu_model(q, TH0.A, TH0.B, CFG)
        t = math.exp(mu + TH0.nu * rng.standard_normal())
        data.append(AltTestDatum(q, min(t, CFG.censor_cycles),
                                 int(t >= CFG.censor_cycles)))
    draws = posterior_sample(AltPriors(), data, CFG, 2000, rng)
    assert np.std(draws[:, 0]) < math.sqrt(0.0008) / 5


def test_posterior_gelman_rubin():
    data = [AltTestDatum(0.46, 3e5, 0), AltTestDatum(0.52, 1e5, 0),
            AltTestDatum(0.72, 5e3, 0)]
    c1 = posterior_sample(AltPriors(), data, CFG, 3000,
                          np.random.default_rng(4))
    c2 = posterior_sample(AltPriors(), data, CFG, 3000,
                          np.random.default_rng(5))
    R = gelman_rubin([c1, c2])
    assert np.all(R < 1.1)


# ---------------------------------------------------------------------------
# sequential design


def test_sbd_objective_single_draw_reduction():
    draws = np.array([[TH0.A, TH0.B, TH0.nu]])
    design = [0.46, 0.52]
    got = sbd_objective(0.6, draws, design, PROFILE, 0.05, CFG)
    want = weighted_avar(TH0, design + [0.6], PROFILE, 0.05, CFG)
    assert got == pytest.approx(want, rel=1e-12)


def test_sbd_objective_information_monotone():
    rng = np.random.default_rng(6)
    draws = posterior_sample(AltPriors(), [], CFG, 200, rng)[::20]
    design = [0.46, 0.52, 0.72]
    for q_new in CFG.grid:
        aug = sbd_objective(q_new, draws, design, PROFILE, 0.05, CFG)
        cur = np.mean([weighted_avar(AltParams(*d), design, PROFILE, 0.05,
                                     CFG) for d in draws])
        assert aug <= cur + 1e-12


def test_propose_singleton_grid():
    cfg = MaterialTestConfig(sigma_ult=1339.67, grid=(0.5,),
                             q_bounds=(0.35, 0.75))
    state = AltCampaignState(cfg, AltPriors(),
                             data=(AltTestDatum(0.5, 1e4, 0),))
    _, q_star, trace = propose_next(state, PROFILE, 0.05,
                                    np.random.default_rng(7), n_draws=100,
                                    n_eval=20)
    assert q_star == 0.5
    assert len(trace) == 1


def test_propose_tie_breaks_to_lowest(monkeypatch):
    monkeypatch.setattr(altsbd, "sbd_objective",
                        lambda *a, **k: 1.0)
    state = AltCampaignState(CFG, AltPriors(),
                             data=(AltTestDatum(0.5, 1e4, 0),))
    _, q_star, _ = propose_next(state, PROFILE, 0.05,
                                np.random.default_rng(8), n_draws=50,
                                n_eval=10)
    assert q_star == min(CFG.grid)


def test_record_result_versioning():
    state = AltCampaignState(CFG, AltPriors())
    for k in range(5):
        state = record_result(state, 0.5, 1e4 + k, 0)
        assert state.version == k + 1
    assert len(state.data) == 5
    state2 = record_result(state, 0.5, CFG.censor_cycles, 1)
    assert state2.data[-1].censored == 1
    with pytest.raises(ValueError):
        record_result(state2, 0.5, -1.0, 0)


def test_local_c_optimal_counts_and_singleton():
    alloc = local_c_optimal(TH0, CFG.grid, 1, PROFILE, 0.05, CFG)
    assert sum(alloc.values()) == 1
    alloc = local_c_optimal(TH0, CFG.grid, 5, PROFILE, 0.05, CFG)
    assert sum(alloc.values()) == 5


def test_greedy_matches_exhaustive_small():
    grid = (0.35, 0.55, 0.75)
    g = local_c_optimal(TH0, grid, 3, PROFILE, 0.05, CFG)
    e = exhaustive_c_optimal(TH0, grid, 3, PROFILE, 0.05, CFG)
    va = weighted_avar(TH0, [q for q, c in g.items() for _ in range(c)],
                       PROFILE, 0.05, CFG)
    vb = weighted_avar(TH0, [q for q, c in e.items() for _ in range(c)],
                       PROFILE, 0.05, CFG)
    assert vb <= va + 1e-12


def test_campaign_deterministic():
    hist = [AltTestDatum(0.46, 3e5, 0), AltTestDatum(0.52, 1e5, 0),
            AltTestDatum(0.72, 5e3, 0)]
    runs = []
    for _ in range(2):
        tr = run_campaign_sim(TH0, AltPriors(), CFG, 3,
                              np.random.default_rng(42), historical=hist,
                              profile=PROFILE, n_draws=150, n_eval=30)
        runs.append((tuple(tr.proposals),
                     tuple((d.q, d.cycles, d.censored) for d in tr.data)))
    assert runs[0] == runs[1]


def test_campaign_avar_decreases():
    hist = [AltTestDatum(0.46, 3e5, 0), AltTestDatum(0.52, 1e5, 0),
            AltTestDatum(0.72, 5e3, 0)]
    firsts, lasts = [], []
    for seed in range(3):
        tr = run_campaign_sim(TH0, AltPriors(), CFG, 6,
                              np.random.default_rng(seed), historical=hist,
                              profile=PROFILE, n_draws=200, n_eval=40)
        firsts.append(tr.avar_path[0])
        lasts.append(tr.avar_path[-1])
    assert np.mean(lasts) < np.mean(firsts)
