"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; ``conftest.py`` prints them at the end
of the run.  ``python tests/test_acceptance.py`` runs them all standalone.
"""
import time
from pathlib import Path

import numpy as np
import pytest

from discreg.config import load_config
from discreg.estimation import (dirichlet_posterior_mean, mle_estimate, prior_mean, prior_weight,
                                weighted_average_regularize)
from discreg.experiments import curve, run_replicates, run_theorem_check, summarize
from discreg.mdp import Mdp, policies_equivalent, value_iteration
from discreg.model_free import QLearnConfig, q_learning_baseline, q_learning_regularized
from discreg.environments import make_river_swim
from discreg.regularizers import (RegularizerSpec, discount_to_eps, eps_greedy_mse,
                                  eps_greedy_regularize, eps_star_eps_greedy, eps_star_uniform,
                                  eps_to_discount, mse_uniform)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(RESULTS[n])
    assert ok, RESULTS[n]


def pooled_z(m1, se1, m2, se2):
    """(m1 - m2) in units of the pooled standard error."""
    se = np.sqrt(se1**2 + se2**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(se > 0, (m1 - m2) / np.where(se > 0, se, 1), np.sign(m1 - m2) * np.inf)


@pytest.mark.acceptance
def test_criterion_1_theorem():
    t0 = time.perf_counter()
    trials = run_theorem_check(550, seed=0)
    elapsed = time.perf_counter() - t0
    positive = [t for t in trials if t.eps > 0]
    kinds = {t.reg_kind for t in positive}
    n_pass = sum(t.passed for t in trials)
    ok = (len(positive) >= 500 and n_pass == len(trials) and elapsed < 60
          and kinds == {"zeros", "uniform", "random"}
          and max(t.mdp.n_states for t in trials) <= 10 and max(t.mdp.n_actions for t in trials) <= 3)
    record(1, ok, f"{n_pass}/{len(trials)} equivalent ({len(positive)} with eps in (0,1]), {elapsed:.1f}s")


@pytest.mark.acceptance
def test_criterion_2_implied_prior_curves():
    (cfg,) = load_config(CONFIGS / "implied_prior.ini")
    assert cfg.n_datasets == 200 and cfg.dataset.sampling_mode == "equal_per_sa"
    t0 = time.perf_counter()
    reps = run_replicates(cfg, keep_plans=True)
    elapsed = time.perf_counter() - t0
    mismatched = 0
    for rep in reps:
        for eps in cfg.eps_grid:
            a = rep.plans["discount_reg", float(eps)]
            b = rep.plans["implied_prior", float(eps)]
            mismatched += not policies_equivalent(a.q, a.policy, b.q, b.policy)
    records = [r for rep in reps for r in rep.records]
    _, m_dr, _ = curve(records, "discount_reg")
    _, m_ip, _ = curve(records, "implied_prior")
    gap = float(np.max(np.abs(m_dr - m_ip)))
    ok = mismatched == 0 and gap <= 1e-12 and elapsed < 300
    record(2, ok, f"{mismatched} policy mismatches over {len(reps)}x{len(cfg.eps_grid)}, "
                  f"max curve gap {gap:.1e}, {elapsed:.1f}s")


@pytest.mark.acceptance
def test_criterion_3_mse_monte_carlo():
    rng = np.random.default_rng(2024)
    worst = 0.0
    n_draws = 200_000
    for _ in range(25):
        n = int(rng.integers(2, 11))
        t = rng.dirichlet(np.full(n, rng.choice([0.3, 1.0, 3.0])))
        c = int(rng.integers(1, 60))
        eps = float(rng.uniform())
        draws = rng.multinomial(c, t, size=n_draws) / c
        est = (1 - eps) * draws + eps / n
        err = np.sum((est - t) ** 2, axis=1)
        se = err.std(ddof=1) / np.sqrt(n_draws)
        worst = max(worst, abs(float(mse_uniform(t, c, eps)) - err.mean()) / se)
    record(3, worst < 3, f"25 triples, worst deviation {worst:.2f} Monte Carlo SE (limit 3)")


@pytest.mark.acceptance
def test_criterion_4_eps_star_optimal():
    rng = np.random.default_rng(7)
    grid = np.arange(1001) / 1000
    worst = 0.0
    for _ in range(25):
        n = int(rng.integers(2, 11))
        t = rng.dirichlet(np.full(n, rng.choice([0.3, 1.0, 3.0])))
        c = int(rng.integers(1, 100))
        best = grid[np.argmin(mse_uniform(t, c, grid))]
        worst = max(worst, abs(float(eps_star_uniform(t[None], np.array([c]))[0]) - best))
    det = eps_star_uniform(np.array([[0.0, 0.0, 1.0, 0.0]]), np.array([12]))[0]
    uni = eps_star_uniform(np.full((1, 4), 0.25), np.array([12]))[0]
    ok = worst <= 0.002 and det == 0.0 and uni == 1.0
    record(4, ok, f"25 rows, worst |eps* - grid argmin| {worst:.4f}; deterministic {det}, uniform {uni}")


@pytest.fixture(scope="module")
def benchmark_results():
    t0 = time.perf_counter()
    out = {}
    for cfg in load_config(CONFIGS / "benchmark.ini"):
        mle = RegularizerSpec("sa_specific", label="sa_specific_mle")
        out[cfg.env_label] = [r for rep in run_replicates(cfg, cfg.methods + [mle]) for r in rep.records]
    return out, time.perf_counter() - t0


@pytest.mark.acceptance
def test_criterion_5_benchmark(benchmark_results):
    results, elapsed = benchmark_results
    lines, ok = [], elapsed < 900
    for env, recs in results.items():
        eps, m_dr, se_dr = curve(recs, "discount_reg")
        _, m_up, se_up = curve(recs, "uniform_prior")
        z = pooled_z(m_up, se_up, m_dr, se_dr)[1:]
        a_ok = bool(np.all(z < 2) and np.any(z < -2))
        rows = {r.method: r for r in summarize(recs) if r.param_name == "eps_star_mean"}
        i = int(np.argmin(m_dr))
        zb = float(pooled_z(rows["sa_specific"].mean, rows["sa_specific"].se, m_dr[i], se_dr[i]))
        zb_mle = float(pooled_z(rows["sa_specific_mle"].mean, rows["sa_specific_mle"].se, m_dr[i], se_dr[i]))
        b_ok = zb <= 2
        ok &= a_ok and b_ok
        lines.append(f"{env}: (a) {'ok' if a_ok else 'no'} z in [{z.min():.1f}, {z.max():.1f}]; "
                     f"(b) {'ok' if b_ok else 'no'} z={zb:.2f} [mle plug-in z={zb_mle:.2f}]")
    record(5, ok, "; ".join(lines) + f"; {elapsed:.0f}s")


@pytest.mark.acceptance
def test_criterion_6_expert_prior():
    (cfg,) = load_config(CONFIGS / "expert_prior.ini")
    recs = [r for rep in run_replicates(cfg) for r in rep.records]
    eps, m_u, se_u = curve(recs, "uniform_prior")
    _, m_lr, se_lr = curve(recs, "left_right_prior")
    z = pooled_z(m_lr, se_lr, m_u, se_u)
    interior = (eps > 0) & (eps < 1)
    ok = bool(np.all(z <= 2) and np.any(m_lr[interior] < m_u[interior]))
    record(6, ok, f"max z {z.max():.2f}; lower at {int(np.sum(m_lr[interior] < m_u[interior]))}"
                  f"/{int(interior.sum())} interior eps")


@pytest.mark.acceptance
def test_criterion_7_identities():
    rng = np.random.default_rng(11)
    worst_post = 0.0
    for _ in range(1000):
        n, a = int(rng.integers(1, 8)), int(rng.integers(1, 4))
        c = rng.integers(0, 30, size=(n, a, n))
        alpha = rng.gamma(1.0, 1.0, size=(n, a, n)) + 1e-3
        t, empty = mle_estimate(c)
        avg = weighted_average_regularize(t, prior_mean(alpha), prior_weight(c, alpha), empty)
        worst_post = max(worst_post, float(np.max(np.abs(dirichlet_posterior_mean(c, alpha) - avg))))
    worst_rt = worst_zero = 0.0
    for _ in range(1000):
        gamma = float(rng.uniform(0.01, 0.999))
        gamma_p = gamma * float(rng.uniform())
        eps = discount_to_eps(gamma, gamma_p)
        worst_rt = max(worst_rt, abs(discount_to_eps(gamma, eps_to_discount(gamma, eps)) - eps))
        # discounting == averaging with the zeros matrix at full discount
        t = rng.dirichlet(np.ones(4), size=(4, 2))
        zero_avg = weighted_average_regularize(t, np.zeros(4), eps)
        worst_zero = max(worst_zero, float(np.max(np.abs(gamma_p * t - gamma * zero_avg))))
    ok = max(worst_post, worst_rt, worst_zero) <= 1e-12
    record(7, ok, f"posterior-mean gap {worst_post:.1e}, round trip {worst_rt:.1e}, "
                  f"zeros-average gap {worst_zero:.1e}")


@pytest.mark.acceptance
def test_criterion_8_eps_greedy():
    rng = np.random.default_rng(5)
    grid = np.arange(1001) / 1000
    worst = 0.0
    for _ in range(25):
        n = int(rng.integers(2, 9))
        t = rng.dirichlet(np.ones(n), size=(1, 2))
        c = rng.integers(1, 40, size=(1, 2))
        e = eps_star_eps_greedy(t, c)
        for k in range(2):
            best = grid[np.argmin(eps_greedy_mse(t[0], c[0], grid, k))]
            worst = max(worst, abs(e[0, k] - best))
    t = rng.dirichlet(np.ones(5), size=(5, 3))
    lim0 = np.array_equal(eps_greedy_regularize(t, 0.0), t)
    mean = t.mean(axis=1, keepdims=True)
    lim1 = np.array_equal(eps_greedy_regularize(t, 1.0), np.broadcast_to(mean, t.shape))
    ok = worst <= 0.002 and lim0 and lim1
    record(8, ok, f"25 states, worst |eps* - grid argmin| {worst:.4f}; eps=0 identity {lim0}, "
                  f"eps=1 action mean {lim1}")


@pytest.mark.acceptance
def test_criterion_9_q_learning():
    t = np.zeros((2, 2, 2))
    t[0, 0, 0] = t[0, 1, 1] = t[1, 0, 0] = t[1, 1, 1] = 1.0
    env = Mdp(np.array([[0.0, 0.0], [0.0, 1.0]]), t, 0.9)
    oracle = value_iteration(env)
    res = q_learning_regularized(env, QLearnConfig(episodes=400, steps_per_episode=50,
                                                   behavior_exploration=1.0, seed=0))
    err = float(np.max(np.abs(res.q - oracle.q)))
    same_policy = bool(np.array_equal(res.policy, oracle.policy))

    rs = make_river_swim()
    cfg = dict(episodes=30, steps_per_episode=100, seed=12, record=True)
    reg = q_learning_regularized(rs, QLearnConfig(initial_counts=rs.transitions * 1e12, **cfg))
    std = q_learning_baseline(rs, QLearnConfig(**cfg))
    bitwise = reg.log == std.log and np.array_equal(reg.q, std.q)
    ok = same_policy and err < 0.05 and bitwise
    record(9, ok, f"policy match {same_policy}, max |Q - Q*| {err:.2e}; huge counts bit-identical {bitwise}")


def test_criterion_10_out_of_scope():
    RESULTS[10] = "CRITERION 10: N/A - external cancer simulator, out of scope"
    print(RESULTS[10])


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
