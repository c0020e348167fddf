"""Tabular Q-learning with state-action-specific simulated transitions.

At each step the learner computes ``eps*(s, a)`` from its running counts
(MLE plug-in, ``eps* = 1`` before the first visit).  With probability
``eps*`` it performs an update on a successor drawn from ``T_reg(s, a)``
without moving; otherwise it acts in the environment.  At most
``sim_cap`` simulated updates happen in a row.

Two generators are spawned from ``seed``: one drives the behavior policy
and the environment, the other the Bernoulli draws and simulated
successors.  With ``eps* = 0`` the real trajectory is therefore identical
to plain Q-learning under the same seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError
from .estimation import broadcast_reg, uniform_matrix
from .mdp import Mdp, greedy_policy
from .regularizers import eps_star_uniform


@dataclass
class QLearnConfig:
    step_size: float = 0.1
    behavior_exploration: float = 0.1
    episodes: int = 200
    steps_per_episode: int = 100
    t_reg: Optional[np.ndarray] = None
    sim_cap: int = 10
    seed: int = 0
    initial_counts: Optional[np.ndarray] = None
    record: bool = False

    def __post_init__(self):
        if not 0 < self.step_size <= 1:
            raise ParameterError("step_size must lie in (0, 1]")
        if not 0 <= self.behavior_exploration <= 1:
            raise ParameterError("behavior_exploration must lie in [0, 1]")
        if self.episodes < 0 or self.steps_per_episode < 0:
            raise ParameterError("episodes and steps_per_episode must be nonnegative")
        if self.sim_cap < 1:
            raise ParameterError("sim_cap must be at least 1")


@dataclass
class QLearnResult:
    q: np.ndarray
    episode_rewards: np.ndarray
    real_steps: int = 0
    simulated_updates: int = 0
    log: list = field(default_factory=list, repr=False)

    @property
    def policy(self):
        return greedy_policy(self.q)


def _draw(rng, row):
    i = int(np.searchsorted(np.cumsum(row), rng.random() * row.sum(), side="right"))
    return min(i, len(row) - 1)


def _run(env: Mdp, cfg: QLearnConfig, prob) -> QLearnResult:
    n, n_a = env.n_states, env.n_actions
    t_reg = broadcast_reg(uniform_matrix(n) if cfg.t_reg is None else cfg.t_reg, (n, n_a, n))
    if not np.allclose(t_reg.sum(axis=2), 1.0):
        raise ParameterError("t_reg rows must be probability distributions")
    rng_env, rng_reg = (np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(2))
    q = np.zeros((n, n_a))
    counts = np.zeros((n, n_a, n)) if cfg.initial_counts is None else np.array(cfg.initial_counts, dtype=float)
    rewards = np.zeros(cfg.episodes)
    real = sims_total = 0
    log = []
    alpha, gamma = cfg.step_size, env.gamma
    for ep in range(cfg.episodes):
        s = int(rng_env.integers(n))
        steps = sims = 0
        while steps < cfg.steps_per_episode:
            if rng_env.random() < cfg.behavior_exploration:
                a = int(rng_env.integers(n_a))
            else:
                a = int(greedy_policy(q[s:s + 1])[0])
            p = prob(counts, s, a)
            if p is not None and sims < cfg.sim_cap and rng_reg.random() < p:
                s_next = _draw(rng_reg, t_reg[s, a])
                q[s, a] += alpha * (env.rewards[s, a] + gamma * q[s_next].max() - q[s, a])
                sims += 1
                sims_total += 1
                if cfg.record:
                    log.append(("sim", s, a, s_next))
                continue
            sims = 0
            s_next = _draw(rng_env, env.transitions[s, a])
            r = env.rewards[s, a]
            q[s, a] += alpha * (r + gamma * q[s_next].max() - q[s, a])
            counts[s, a, s_next] += 1
            rewards[ep] += r
            steps += 1
            real += 1
            if cfg.record:
                log.append(("real", s, a, s_next))
            s = s_next
    return QLearnResult(q, rewards, real, sims_total, log)


def _eps_star(counts, s, a):
    row = counts[s, a]
    c = row.sum()
    if c == 0:
        return 1.0
    return float(eps_star_uniform(row[None] / c, np.array([c]))[0])


def q_learning_regularized(env: Mdp, cfg: QLearnConfig) -> QLearnResult:
    """Q-learning with simulated updates at rate ``eps*(s, a)``."""
    return _run(env, cfg, _eps_star)


def q_learning_baseline(env: Mdp, cfg: QLearnConfig, mode: str = "standard",
                        p: Optional[float] = None) -> QLearnResult:
    """Plain Q-learning (``mode="standard"``) or a constant simulation rate.

    ``mode="constant_prob"`` replaces ``eps*`` with the constant ``p``.
    """
    if mode == "standard":
        return _run(env, cfg, lambda counts, s, a: None)
    if mode == "constant_prob":
        if p is None or not 0 <= p <= 1:
            raise ParameterError("constant_prob needs p in [0, 1]")
        return _run(env, cfg, lambda counts, s, a: p)
    raise ParameterError(f"unknown mode {mode!r}")
