"""
Simulated transitions inside Q-learning
========================================

The same per-pair weight can drive a model-free learner: with probability
eps*(s, a) the update uses a successor drawn from the uniform row instead
of a real step.  Rarely visited pairs are therefore smoothed, and pairs
with plenty of data are learned from experience only.
"""
import numpy as np

from discreg import QLearnConfig, make_river_swim, q_learning_baseline, q_learning_regularized

env = make_river_swim()
cfg = dict(episodes=100, steps_per_episode=100, behavior_exploration=0.1)
rows = []
for seed in range(5):
    reg = q_learning_regularized(env, QLearnConfig(seed=seed, **cfg))
    std = q_learning_baseline(env, QLearnConfig(seed=seed, **cfg))
    const = q_learning_baseline(env, QLearnConfig(seed=seed, **cfg), "constant_prob", 0.2)
    rows.append([r.episode_rewards[-20:].mean() for r in (reg, std, const)])
    print(f"seed {seed}: simulated updates {reg.simulated_updates}")

print("\nmean reward over the last 20 episodes (5 seeds)")
for name, m in zip(("eps*", "standard", "constant 0.2"), np.mean(rows, axis=0)):
    print(f"{name:>13}: {m:.3f}")
