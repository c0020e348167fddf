"""
Regularizing toward the other actions
======================================

Planning as if the agent acted epsilon-greedily averages each action's
row with the mean row of its state.  The best weight again has a closed
form per (s, a).  On the controlled loop, lam sets how different the two
actions are: at lam = 0.5 they coincide and full averaging costs nothing.
"""
import numpy as np

from discreg import eps_star_eps_greedy, make_controlled_loop
from discreg.experiments import DatasetConfig, sample_dataset
from discreg.estimation import mle_estimate

for lam in (0.0, 0.25, 0.45, 0.5):
    env = make_controlled_loop(kappa=0.8, lam=lam)
    counts = sample_dataset(env, DatasetConfig(tuples_per_sa=8, sampling_mode="equal_per_sa", seed=1))
    t_mle, _ = mle_estimate(counts)
    e_plugin = eps_star_eps_greedy(t_mle, counts)
    e_true = eps_star_eps_greedy(env.transitions, counts)
    print(f"lam={lam:.2f}  mean eps* (true T) {e_true.mean():.3f}  (MLE plug-in) {e_plugin.mean():.3f}")
