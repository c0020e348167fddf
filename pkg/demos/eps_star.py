"""
Choosing the weight per state-action pair
==========================================

The mean squared error of a uniform-prior estimate trades MLE variance
against bias toward the uniform row.  Its minimizer has a closed form that
depends on the row's own data, so sparse, spread-out rows are smoothed
heavily and well-sampled or nearly deterministic rows are left alone.
"""
import numpy as np

from discreg import eps_star_uniform, k_factor, mse_uniform

t = np.array([0.75, 0.25])
for c in (1, 4, 20, 100):
    e = eps_star_uniform(t[None], np.array([c]))[0]
    print(f"c={c:3d}  K={k_factor(t):.1f}  eps*={e:.3f}  "
          f"MSE at eps*={mse_uniform(t, c, e):.4f}  at 0={mse_uniform(t, c, 0.0):.4f}")

# Degenerate rows: deterministic data means no smoothing, no data means full
print(eps_star_uniform(np.array([[0.0, 1.0], [0.5, 0.5]]), np.array([5, 5])))

# With few samples the MLE plug-in is noisy; posterior sampling averages
# the MSE over plausible true rows instead
from discreg import eps_star_posterior_sampled

rng = np.random.default_rng(0)
counts = rng.multinomial(6, [0.6, 0.3, 0.1], size=(3, 2))
print("\ncounts per (s, a):\n", counts.sum(axis=2))
t_mle = counts / counts.sum(axis=2, keepdims=True)
print("MLE plug-in:\n", eps_star_uniform(t_mle, counts).round(2))
print("posterior sampled:\n", eps_star_posterior_sampled(counts, prior=1.0, seed=0))
