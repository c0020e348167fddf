"""
The prior hiding inside a planning discount
============================================

A planning discount gamma_p behaves like a uniform Dirichlet prior whose
magnitude is proportional to how much data each (s, a) has.  Rows with
more data get a stronger prior.
"""
import numpy as np

from discreg import implied_prior_magnitude
from discreg.regularizers import implied_prior_curve

gamma = 0.99
gamma_ps = np.array([0.5, 0.7, 0.9, 0.95, 0.99])
alpha = implied_prior_curve(gamma, n_states=10, n_obs=20, gamma_ps=gamma_ps)
for g, a in zip(gamma_ps, alpha):
    print(f"gamma_p={g:.2f}  alpha_i={a:.3f}")

# Uneven data: the implied prior scales with the row count
counts = np.zeros((3, 1, 3))
counts[0, 0] = (2, 0, 0)
counts[1, 0] = (10, 5, 5)
counts[2, 0] = (100, 50, 50)
prior = implied_prior_magnitude(gamma, 0.9, counts)
print("\nrow counts:", counts.sum(axis=2).ravel())
print("sum alpha: ", prior.magnitude.ravel().round(3))

# A short sweep: discounting and its implied prior give identical loss
from discreg import DatasetConfig, EnvSpec, RegularizerSpec, SweepConfig, run_sweep
from discreg.experiments import curve

cfg = SweepConfig(EnvSpec("random_chain"),
                  [RegularizerSpec("discount_reg"), RegularizerSpec("implied_prior")],
                  eps_grid=(0.0, 0.1, 0.3, 0.6), n_datasets=30,
                  dataset=DatasetConfig(tuples_per_sa=10, sampling_mode="equal_per_sa"))
recs = run_sweep(cfg)
eps, m1, _ = curve(recs, "discount_reg")
_, m2, _ = curve(recs, "implied_prior")
print("\neps   discount  implied prior")
for row in zip(eps, m1, m2):
    print("{:.1f} {:9.4f} {:14.4f}".format(*row))
