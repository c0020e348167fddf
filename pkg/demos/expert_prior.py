"""
An informative prior on River Swim
===================================

Because the averaging view allows any regularization matrix, domain
knowledge can replace the uniform row.  Here left moves left and right
moves right, deterministically.
"""
import numpy as np

from discreg import DatasetConfig, EnvSpec, RegularizerSpec, SweepConfig, run_sweep
from discreg import river_swim_left_right_prior
from discreg.experiments import curve

methods = [RegularizerSpec("uniform_prior"),
           RegularizerSpec("custom_prior", t_reg=river_swim_left_right_prior(6), label="left_right")]
cfg = SweepConfig(EnvSpec("river_swim"), methods, eps_grid=tuple(np.linspace(0, 1, 6)),
                  n_datasets=50, dataset=DatasetConfig(tuples_per_sa=10))
recs = run_sweep(cfg)
eps, m_u, _ = curve(recs, "uniform_prior")
_, m_lr, _ = curve(recs, "left_right")
print(" eps  uniform  left/right")
for row in zip(eps, m_u, m_lr):
    print("{:.1f} {:8.3f} {:10.3f}".format(*row))
