"""
Global versus per-pair regularization on three environments
============================================================

Sweep the global strength for discount regularization and for a uniform
prior of fixed magnitude, and compare with the tuning-free per-pair
weights.  Data are uneven: each tuple picks its (s, a) uniformly at random.
"""
from pathlib import Path

import numpy as np

from discreg.config import load_config
from discreg.experiments import curve, run_sweep, summarize

configs = load_config(Path(__file__).resolve().parents[1] / "configs" / "benchmark.ini")
for cfg in configs:
    cfg.n_datasets = 40            # the shipped config uses 200
    recs = run_sweep(cfg)
    eps, m_dr, se_dr = curve(recs, "discount_reg")
    _, m_up, se_up = curve(recs, "uniform_prior")
    sa = next(r for r in summarize(recs) if r.method == "sa_specific")
    print(f"\n{cfg.env_label}")
    print(" eps  discount   uniform prior")
    for i in range(0, len(eps), 4):
        print(f"{eps[i]:.2f} {m_dr[i]:9.3f} {m_up[i]:11.3f}")
    print(f"best discount {m_dr.min():.3f} at eps={eps[np.argmin(m_dr)]:.2f}; "
          f"per-pair eps* {sa.mean:.3f} +- {sa.se:.3f}")
