"""Batch data generation, the policy loss, and regularization sweeps.

A sweep repeats, for each of ``n_datasets`` replicates: sample a batch of
``(s, a, s')`` tuples from the true MDP, estimate the transitions, apply
every regularizer (global methods at every point of the eps grid,
state-action-specific methods once), plan, and score the plan in the true
MDP.  Replicate ``i`` draws all of its randomness from
``default_rng([seed, i])``, so results do not depend on thread scheduling.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from .environments import EnvSpec
from .errors import ConfigError, ParameterError
from .estimation import uniform_matrix, zeros_matrix
from .mdp import Mdp, evaluate_policy, policies_equivalent, solve, value_iteration
from .regularizers import RegularizerSpec, regularize

SAMPLING_MODES = ("uniform_random_sa", "equal_per_sa")
CSV_COLUMNS = ("env", "method", "param_name", "param_value", "replicate", "loss")
DEFAULT_EPS_GRID = tuple(np.round(np.arange(0, 21) * 0.05, 2))


@dataclass(frozen=True)
class DatasetConfig:
    """Batch size and sampling scheme.

    Exactly one of ``n_tuples`` and ``tuples_per_sa`` is normally set; the
    latter scales with the environment (``n = tuples_per_sa * N * A``).
    """

    n_tuples: Optional[int] = None
    sampling_mode: str = "uniform_random_sa"
    seed: int = 0
    tuples_per_sa: Optional[int] = None

    def __post_init__(self):
        if self.sampling_mode not in SAMPLING_MODES:
            raise ConfigError(f"sampling_mode must be one of {SAMPLING_MODES}")
        if self.n_tuples is None and self.tuples_per_sa is None:
            raise ConfigError("set n_tuples or tuples_per_sa")
        for v in (self.n_tuples, self.tuples_per_sa):
            if v is not None and v < 0:
                raise ConfigError("dataset sizes must be nonnegative")

    def size_for(self, n_states: int, n_actions: int) -> int:
        if self.n_tuples is not None:
            n = self.n_tuples
        else:
            n = self.tuples_per_sa * n_states * n_actions
        if self.sampling_mode == "equal_per_sa" and n % (n_states * n_actions):
            raise ConfigError(
                f"equal_per_sa needs n_tuples divisible by N*A = {n_states * n_actions}, got {n}"
            )
        return n


def sample_dataset(mdp: Mdp, cfg: DatasetConfig, rng=None) -> np.ndarray:
    """Transition counts ``(N, A, N)`` from ``n`` sampled tuples.

    ``rng`` overrides ``cfg.seed`` (the sweeps pass a per-replicate
    generator).
    """
    rng = np.random.default_rng(cfg.seed if rng is None else rng)
    n_s, n_a = mdp.n_states, mdp.n_actions
    n = cfg.size_for(n_s, n_a)
    if cfg.sampling_mode == "equal_per_sa":
        per_row = np.full(n_s * n_a, n // (n_s * n_a))
    else:
        per_row = rng.multinomial(n, np.full(n_s * n_a, 1.0 / (n_s * n_a)))
    rows = mdp.transitions.reshape(n_s * n_a, n_s)
    counts = np.zeros((n_s * n_a, n_s), dtype=np.int64)
    for i, m in enumerate(per_row):
        if m:
            p = rows[i] / rows[i].sum()
            counts[i] = rng.multinomial(m, p)
    return counts.reshape(n_s, n_a, n_s)


def compute_loss(true_mdp: Mdp, policy, v_star=None) -> float:
    """Mean over states of ``V*(s) - V^pi(s)``, both exact in ``true_mdp``."""
    if v_star is None:
        v_star = solve(true_mdp).v
    return float(np.mean(v_star - evaluate_policy(true_mdp, policy)))


@dataclass
class LossRecord:
    env: str
    method: str
    param_name: str
    param_value: float
    replicate: int
    loss: float


@dataclass
class SweepConfig:
    """One environment, a list of regularizers, and the replicate plan."""

    env: EnvSpec
    methods: List[RegularizerSpec]
    eps_grid: tuple = DEFAULT_EPS_GRID
    n_datasets: int = 200
    dataset: DatasetConfig = field(default_factory=lambda: DatasetConfig(tuples_per_sa=10))
    name: Optional[str] = None

    def __post_init__(self):
        if not self.methods:
            raise ConfigError("methods must be nonempty")
        if len(self.eps_grid) == 0:
            raise ConfigError("eps_grid must be nonempty")
        if any(not 0 <= e <= 1 for e in self.eps_grid):
            raise ConfigError("eps_grid values must lie in [0, 1]")
        if self.n_datasets < 1:
            raise ConfigError("n_datasets must be positive")
        ids = [m.id for m in self.methods]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"method ids must be unique, got {ids}")

    @property
    def env_label(self) -> str:
        return self.name or self.env.kind

    def to_dict(self) -> dict:
        methods = []
        for m in self.methods:
            d = {k: v for k, v in asdict(m).items() if v is not None}
            if "t_reg" in d:
                d["t_reg"] = np.asarray(d["t_reg"]).tolist()
            d["eps_grid"] = list(d["eps_grid"])
            methods.append(d)
        return {
            "name": self.env_label,
            "env": self.env.to_dict(),
            "methods": methods,
            "eps_grid": list(self.eps_grid),
            "n_datasets": self.n_datasets,
            "dataset": asdict(self.dataset),
        }


@dataclass
class Replicate:
    """Everything one replicate produced, kept for policy-level checks."""

    index: int
    true_mdp: Mdp
    counts: np.ndarray
    records: List[LossRecord]
    plans: dict = field(default_factory=dict, repr=False)


def _run_replicate(cfg: SweepConfig, i: int, methods, keep_plans: bool) -> Replicate:
    rng = np.random.default_rng([cfg.dataset.seed, i])
    true_mdp = cfg.env.build(rng) if cfg.env.resampled else cfg.env.build()
    counts = sample_dataset(true_mdp, cfg.dataset, rng)
    ps_seed = int(rng.integers(2**31))
    v_star = solve(true_mdp).v
    label = cfg.env_label
    records, plans = [], {}
    for spec in methods:
        if spec.is_global:
            for eps in cfg.eps_grid:
                t, g, _ = regularize(spec.at(eps), counts, true_mdp.gamma)
                sol = solve(Mdp(true_mdp.rewards, t, g))
                loss = compute_loss(true_mdp, sol.policy, v_star)
                records.append(LossRecord(label, spec.id, "eps", float(eps), i, loss))
                if keep_plans:
                    plans[spec.id, float(eps)] = sol
        else:
            t, g, eps_field = regularize(spec, counts, true_mdp.gamma, seed=ps_seed)
            sol = solve(Mdp(true_mdp.rewards, t, g))
            loss = compute_loss(true_mdp, sol.policy, v_star)
            records.append(
                LossRecord(label, spec.id, "eps_star_mean", float(eps_field.mean()), i, loss)
            )
            if keep_plans:
                plans[spec.id, None] = sol
    return Replicate(i, true_mdp, counts, records, plans)


def run_replicates(cfg: SweepConfig, methods=None, threads: int = 1,
                   keep_plans: bool = False) -> List[Replicate]:
    methods = cfg.methods if methods is None else methods
    idx = range(cfg.n_datasets)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda i: _run_replicate(cfg, i, methods, keep_plans), idx))
    return [_run_replicate(cfg, i, methods, keep_plans) for i in idx]


def run_sweep(cfg: SweepConfig, threads: int = 1) -> List[LossRecord]:
    """All loss records for ``cfg``, ordered by replicate then method."""
    return [r for rep in run_replicates(cfg, threads=threads) for r in rep.records]


def run_state_specific(cfg: SweepConfig, threads: int = 1) -> List[LossRecord]:
    """Loss records for the state-action-specific methods of ``cfg`` only."""
    methods = [m for m in cfg.methods if not m.is_global]
    if not methods:
        raise ConfigError("config lists no state-action-specific method")
    return [r for rep in run_replicates(cfg, methods, threads) for r in rep.records]


@dataclass
class SummaryRow:
    env: str
    method: str
    param_name: str
    param_value: float
    mean: float
    se: float
    n: int


def summarize(records) -> List[SummaryRow]:
    """Mean and standard error of the loss per (env, method, parameter).

    State-action-specific records are pooled into one row per method.
    """
    groups = {}
    for r in records:
        key = (r.env, r.method, r.param_name,
               r.param_value if r.param_name == "eps" else math.nan)
        groups.setdefault(key, []).append(r.loss)
    rows = []
    for (env, method, pname, pval), losses in groups.items():
        x = np.asarray(losses)
        se = float(x.std(ddof=1) / np.sqrt(x.size)) if x.size > 1 else math.nan
        rows.append(SummaryRow(env, method, pname, pval, float(x.mean()), se, x.size))
    return rows


def curve(records, method: str, env: Optional[str] = None):
    """``(eps, mean, se)`` arrays for one global method, sorted by eps."""
    rows = [r for r in summarize(records)
            if r.method == method and r.param_name == "eps" and (env is None or r.env == env)]
    rows.sort(key=lambda r: r.param_value)
    return (np.array([r.param_value for r in rows]), np.array([r.mean for r in rows]),
            np.array([r.se for r in rows]))


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return format(float(x), ".17g")


def export_results(records, path, fmt: Optional[str] = None, config=None,
                   value_column: str = "loss") -> Path:
    """Write records as CSV or JSON (``fmt`` defaults to the file suffix).

    ``value_column`` renames the last column, e.g. ``"episode_reward"`` for
    Q-learning reward traces.
    """
    columns = CSV_COLUMNS[:-1] + (value_column,)
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".") or "csv").lower()
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown output format {fmt!r}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            if fmt == "csv":
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(columns)
                for r in records:
                    w.writerow([r.env, r.method, r.param_name, _fmt(r.param_value),
                                r.replicate, _fmt(r.loss)])
            else:
                rows = []
                for r in records:
                    d = asdict(r)
                    d[value_column] = d.pop("loss")
                    rows.append(d)
                payload = {"columns": list(columns), "config": config, "records": rows}
                json.dump(payload, fh, indent=1, sort_keys=True)
                fh.write("\n")
    except OSError as exc:
        raise OSError(f"could not write results to {path}: {exc}") from exc
    return path


def load_results(path) -> List[LossRecord]:
    """Read a file written by :func:`export_results`."""
    path = Path(path)
    with open(path, newline="") as fh:
        if path.suffix == ".json":
            payload = json.load(fh)
            value = payload["columns"][-1]
            return [LossRecord(d["env"], d["method"], d["param_name"], d["param_value"],
                               d["replicate"], d[value]) for d in payload["records"]]
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header[:-1]) != CSV_COLUMNS[:-1]:
            raise ConfigError(f"{path}: unexpected header {header}")
        return [LossRecord(env, method, pname, float(pval), int(rep), float(val))
                for env, method, pname, pval, rep, val in reader]


def trace_records(episode_rewards, env: str, method: str, replicate: int = 0) -> List[LossRecord]:
    """Reward trace as records keyed by episode index."""
    return [LossRecord(env, method, "episode", float(i), replicate, float(r))
            for i, r in enumerate(episode_rewards)]


# ---------------------------------------------------------------------------
# Discount regularization vs. averaging with identical rows
# ---------------------------------------------------------------------------

@dataclass
class EquivalenceTrial:
    mdp: Mdp
    eps: float
    reg_kind: str
    t_reg: np.ndarray
    discounted: object
    averaged: object
    passed: bool


def random_mdp(rng, max_states: int = 10, max_actions: int = 3) -> Mdp:
    n = int(rng.integers(1, max_states + 1))
    a = int(rng.integers(1, max_actions + 1))
    conc = rng.choice([0.1, 1.0, 10.0])
    t = rng.dirichlet(np.full(n, conc), size=(n, a))
    r = rng.uniform(-1, 1, size=(n, a))
    gamma = float(rng.uniform(0.5, 0.99))
    return Mdp(r, t, gamma)


def equivalence_trial(mdp: Mdp, eps: float, t_reg, planner=solve) -> EquivalenceTrial:
    """Plan with ``(gamma (1 - eps), T)`` and ``(gamma, (1 - eps) T + eps T_reg)``."""
    t_reg = np.asarray(t_reg, dtype=float)
    m1 = mdp.replace(gamma=mdp.gamma * (1 - eps))
    m2 = mdp.replace(transitions=(1 - eps) * mdp.transitions + eps * t_reg)
    s1, s2 = planner(m1), planner(m2)
    ok = policies_equivalent(s1.q, s1.policy, s2.q, s2.policy)
    kind = "zeros" if not t_reg.any() else "given"
    return EquivalenceTrial(mdp, eps, kind, t_reg, s1, s2, ok)


def run_theorem_check(n_trials: int = 500, seed: int = 0, planner=solve):
    """Random equivalence trials cycling T_reg over zeros, uniform, random rows."""
    if n_trials < 1:
        raise ParameterError("n_trials must be at least 1")
    rng = np.random.default_rng(seed)
    trials = []
    for i in range(n_trials):
        mdp = random_mdp(rng)
        n = mdp.n_states
        kind = ("zeros", "uniform", "random")[i % 3]
        row = {"zeros": zeros_matrix(n), "uniform": uniform_matrix(n),
               "random": rng.dirichlet(np.ones(n))}[kind]
        # eps = 0 and eps = 1 edges are included on purpose
        eps = 0.0 if i % 50 == 0 else (1.0 if i % 50 == 1 else float(rng.uniform(0, 1)))
        trial = equivalence_trial(mdp, eps, row, planner)
        trial.reg_kind = kind
        trials.append(trial)
    return trials


def equivalence_table(mdp: Mdp, eps: float, t_reg=None):
    """Per-state (value, action) under both equivalent formulations."""
    if t_reg is None:
        t_reg = uniform_matrix(mdp.n_states)
    tr = equivalence_trial(mdp, eps, t_reg, planner=value_iteration)
    return [(s, tr.discounted.v[s], int(tr.discounted.policy[s]),
             tr.averaged.v[s], int(tr.averaged.policy[s])) for s in range(mdp.n_states)]
