"""Command-line front end.

Exit codes: 0 success, 1 runtime or check failure, 2 usage or config error.
Result files default to ``$DISCREG_OUTPUT_DIR`` (or the working directory)
when ``--output`` is not given.
"""
from __future__ import annotations

import argparse
import ast
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import load_config, parse_grid
from .environments import ENV_KINDS, EnvSpec, make_river_swim
from .errors import ConfigError, DiscregError, ParameterError
from .estimation import mle_estimate
from .experiments import (export_results, equivalence_table, run_state_specific, run_sweep,
                          run_theorem_check, summarize, trace_records)
from .mdp import solve
from .model_free import QLearnConfig, q_learning_baseline, q_learning_regularized
from .regularizers import (eps_star_posterior_sampled, eps_star_uniform, implied_prior_curve,
                           implied_prior_magnitude, k_factor)

OUTPUT_DIR_ENV = "DISCREG_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _output_path(args, stem: str) -> Path:
    if args.output:
        return Path(args.output)
    fmt = args.format or "csv"
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / f"{stem}.{fmt}"


def _print_summary(records, out):
    for row in summarize(records):
        pval = "" if row.param_name != "eps" else f" eps={row.param_value:g}"
        print(f"{row.env:>16} {row.method:>16}{pval:<10} mean={row.mean:.6g} se={row.se:.3g} n={row.n}",
              file=out)


# ---------------------------------------------------------------------------
# sweep / state-specific
# ---------------------------------------------------------------------------

def _sweep(args, runner, stem_suffix=""):
    configs = load_config(args.config, seed=args.seed)
    records = []
    for cfg in configs:
        records.extend(runner(cfg, threads=args.threads))
    path = _output_path(args, Path(args.config).stem + stem_suffix)
    export_results(records, path, args.format, config=[c.to_dict() for c in configs])
    if not args.quiet:
        _print_summary(records, sys.stdout)
    print(f"wrote {len(records)} records to {path}")
    return 0


def cmd_sweep(args):
    return _sweep(args, run_sweep)


def cmd_state_specific(args):
    return _sweep(args, run_state_specific, "_state_specific")


# ---------------------------------------------------------------------------
# theorem-check
# ---------------------------------------------------------------------------

def _dump_trial(tr, out):
    print("counterexample:", file=out)
    print(f"  eps = {tr.eps!r}, T_reg kind = {tr.reg_kind}, gamma = {tr.mdp.gamma!r}", file=out)
    print(f"  rewards = {tr.mdp.rewards.tolist()}", file=out)
    print(f"  transitions = {tr.mdp.transitions.tolist()}", file=out)
    print(f"  t_reg = {np.asarray(tr.t_reg).tolist()}", file=out)
    print(f"  policy (discounted) = {tr.discounted.policy.tolist()}", file=out)
    print(f"  policy (averaged)   = {tr.averaged.policy.tolist()}", file=out)


def cmd_theorem_check(args):
    if args.n_trials < 1:
        raise UsageError("--n-trials must be at least 1")
    trials = run_theorem_check(args.n_trials, args.seed)
    for i, tr in enumerate(trials):
        if args.verbose:
            print(f"trial {i:4d} N={tr.mdp.n_states} A={tr.mdp.n_actions} "
                  f"gamma={tr.mdp.gamma:.4f} eps={tr.eps:.4f} T_reg={tr.reg_kind:<7} "
                  f"{'PASS' if tr.passed else 'FAIL'}")
    n_pass = sum(tr.passed for tr in trials)
    print(f"{n_pass}/{len(trials)} trials have equivalent policies")

    eps = 0.3
    print(f"\nRiver Swim, gamma=0.99, eps={eps}: (0.99*(1-eps), T) vs (0.99, (1-eps)T + eps*uniform)")
    print(f"{'state':>5} {'V_discount':>12} {'a_discount':>10} {'V_average':>12} {'a_average':>10}")
    for s, v1, a1, v2, a2 in equivalence_table(make_river_swim(), eps):
        print(f"{s:>5} {v1:>12.4f} {a1:>10} {v2:>12.4f} {a2:>10}")

    failed = [tr for tr in trials if not tr.passed]
    if failed:
        _dump_trial(failed[0], sys.stdout)
        return 1
    return 0


# ---------------------------------------------------------------------------
# eps-star / implied-prior
# ---------------------------------------------------------------------------

COUNTS_HEADER = ["s", "a", "s_next", "count"]


def read_counts(path, n_states=None, n_actions=None) -> np.ndarray:
    """Dense (N, A, N) counts from a ``s,a,s_next,count`` CSV file.

    Shape defaults to one more than the largest index seen.  Repeated
    entries are summed.
    """
    path = Path(path)
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read counts file {path}: {exc.strerror}") from exc
    rows = []
    with fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != COUNTS_HEADER:
            raise ConfigError(f"{path}:1: header must be {','.join(COUNTS_HEADER)}, got {','.join(header)}")
        for line, row in enumerate(reader, 2):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 4:
                raise ConfigError(f"{path}:{line}: expected 4 fields, got {len(row)}")
            try:
                s, a, s_next = (int(x) for x in row[:3])
                c = float(row[3])
            except ValueError:
                raise ConfigError(f"{path}:{line}: cannot parse {','.join(row)!r}") from None
            if min(s, a, s_next) < 0 or not np.isfinite(c) or c < 0:
                raise ConfigError(f"{path}:{line}: indices and counts must be nonnegative")
            rows.append((line, s, a, s_next, c))
    if not rows and (n_states is None or n_actions is None):
        raise ConfigError(f"{path}: no count rows; pass --n-states and --n-actions")
    n = n_states if n_states is not None else 1 + max(max(r[1], r[3]) for r in rows)
    n_a = n_actions if n_actions is not None else 1 + max(r[2] for r in rows)
    counts = np.zeros((n, n_a, n))
    for line, s, a, s_next, c in rows:
        if s >= n or s_next >= n or a >= n_a:
            raise ConfigError(f"{path}:{line}: index outside N={n}, A={n_a}")
        counts[s, a, s_next] += c
    return counts


def _table_out(args):
    return open(args.output, "w", newline="") if args.output else sys.stdout


def cmd_eps_star(args):
    counts = read_counts(args.counts, args.n_states, args.n_actions)
    t, _ = mle_estimate(counts)
    c = counts.sum(axis=2)
    k = k_factor(t)
    if args.plugin == "mle":
        eps = eps_star_uniform(t, counts)
    else:
        eps = eps_star_posterior_sampled(counts, args.prior, args.n_samples, seed=args.seed)
    out = _table_out(args)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["s", "a", "c", "K", "eps_star"])
        for s in range(c.shape[0]):
            for a in range(c.shape[1]):
                kk = "" if c[s, a] == 0 else format(float(k[s, a]), ".10g")
                w.writerow([s, a, format(float(c[s, a]), "g"), kk, format(float(eps[s, a]), ".10g")])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_implied_prior(args):
    if args.gamma_p is not None and args.gamma_p == 0:
        raise UsageError("gamma_p = 0 implies a prior of infinite magnitude (pure bandit planning)")
    out = _table_out(args)
    try:
        w = csv.writer(out, lineterminator="\n")
        if args.curve:
            if args.n_states is None or args.n_obs is None:
                raise UsageError("--curve needs --n-states and --n-obs")
            grid = (parse_grid(args.grid) if args.grid
                    else np.round(np.arange(50, int(round(args.gamma * 100)) + 1) / 100, 2))
            alpha = implied_prior_curve(args.gamma, args.n_states, args.n_obs, grid)
            w.writerow(["gamma_p", "sum_alpha", "alpha_i"])
            for g, a in zip(grid, alpha):
                w.writerow([format(float(g), "g"), format(float(a * args.n_states), ".10g"),
                            format(float(a), ".10g")])
            return 0
        if args.gamma_p is None or args.counts is None:
            raise UsageError("give --gamma-p and --counts, or --curve")
        counts = read_counts(args.counts, args.n_states, args.n_actions)
        prior = implied_prior_magnitude(args.gamma, args.gamma_p, counts)
        n = counts.shape[0]
        w.writerow(["s", "a", "c", "sum_alpha", "alpha_i"])
        for s in range(counts.shape[0]):
            for a in range(counts.shape[1]):
                m = float(prior.magnitude[s, a])
                w.writerow([s, a, format(float(counts[s, a].sum()), "g"),
                            format(m, ".10g"), format(m / n, ".10g")])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


# ---------------------------------------------------------------------------
# qlearn / env-dump
# ---------------------------------------------------------------------------

def _env_params(pairs):
    params = {}
    for p in pairs or ():
        key, sep, value = p.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {p!r}")
        try:
            params[key] = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            params[key] = value
    return params


def _build_env(args):
    spec = EnvSpec(args.env, args.gamma, _env_params(args.param))
    return spec, spec.build(np.random.default_rng(args.seed))


def cmd_qlearn(args):
    spec, env = _build_env(args)
    records = []
    for run in range(args.runs):
        seed = int(np.random.SeedSequence([args.seed, run]).generate_state(1)[0])
        cfg = QLearnConfig(step_size=args.step_size, behavior_exploration=args.exploration,
                           episodes=args.episodes, steps_per_episode=args.steps,
                           sim_cap=args.sim_cap, seed=seed)
        if args.method == "regularized":
            res = q_learning_regularized(env, cfg)
        elif args.method == "standard":
            res = q_learning_baseline(env, cfg)
        else:
            res = q_learning_baseline(env, cfg, "constant_prob", args.p)
        records.extend(trace_records(res.episode_rewards, spec.kind, args.method, run))
        if not args.quiet:
            print(f"run {run}: mean episode reward {res.episode_rewards.mean():.6g}, "
                  f"real steps {res.real_steps}, simulated updates {res.simulated_updates}")
    path = _output_path(args, f"qlearn_{spec.kind}_{args.method}")
    export_results(records, path, args.format, value_column="episode_reward",
                   config={"env": spec.to_dict(), "method": args.method, "seed": args.seed})
    print(f"wrote {len(records)} records to {path}")
    return 0


def cmd_env_dump(args):
    spec, mdp = _build_env(args)
    sol = solve(mdp)
    payload = {
        "env": spec.to_dict(),
        "gamma": mdp.gamma,
        "rewards": mdp.rewards.tolist(),
        "transitions": mdp.transitions.tolist(),
        "optimal_policy": sol.policy.tolist(),
        "optimal_values": sol.v.tolist(),
    }
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p, formats=("csv", "json")):
    p.add_argument("--output", "-o", help="output file (default: $%s or cwd)" % OUTPUT_DIR_ENV)
    p.add_argument("--format", choices=formats, help="output format (default: file suffix)")
    p.add_argument("--seed", type=int, default=None, help="seed override")
    p.add_argument("--threads", type=int, default=1, help="parallel replicates")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, desc in (("sweep", cmd_sweep, "run a regularization sweep from a config file"),
                           ("state-specific", cmd_state_specific,
                            "run only the state-action-specific methods of a config")):
        p = sub.add_parser(name, help=desc)
        p.add_argument("config")
        p.add_argument("--quiet", "-q", action="store_true", help="skip the summary table")
        _common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("theorem-check", help="check discount/averaging policy equivalence")
    p.add_argument("--n-trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--verbose", "-v", action="store_true", default=True)
    p.add_argument("--brief", dest="verbose", action="store_false", help="aggregate only")
    p.set_defaults(func=cmd_theorem_check)

    p = sub.add_parser("eps-star", help="state-action-specific weights from a counts file")
    p.add_argument("--counts", required=True)
    p.add_argument("--plugin", choices=("mle", "posterior"), default="mle")
    p.add_argument("--prior", type=float, default=1.0, help="flat Dirichlet prior for --plugin posterior")
    p.add_argument("--n-samples", type=int, default=100)
    p.add_argument("--n-states", type=int)
    p.add_argument("--n-actions", type=int)
    p.add_argument("--output", "-o")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eps_star)

    p = sub.add_parser("implied-prior", help="uniform prior magnitude matching a planning discount")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--gamma-p", type=float)
    p.add_argument("--counts")
    p.add_argument("--curve", action="store_true", help="alpha_i as a function of gamma_p")
    p.add_argument("--grid", help="gamma_p grid for --curve, start:stop:step or a comma list")
    p.add_argument("--n-states", type=int)
    p.add_argument("--n-actions", type=int)
    p.add_argument("--n-obs", type=float, help="observations per (s, a) for --curve")
    p.add_argument("--output", "-o")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; unused")
    p.set_defaults(func=cmd_implied_prior)

    p = sub.add_parser("qlearn", help="Q-learning reward traces")
    p.add_argument("--env", choices=ENV_KINDS, default="river_swim")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="environment parameter")
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--method", choices=("regularized", "standard", "constant_prob"),
                   default="regularized")
    p.add_argument("--p", type=float, help="simulation probability for constant_prob")
    p.add_argument("--episodes", type=int, default=200)
    p.add_argument("--steps", type=int, default=100, help="real steps per episode")
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--exploration", type=float, default=0.1)
    p.add_argument("--sim-cap", type=int, default=10)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--quiet", "-q", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_qlearn)

    p = sub.add_parser("env-dump", help="print an environment and its optimal policy as JSON")
    p.add_argument("env", choices=ENV_KINDS)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_env_dump)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", 0) is None and args.command == "qlearn":
        args.seed = 0
    try:
        return args.func(args)
    except (UsageError, ConfigError, ParameterError) as exc:
        print(f"discreg {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (DiscregError, ArithmeticError, OSError, ValueError) as exc:
        print(f"discreg {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
