"""INI-style sweep configuration files.

Example::

    [sweep]
    n_datasets = 200
    eps_grid = 0:1:0.05        ; start:stop:step, or a comma list
    seed = 0

    [dataset]
    sampling_mode = uniform_random_sa
    tuples_per_sa = 10

    [env.river_swim]           ; label after the dot names the env in output
    kind = river_swim
    gamma = 0.99
    p_right = 0.3              ; any other key is a constructor argument

    [method.discount_reg]      ; label after the dot is the method id
    method = discount_reg

    [method.left_right]
    method = custom_prior
    t_reg = river_swim_left_right   ; named prior or path to a .npy file

Several ``env.*`` sections yield one :class:`SweepConfig` each, all sharing
the ``sweep``, ``dataset`` and ``method.*`` sections.  An ``env.*`` section
may override dataset keys (``n_tuples``, ``tuples_per_sa``,
``sampling_mode``).
"""
from __future__ import annotations

import ast
import configparser
import re
from pathlib import Path

import numpy as np

from .environments import EnvSpec, river_swim_left_right_prior
from .errors import ConfigError, DiscregError
from .experiments import DatasetConfig, SweepConfig
from .regularizers import RegularizerSpec

NAMED_PRIORS = {
    "river_swim_left_right": river_swim_left_right_prior,
}
_DATASET_KEYS = ("n_tuples", "tuples_per_sa", "sampling_mode")


def _value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text.strip()


def parse_grid(text: str) -> tuple:
    """``"0:1:0.05"`` (inclusive) or ``"0, 0.1, 0.5"``."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(round((stop - start) / step))
        return tuple(float(np.round(start + k * step, 12)) for k in range(n + 1))
    return tuple(float(x) for x in text.replace("[", "").replace("]", "").split(",") if x.strip())


class _Source:
    """Config text plus a way to point at the offending line."""

    def __init__(self, path):
        self.path = Path(path)
        try:
            self.lines = self.path.read_text().splitlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {self.path}: {exc.strerror}") from exc

    def where(self, section, key=None) -> str:
        in_section = False
        for i, line in enumerate(self.lines, 1):
            stripped = line.strip()
            if stripped.startswith("["):
                in_section = stripped == f"[{section}]"
                if in_section and key is None:
                    return f"{self.path}:{i}"
            elif in_section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", stripped):
                return f"{self.path}:{i}"
        return str(self.path)

    def fail(self, section, key, msg):
        field_ = f"[{section}]" + (f" {key}" if key else "")
        raise ConfigError(f"{self.where(section, key)}: {field_}: {msg}")


def _t_reg(value, src, section):
    if isinstance(value, str) and value in NAMED_PRIORS:
        return value
    if isinstance(value, str) and value.endswith(".npy"):
        p = Path(value)
        if not p.is_absolute():
            p = src.path.parent / p
        try:
            return np.load(p)
        except OSError as exc:
            src.fail(section, "t_reg", f"cannot load {p}: {exc}")
    if isinstance(value, (list, tuple)):
        return np.asarray(value, dtype=float)
    src.fail(section, "t_reg", f"unknown prior {value!r}; named priors: {sorted(NAMED_PRIORS)}")


def load_config(path, seed=None):
    """Parse a config file into a list of :class:`SweepConfig`.

    ``seed`` overrides ``[sweep] seed``.
    """
    src = _Source(path)
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string("\n".join(src.lines), source=str(src.path))
    except configparser.Error as exc:
        raise ConfigError(f"{src.path}: {exc}") from exc

    sweep = cp["sweep"] if cp.has_section("sweep") else {}
    try:
        grid = parse_grid(sweep.get("eps_grid", "0:1:0.05"))
    except ValueError as exc:
        src.fail("sweep", "eps_grid", str(exc))
    try:
        n_datasets = int(sweep.get("n_datasets", "200"))
        base_seed = int(sweep.get("seed", "0")) if seed is None else int(seed)
    except ValueError as exc:
        src.fail("sweep", None, str(exc))

    dataset = {k: _value(v) for k, v in cp["dataset"].items()} if cp.has_section("dataset") else {}

    methods = []
    for section in cp.sections():
        if not section.startswith("method"):
            continue
        opts = {k: _value(v) for k, v in cp[section].items()}
        label = section.partition(".")[2] or None
        if "method" not in opts:
            src.fail(section, None, "missing 'method' key")
        if "eps_grid" in opts:
            opts["eps_grid"] = parse_grid(cp[section]["eps_grid"])
        named = None
        if "t_reg" in opts:
            value = _t_reg(opts["t_reg"], src, section)
            if isinstance(value, str):
                named = value
                opts.pop("t_reg")
            else:
                opts["t_reg"] = value
        try:
            spec = RegularizerSpec(label=label, **opts) if named is None else None
        except (TypeError, DiscregError) as exc:
            src.fail(section, None, str(exc))
        methods.append((section, spec, named, opts, label))

    env_sections = [s for s in cp.sections() if s == "env" or s.startswith("env.")]
    if not env_sections:
        src.fail("env", None, "no [env] or [env.<name>] section")
    if not methods:
        src.fail("method", None, "no [method.<id>] section")

    configs = []
    for section in env_sections:
        opts = {k: _value(v) for k, v in cp[section].items()}
        kind = opts.pop("kind", section.partition(".")[2] or None)
        gamma = float(opts.pop("gamma", 0.99))
        ds = dict(dataset)
        for k in _DATASET_KEYS:
            if k in opts:
                ds[k] = opts.pop(k)
        label = section.partition(".")[2] or kind
        try:
            env = EnvSpec(kind, gamma, opts)
            mdp = env.build(np.random.default_rng(0))
            env_methods = []
            for m_section, spec, named, m_opts, m_label in methods:
                if named is not None:
                    prior = NAMED_PRIORS[named](mdp.n_states)
                    spec = RegularizerSpec(label=m_label, t_reg=prior, **m_opts)
                env_methods.append(spec)
            dcfg = DatasetConfig(seed=base_seed, **ds)
            dcfg.size_for(mdp.n_states, mdp.n_actions)
            configs.append(SweepConfig(env, env_methods, grid, n_datasets, dcfg, label))
        except (TypeError, DiscregError) as exc:
            src.fail(section, None, str(exc))
    return configs
