"""Regularization methods and their parameter formulas.

All methods share the weighted-average form
``T_hat(s, a) = (1 - eps(s, a)) * T_mle(s, a) + eps(s, a) * T_reg(s, a)``:

* discount regularization: ``T_reg`` is the zeros matrix and
  ``eps = (gamma - gamma_p) / gamma``;
* Dirichlet priors: ``T_reg`` is the prior mean and
  ``eps = sum(alpha) / (sum(c) + sum(alpha))``;
* epsilon-greedy planning: ``T_reg(s, a)`` is the across-action mean row.

The state-action-specific weight ``eps*`` minimizes the transition-row MSE
of the uniform-prior estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from .errors import ParameterError
from .estimation import (
    as_counts,
    mle_estimate,
    uniform_matrix,
    weighted_average_regularize,
    zeros_matrix,
)
from .mdp import Mdp

ZERO_TOL = 1e-14
DEFAULT_EPS_GRID = tuple(np.round(np.arange(0, 101) / 100, 2))


# ---------------------------------------------------------------------------
# Discount factor <-> weight <-> implied prior
# ---------------------------------------------------------------------------

def discount_to_eps(gamma: float, gamma_p: float) -> float:
    """Weight on the zeros matrix equivalent to planning with ``gamma_p``."""
    if not 0 < gamma < 1:
        raise ParameterError(f"gamma must lie in (0, 1), got {gamma}")
    if not 0 <= gamma_p <= gamma:
        raise ParameterError(f"gamma_p must lie in [0, gamma={gamma}], got {gamma_p}")
    return (gamma - gamma_p) / gamma


def eps_to_discount(gamma: float, eps: float) -> float:
    if not 0 <= eps <= 1:
        raise ParameterError(f"eps must lie in [0, 1], got {eps}")
    return gamma * (1.0 - eps)


class ImpliedPrior(NamedTuple):
    """Uniform Dirichlet prior matching a planning discount factor.

    ``alpha`` has shape (N, A, N); ``magnitude`` is its row sum.  Rows in
    ``empty`` had no data, so no finite prior reproduces the discount there
    and the empty-row convention (weight one) applies instead.
    """

    alpha: np.ndarray
    magnitude: np.ndarray
    empty: np.ndarray


def implied_prior_magnitude(gamma: float, gamma_p: float, counts) -> ImpliedPrior:
    """Per-row uniform prior with ``sum alpha = (gamma - gamma_p) / gamma_p * c``."""
    if gamma_p == 0:
        raise ParameterError(
            "gamma_p = 0 implies a prior of infinite magnitude for every (s, a)"
        )
    discount_to_eps(gamma, gamma_p)  # range checks
    c = as_counts(counts).astype(float)
    n = c.shape[0]
    totals = c.sum(axis=2)
    magnitude = (gamma - gamma_p) / gamma_p * totals
    alpha = np.repeat((magnitude / n)[..., None], n, axis=2)
    return ImpliedPrior(alpha, magnitude, totals == 0)


def implied_prior_curve(gamma: float, n_states: int, n_obs: float, gamma_ps) -> np.ndarray:
    """Per-cell uniform prior ``alpha_i`` as a function of ``gamma_p``."""
    gamma_ps = np.asarray(gamma_ps, dtype=float)
    if np.any(gamma_ps <= 0) or np.any(gamma_ps > gamma):
        raise ParameterError("gamma_p values must lie in (0, gamma]")
    return (gamma - gamma_ps) / gamma_ps * n_obs / n_states


def implied_prior_estimate(gamma: float, gamma_p: float, counts) -> np.ndarray:
    """Posterior mean under the prior implied by ``gamma_p``.

    ``gamma_p = 0`` is handled as the limit (every row becomes uniform).
    """
    c = as_counts(counts).astype(float)
    n = c.shape[0]
    if gamma_p == 0:
        discount_to_eps(gamma, gamma_p)
        return np.full(c.shape, 1.0 / n)
    prior = implied_prior_magnitude(gamma, gamma_p, c)
    post = c + prior.alpha
    tot = post.sum(axis=2, keepdims=True)
    out = np.divide(post, tot, out=np.full(c.shape, 1.0 / n), where=tot > 0)
    return out


# ---------------------------------------------------------------------------
# MSE of the uniform-prior estimate and its minimizer
# ---------------------------------------------------------------------------

def _totals(counts_or_totals, shape):
    c = np.asarray(counts_or_totals, dtype=float)
    if c.ndim == len(shape) + 1:
        c = c.sum(axis=-1)
    return np.broadcast_to(c, shape)


def mse_prior(t_true, totals, eps, t_reg) -> np.ndarray:
    """Row MSE of ``(1 - eps) * T_mle + eps * t_reg`` with ``c`` multinomial draws.

    Variance ``(1 - eps)^2 T_i (1 - T_i) / c`` plus squared bias
    ``eps^2 (t_reg_i - T_i)^2``, summed over successors.
    """
    t_true = np.asarray(t_true, dtype=float)
    c = _totals(totals, t_true.shape[:-1])
    if np.any(c <= 0):
        raise ParameterError("MLE variance is undefined for rows with no observations")
    eps = np.asarray(eps, dtype=float)
    var = np.sum(t_true * (1 - t_true), axis=-1) / c
    bias = np.sum((np.asarray(t_reg, dtype=float) - t_true) ** 2, axis=-1)
    return (1 - eps) ** 2 * var + eps**2 * bias


def mse_uniform(t_true, totals, eps) -> np.ndarray:
    """Row MSE of the uniform-prior estimate (squared bias term)."""
    t_true = np.asarray(t_true, dtype=float)
    n = t_true.shape[-1]
    return mse_prior(t_true, totals, eps, 1.0 / n)


def k_factor(t_plugin) -> np.ndarray:
    """``K = sum T(1-T) / sum (1/N - T)^2`` per row (``inf`` for uniform rows)."""
    t = np.asarray(t_plugin, dtype=float)
    n = t.shape[-1]
    num = np.sum(t * (1 - t), axis=-1)
    den = np.sum((1.0 / n - t) ** 2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(den > ZERO_TOL, num / np.where(den > ZERO_TOL, den, 1.0), np.inf)
    return np.where(np.abs(num) <= ZERO_TOL, np.where(den > ZERO_TOL, 0.0, np.inf), k)


def eps_star_uniform(t_plugin, counts) -> np.ndarray:
    """MSE-minimizing weight ``K / (K + c)`` for each ``(s, a)``.

    ``counts`` may be the full (N, A, N) tensor or the (N, A) row totals.
    Rows with ``c = 0`` or a uniform plug-in get 1; deterministic plug-in
    rows get 0.
    """
    t = np.asarray(t_plugin, dtype=float)
    c = _totals(counts, t.shape[:-1])
    k = k_factor(t)
    with np.errstate(invalid="ignore"):
        eps = np.where(np.isinf(k), 1.0, k / (k + np.where(c > 0, c, 1.0)))
    return np.where(c == 0, 1.0, eps)


def eps_star_posterior_sampled(counts, prior=1.0, n_samples: int = 100,
                               eps_grid=DEFAULT_EPS_GRID, seed: int = 0) -> np.ndarray:
    """Grid weight minimizing MSE averaged over Dirichlet posterior draws.

    For each row, ``n_samples`` transition rows are drawn from
    ``Dirichlet(c + prior)`` and each draw is treated as the true row in
    :func:`mse_uniform`.  Row ``(s, a)`` uses the generator seeded with
    ``[seed, s * A + a]`` so the result does not depend on evaluation order.
    """
    if n_samples < 1:
        raise ParameterError("n_samples must be at least 1")
    grid = np.asarray(eps_grid, dtype=float)
    if grid.size == 0 or np.any(grid < 0) or np.any(grid > 1):
        raise ParameterError("eps_grid must be nonempty with values in [0, 1]")
    c = as_counts(counts).astype(float)
    n, a, _ = c.shape
    alpha = c + np.broadcast_to(np.asarray(prior, dtype=float), c.shape)
    totals = c.sum(axis=2)
    out = np.ones((n, a))
    for s in range(n):
        for k in range(a):
            if totals[s, k] == 0:
                continue
            rng = np.random.default_rng([seed, s * a + k])
            draws = rng.dirichlet(alpha[s, k], size=n_samples)
            var = np.mean(np.sum(draws * (1 - draws), axis=1)) / totals[s, k]
            bias = np.mean(np.sum((1.0 / n - draws) ** 2, axis=1))
            mse = (1 - grid) ** 2 * var + grid**2 * bias
            out[s, k] = grid[np.argmin(mse)]
    return out


# ---------------------------------------------------------------------------
# Epsilon-greedy regularization
# ---------------------------------------------------------------------------

def eps_greedy_regularize(t_mle, eps) -> np.ndarray:
    """Average each action's row with the across-action mean row of its state."""
    if not 0 <= eps <= 1:
        raise ParameterError(f"eps must lie in [0, 1], got {eps}")
    t = np.asarray(t_mle, dtype=float)
    return (1 - eps) * t + eps * t.mean(axis=1, keepdims=True)


def _state_terms(t_state, c_state):
    """Per-action variance/bias pieces of the epsilon-greedy MSE at one state."""
    t = np.asarray(t_state, dtype=float)
    c = np.asarray(c_state, dtype=float)
    if np.any(c <= 0):
        raise ParameterError("epsilon-greedy MSE needs at least one observation per action")
    v = t * (1 - t) / c[:, None]             # (A, N) per-cell MLE variance
    v_other = v.sum(axis=0) - v               # sum over m != k
    drift = t.sum(axis=0) - t.shape[0] * t    # sum_{m != k} (T_m - T_k)
    return v, v_other, drift


def eps_greedy_mse(t_state, c_state, eps, action: int) -> float:
    """MSE of the epsilon-greedy estimate of row ``action`` at one state.

    ``t_state`` is (A, N) true rows, ``c_state`` the (A,) observation counts.
    """
    a = np.asarray(t_state).shape[0]
    v, v_other, drift = _state_terms(t_state, c_state)
    eps = np.asarray(eps, dtype=float)[..., None]
    own = (1 - eps + eps / a) ** 2 * v[action]
    other = (eps / a) ** 2 * v_other[action]
    bias = (eps / a) ** 2 * drift[action] ** 2
    return np.sum(own + other + bias, axis=-1)


def eps_star_eps_greedy(t_plugin, counts) -> np.ndarray:
    """Closed-form MSE-minimizing epsilon-greedy weight per ``(s, a)``.

    Setting the derivative of :func:`eps_greedy_mse` to zero gives
    ``b V_k / (b^2 V_k + (V_other + B) / A^2)`` with ``b = 1 - 1/A``; the
    result is clipped to [0, 1].  States whose action rows are identical
    get 1.
    """
    t = np.asarray(t_plugin, dtype=float)
    n, a, _ = t.shape
    c = _totals(counts, (n, a))
    out = np.ones((n, a))
    b = 1.0 - 1.0 / a
    for s in range(n):
        v, v_other, drift = _state_terms(t[s], c[s])
        for k in range(a):
            spread = np.sum((t[s] - t[s, k]) ** 2)
            if spread <= ZERO_TOL:
                continue
            vk = v[k].sum()
            den = b * b * vk + (v_other[k].sum() + np.sum(drift[k] ** 2)) / a**2
            out[s, k] = 1.0 if den <= ZERO_TOL else min(1.0, max(0.0, b * vk / den))
    return out


# ---------------------------------------------------------------------------
# Declarative method selection
# ---------------------------------------------------------------------------

GLOBAL_METHODS = (
    "discount_reg", "uniform_prior", "uniform_average", "zeros_average",
    "implied_prior", "custom_prior", "custom_average", "eps_greedy",
)
PRIOR_METHODS = ("uniform_prior", "custom_prior")
SPECIFIC_METHODS = ("sa_specific", "sa_specific_ps")
METHODS = GLOBAL_METHODS + SPECIFIC_METHODS


@dataclass(frozen=True)
class RegularizerSpec:
    """Which regularizer to apply, and how strongly.

    Global methods take a single strength ``eps`` (``discount_reg`` and
    ``implied_prior`` may instead be given ``gamma_p``).

    * ``*_average`` methods and ``eps_greedy`` use the same weight ``eps``
      for every row.
    * ``uniform_prior`` and ``custom_prior`` are Dirichlet-style priors with
      one magnitude ``m`` for every row, so row ``(s, a)`` gets weight
      ``m / (m + c(s, a))``.  ``m`` is ``magnitude`` if given, otherwise the
      value that yields weight ``eps`` at the mean row count.
    * ``custom_*`` need ``t_reg``.
    * ``sa_specific`` uses the MLE as plug-in; ``sa_specific_ps`` selects
      from ``eps_grid`` by posterior sampling under a flat ``prior``.
    """

    method: str
    eps: Optional[float] = None
    gamma_p: Optional[float] = None
    t_reg: Optional[np.ndarray] = None
    n_samples: int = 100
    eps_grid: tuple = DEFAULT_EPS_GRID
    prior: float = 1.0
    magnitude: Optional[float] = None
    label: Optional[str] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.method.startswith("custom") and self.t_reg is None:
            raise ParameterError(f"{self.method} needs t_reg")
        if self.magnitude is not None and self.magnitude < 0:
            raise ParameterError("magnitude must be nonnegative")
        if self.eps is not None and not 0 <= self.eps <= 1:
            raise ParameterError(f"eps must lie in [0, 1], got {self.eps}")

    @property
    def id(self) -> str:
        return self.label or self.method

    @property
    def is_global(self) -> bool:
        return self.method in GLOBAL_METHODS

    def at(self, eps: float) -> "RegularizerSpec":
        """Copy with global strength ``eps`` (clears ``gamma_p``/``magnitude``)."""
        return replace(self, eps=float(eps), gamma_p=None, magnitude=None)

    def weight(self, gamma: float) -> float:
        if self.eps is not None:
            return self.eps
        if self.gamma_p is not None:
            return discount_to_eps(gamma, self.gamma_p)
        raise ParameterError(f"{self.method} needs eps or gamma_p")

    def planning_discount(self, gamma: float) -> float:
        if self.gamma_p is not None:
            discount_to_eps(gamma, self.gamma_p)
            return self.gamma_p
        return eps_to_discount(gamma, self.weight(gamma))


def fixed_magnitude_weights(counts, eps=None, magnitude=None) -> np.ndarray:
    """Per-row weight ``m / (m + c)`` of a prior with one magnitude ``m``.

    With ``eps`` given instead, ``m = eps / (1 - eps) * mean(c)`` so rows
    holding the mean count get weight exactly ``eps``.
    """
    c = as_counts(counts).astype(float).sum(axis=2)
    if magnitude is not None:
        tot = magnitude + c
        return np.divide(magnitude, tot, out=np.ones_like(c), where=tot > 0)
    if eps is None or not 0 <= eps <= 1:
        raise ParameterError(f"eps must lie in [0, 1], got {eps}")
    cbar = c.mean()
    num = eps * cbar
    den = num + (1 - eps) * c
    return np.divide(num, den, out=np.ones_like(c), where=den > 0)


def regularize(spec: RegularizerSpec, counts, gamma: float, seed: int = 0):
    """Planning transitions, planning discount and per-(s, a) weights.

    Returns ``(transitions, gamma_plan, eps_field)``.
    """
    c = as_counts(counts)
    n, a, _ = c.shape
    t_mle, empty = mle_estimate(c)
    m = spec.method
    if m == "discount_reg":
        gamma_p = spec.planning_discount(gamma)
        return t_mle, gamma_p, np.full((n, a), discount_to_eps(gamma, gamma_p))
    if m == "implied_prior":
        gamma_p = spec.planning_discount(gamma)
        t = implied_prior_estimate(gamma, gamma_p, c)
        eps = np.where(empty, 1.0, discount_to_eps(gamma, gamma_p))
        return t, gamma, eps
    if m == "eps_greedy":
        eps = spec.weight(gamma)
        return eps_greedy_regularize(t_mle, eps), gamma, np.full((n, a), eps)
    if m in ("uniform_average", "zeros_average", "custom_average"):
        t_reg = {"uniform_average": uniform_matrix(n), "zeros_average": zeros_matrix(n)}.get(m, spec.t_reg)
        eps = np.where(empty, 1.0, spec.weight(gamma))
        return weighted_average_regularize(t_mle, t_reg, eps, empty), gamma, eps
    if m in PRIOR_METHODS:
        t_reg = uniform_matrix(n) if m == "uniform_prior" else spec.t_reg
        eps = fixed_magnitude_weights(c, spec.weight(gamma) if spec.magnitude is None else None,
                                      spec.magnitude)
        return weighted_average_regularize(t_mle, t_reg, eps, empty), gamma, eps
    if m == "sa_specific":
        eps = eps_star_uniform(t_mle, c)
    else:
        eps = eps_star_posterior_sampled(c, spec.prior, spec.n_samples, spec.eps_grid, seed)
    return weighted_average_regularize(t_mle, uniform_matrix(n), eps, empty), gamma, eps


def apply_regularizer(spec: RegularizerSpec, counts, mdp_template: Mdp, seed: int = 0) -> Mdp:
    """Planning MDP for ``spec``; rewards are copied from ``mdp_template``."""
    t, gamma_plan, _ = regularize(spec, counts, mdp_template.gamma, seed)
    return Mdp(mdp_template.rewards, t, gamma_plan)
