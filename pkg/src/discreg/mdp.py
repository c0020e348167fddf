"""Finite MDPs and exact planning.

Policies, value functions and Q-functions are plain numpy arrays of shape
``(N,)`` (int), ``(N,)`` and ``(N, A)`` respectively.  Transition tensors
are indexed ``(s, a, s')``.  Rows may be substochastic (sum < 1), which is
how discount regularization is expressed as a weighted average with the
zeros matrix.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModelError, NumericalError

ROW_SUM_TOL = 1e-9
TIE_TOL = 1e-9
GAP_TOL = 1e-6


def _frozen(x, dtype=float):
    arr = np.array(x, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Mdp:
    """A tabular MDP ``<S, A, R, T, gamma>``.

    Parameters
    ----------
    rewards : array_like, shape (N, A)
        Expected immediate reward ``r(s, a)``.
    transitions : array_like, shape (N, A, N)
        ``transitions[s, a, s']``.  Rows must be nonnegative and sum to at
        most one.
    gamma : float
        Discount factor in ``[0, 1)``.
    """

    rewards: np.ndarray
    transitions: np.ndarray
    gamma: float
    n_states: int = field(init=False)
    n_actions: int = field(init=False)

    def __post_init__(self):
        r = _frozen(self.rewards)
        t = _frozen(self.transitions)
        if r.ndim != 2:
            raise InvalidModelError(f"rewards must be 2-d (N, A), got shape {r.shape}")
        n, a = r.shape
        if n < 1 or a < 1:
            raise InvalidModelError("need at least one state and one action")
        if t.shape != (n, a, n):
            raise InvalidModelError(
                f"transitions shape {t.shape} does not match rewards shape {r.shape}"
            )
        if not np.all(np.isfinite(r)):
            raise InvalidModelError("rewards contain non-finite entries")
        if not np.all(np.isfinite(t)):
            raise InvalidModelError("transitions contain non-finite entries")
        if np.any(t < 0):
            raise InvalidModelError("transitions contain negative entries")
        sums = t.sum(axis=2)
        if np.any(sums > 1 + ROW_SUM_TOL):
            s, k = np.unravel_index(np.argmax(sums), sums.shape)
            raise InvalidModelError(
                f"transition row ({s}, {k}) sums to {sums[s, k]!r} > 1"
            )
        gamma = float(self.gamma)
        if not (0.0 <= gamma < 1.0):
            raise InvalidModelError(f"gamma must lie in [0, 1), got {gamma}")
        object.__setattr__(self, "rewards", r)
        object.__setattr__(self, "transitions", t)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "n_states", n)
        object.__setattr__(self, "n_actions", a)

    @property
    def is_stochastic(self) -> bool:
        """True when every row sums to one within ``ROW_SUM_TOL``."""
        return bool(np.all(np.abs(self.transitions.sum(axis=2) - 1.0) <= ROW_SUM_TOL))

    def replace(self, **changes) -> "Mdp":
        return dataclasses.replace(self, **changes)


@dataclass
class Solution:
    """Output of a planner.  Unpacks as ``v, q, policy``."""

    v: np.ndarray
    q: np.ndarray
    policy: np.ndarray
    converged: bool = True
    iterations: int = 0
    deltas: list = field(default_factory=list, repr=False)

    def __iter__(self):
        return iter((self.v, self.q, self.policy))


def bellman_q(mdp: Mdp, v: np.ndarray) -> np.ndarray:
    """One-step lookahead ``r(s,a) + gamma * sum_s' T(s,a,s') v(s')``."""
    return mdp.rewards + mdp.gamma * (mdp.transitions @ v)


def greedy_policy(q, tol: float = TIE_TOL) -> np.ndarray:
    """Per-state argmax of ``q``; ties within ``tol`` go to the lowest index."""
    q = np.asarray(q, dtype=float)
    best = q.max(axis=1, keepdims=True)
    return np.argmax(q >= best - tol, axis=1)


def q_gap(q) -> np.ndarray:
    """Best minus second-best action value per state (``inf`` with one action)."""
    q = np.asarray(q, dtype=float)
    if q.shape[1] < 2:
        return np.full(q.shape[0], np.inf)
    top2 = np.sort(q, axis=1)[:, -2:]
    return top2[:, 1] - top2[:, 0]


def policies_equivalent(q1, pi1, q2, pi2, gap_tol: float = GAP_TOL) -> bool:
    """Compare two greedy policies on states that are not near-ties.

    A state is compared only when its Q-gap exceeds ``gap_tol`` under both
    Q-functions; elsewhere either action is acceptable.
    """
    mask = (q_gap(q1) > gap_tol) & (q_gap(q2) > gap_tol)
    return bool(np.all(np.asarray(pi1)[mask] == np.asarray(pi2)[mask]))


def value_iteration(mdp: Mdp, tol: float = 1e-10, max_iters: int = 100_000) -> Solution:
    """Value iteration with sup-norm stopping rule ``|V_k+1 - V_k| < tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    v = np.zeros(mdp.n_states)
    deltas = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        q = bellman_q(mdp, v)
        v_new = q.max(axis=1)
        delta = float(np.max(np.abs(v_new - v)))
        deltas.append(delta)
        v = v_new
        if delta < tol:
            converged = True
            break
    q = bellman_q(mdp, v)
    return Solution(v, q, greedy_policy(q), converged, it, deltas)


def evaluate_policy(mdp: Mdp, policy) -> np.ndarray:
    """Exact ``V^pi`` from the linear system ``(I - gamma T_pi) V = R_pi``."""
    policy = np.asarray(policy)
    n = mdp.n_states
    if policy.shape != (n,) or np.any(policy < 0) or np.any(policy >= mdp.n_actions):
        raise ValueError(f"policy {policy!r} is not valid for {n} states, {mdp.n_actions} actions")
    idx = np.arange(n)
    t_pi = mdp.transitions[idx, policy]
    r_pi = mdp.rewards[idx, policy]
    a = np.eye(n) - mdp.gamma * t_pi
    try:
        v = np.linalg.solve(a, r_pi)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"policy evaluation system is singular: {exc}") from exc
    resid = np.max(np.abs(a @ v - r_pi))
    if not np.isfinite(resid) or resid > 1e-8 * max(1.0, np.max(np.abs(v))):
        raise NumericalError(f"policy evaluation residual {resid:.3g} too large")
    return v


def policy_iteration(mdp: Mdp, max_iters: int = 10_000) -> Solution:
    """Howard policy iteration with exact evaluation.

    Gives the same greedy policy as :func:`value_iteration` (up to near-ties)
    in a handful of linear solves, which is what the sweeps rely on.
    """
    pi = greedy_policy(mdp.rewards)
    idx = np.arange(mdp.n_states)
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        v = evaluate_policy(mdp, pi)
        q = bellman_q(mdp, v)
        best = q.max(axis=1)
        improve = best > q[idx, pi] + 1e-12 * np.maximum(1.0, np.abs(best))
        if not improve.any():
            converged = True
            break
        pi = np.where(improve, np.argmax(q, axis=1), pi)
    policy = greedy_policy(q)
    return Solution(evaluate_policy(mdp, policy), q, policy, converged, it)


def solve(mdp: Mdp) -> Solution:
    """Default exact planner."""
    return policy_iteration(mdp)
