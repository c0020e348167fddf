"""Tabular test environments.

* ``random_chain``: 10 states, 2 actions, five random successors per (s, a).
* ``river_swim``: 6 states; swim left (deterministic) or right against the
  current.
* ``strens_loop``: 9 states in two loops joined at a hub, with action slip.
* ``controlled_loop``: 10-state cycle whose two actions interpolate between
  "stay" and "leave" dynamics.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ParameterError
from .mdp import Mdp

LEFT, RIGHT = 0, 1
ACTION_A, ACTION_B = 0, 1


def make_random_chain(seed=None, n_states: int = 10, n_actions: int = 2,
                      n_successors: int = 5, gamma: float = 0.99) -> Mdp:
    """Random MDP with ``n_successors`` nonzero successors per (s, a).

    Successor probabilities are Uniform[0, 1] draws normalized to one;
    rewards are Uniform[0, 1].  ``seed`` may be an int or a Generator.
    """
    rng = np.random.default_rng(seed)
    t = np.zeros((n_states, n_actions, n_states))
    for s in range(n_states):
        for a in range(n_actions):
            succ = rng.choice(n_states, size=n_successors, replace=False)
            p = rng.uniform(0.0, 1.0, size=n_successors)
            t[s, a, succ] = p / p.sum()
    r = rng.uniform(0.0, 1.0, size=(n_states, n_actions))
    return Mdp(r, t, gamma)


def _check_probs(*ps):
    for p in ps:
        if not 0 <= p <= 1:
            raise ParameterError(f"probability {p} outside [0, 1]")


def make_river_swim(n_states: int = 6, p_right: float = 0.3, p_stay: float = 0.6,
                    p_left: float = 0.1, p_stay_start: float = 0.7,
                    p_left_end: float = 0.3, r_left: float = 5 / 1000,
                    r_right: float = 1.0, gamma: float = 0.99) -> Mdp:
    """River Swim.

    Action 0 swims left with probability one (state 0 stays put).  Action 1
    swims against the current: interior states move right/stay/left with
    ``p_right``/``p_stay``/``p_left``; state 0 moves right or stays
    (``p_stay_start``); the last state stays or falls back (``p_left_end``).
    Reward ``r_left`` for swimming left at state 0, ``r_right`` for swimming
    right at the last state.
    """
    _check_probs(p_right, p_stay, p_left, p_stay_start, p_left_end)
    if abs(p_right + p_stay + p_left - 1) > 1e-12:
        raise ParameterError("p_right + p_stay + p_left must equal 1")
    if n_states < 2:
        raise ParameterError("river swim needs at least two states")
    n = n_states
    t = np.zeros((n, 2, n))
    for s in range(n):
        t[s, LEFT, max(s - 1, 0)] = 1.0
    t[0, RIGHT, 0] = p_stay_start
    t[0, RIGHT, 1] = 1 - p_stay_start
    for s in range(1, n - 1):
        t[s, RIGHT, s - 1] = p_left
        t[s, RIGHT, s] = p_stay
        t[s, RIGHT, s + 1] = p_right
    t[n - 1, RIGHT, n - 1] = 1 - p_left_end
    t[n - 1, RIGHT, n - 2] = p_left_end
    r = np.zeros((n, 2))
    r[0, LEFT] = r_left
    r[n - 1, RIGHT] = r_right
    return Mdp(r, t, gamma)


def river_swim_left_right_prior(n_states: int = 6) -> np.ndarray:
    """Expert prior: left deterministically moves left, right moves right."""
    n = n_states
    t = np.zeros((n, 2, n))
    for s in range(n):
        t[s, LEFT, max(s - 1, 0)] = 1.0
        t[s, RIGHT, min(s + 1, n - 1)] = 1.0
    return t


def make_strens_loop(slip: float = 0.5, left_a: str = "advance",
                     gamma: float = 0.99) -> Mdp:
    """Two 5-step loops sharing hub state 0.

    Right loop 0-1-2-3-4-0, left loop 0-5-6-7-8-0.  From the hub, action a
    enters the right loop and action b the left loop.  Both actions advance
    around the right loop.  Action b advances around the left loop; action a
    there either also advances toward the hub (``left_a="advance"``) or
    jumps straight back to it (``"reset"``).  Re-entering the hub from
    state 4 pays 1 and from state 8 pays 2 (only via action b when
    resetting).  With probability ``slip`` the executed action is chosen
    uniformly at random.
    """
    if not 0 <= slip <= 1:
        raise ParameterError(f"slip must lie in [0, 1], got {slip}")
    if left_a not in ("advance", "reset"):
        raise ParameterError("left_a must be 'advance' or 'reset'")
    nxt = np.zeros((9, 2), dtype=int)
    nxt[0] = (1, 5)
    for s in range(1, 5):
        nxt[s] = (s + 1) % 5
    for s in range(5, 9):
        step = s + 1 if s < 8 else 0
        nxt[s] = (step if left_a == "advance" else 0, step)
    det = np.zeros((9, 2, 9))
    det[np.arange(9)[:, None], np.arange(2)[None, :], nxt] = 1.0
    mean = det.mean(axis=1, keepdims=True)
    t = (1 - slip) * det + slip * mean
    r = np.zeros((9, 2))
    r[4, :] = 1.0
    r[8, ACTION_B] = 2.0
    if left_a == "advance":
        r[8, ACTION_A] = 2.0
    return Mdp(r, t, gamma)


def make_controlled_loop(kappa: float, lam: float, n_states: int = 10,
                         reward_states=(7, 8, 9), gamma: float = 0.99) -> Mdp:
    """Cycle with "probably stay" (action 0) and "probably leave" (action 1).

    ``leave = kappa * shift + (1 - kappa) * uniform`` and
    ``stay = 0.75 * I + 0.25 * uniform``; action 0 is
    ``(1 - lam) * stay + lam * leave`` and action 1 the reverse mixture.
    """
    if not 0 <= kappa <= 1:
        raise ParameterError(f"kappa must lie in [0, 1], got {kappa}")
    if not 0 <= lam <= 0.5:
        raise ParameterError(f"lambda must lie in [0, 0.5], got {lam}")
    n = n_states
    t = _controlled_loop_transitions(kappa, lam, n)
    r = np.zeros((n, 2))
    r[list(reward_states), :] = 1.0
    return Mdp(r, t, gamma)


def _controlled_loop_transitions(kappa, lam, n):
    uniform = np.full((n, n), 1.0 / n)
    shift = np.roll(np.eye(n), 1, axis=1)
    leave = kappa * shift + (1 - kappa) * uniform
    stay = 0.75 * np.eye(n) + 0.25 * uniform
    return np.stack([(1 - lam) * stay + lam * leave, (1 - lam) * leave + lam * stay], axis=1)


ENV_KINDS = ("random_chain", "river_swim", "strens_loop", "controlled_loop")


@dataclass(frozen=True)
class EnvSpec:
    """Serializable environment description.

    ``params`` holds constructor keyword arguments other than ``gamma``.
    ``random_chain`` draws a fresh MDP from ``seed`` (or from the generator
    passed to :meth:`build`).
    """

    kind: str
    gamma: float = 0.99
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ENV_KINDS:
            raise ParameterError(f"unknown environment {self.kind!r}; choose from {ENV_KINDS}")

    @property
    def resampled(self) -> bool:
        return self.kind == "random_chain"

    def build(self, rng=None) -> Mdp:
        p = dict(self.params)
        if self.kind == "random_chain":
            seed = rng if rng is not None else p.pop("seed", None)
            p.pop("seed", None)
            return make_random_chain(seed, gamma=self.gamma, **p)
        if self.kind == "river_swim":
            return make_river_swim(gamma=self.gamma, **p)
        if self.kind == "strens_loop":
            return make_strens_loop(gamma=self.gamma, **p)
        p.setdefault("kappa", 1.0)
        p.setdefault("lam", 0.0)
        return make_controlled_loop(gamma=self.gamma, **p)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d) -> "EnvSpec":
        return cls(d["kind"], float(d.get("gamma", 0.99)), dict(d.get("params", {})))
