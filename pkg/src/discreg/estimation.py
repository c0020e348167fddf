"""Transition estimates from batch count data.

Counts are nonnegative integer arrays of shape ``(N, A, N)`` indexed
``(s, a, s')``; Dirichlet parameters share that shape.  Every regularized
estimate here has the form ``(1 - eps) * T_mle + eps * T_reg`` with ``eps``
stored per ``(s, a)``.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidModelError, ParameterError

ROW_SUM_TOL = 1e-9


def as_counts(counts) -> np.ndarray:
    c = np.asarray(counts)
    if c.ndim != 3 or c.shape[0] != c.shape[2]:
        raise InvalidModelError(f"counts must have shape (N, A, N), got {c.shape}")
    if np.any(c < 0):
        raise InvalidModelError("counts must be nonnegative")
    return c


def row_totals(counts) -> np.ndarray:
    """``c_{n,k} = sum_j c_{n,k,j}``, shape ``(N, A)``."""
    return as_counts(counts).sum(axis=2)


def mle_estimate(counts):
    """Maximum likelihood transition estimate.

    Returns
    -------
    t_mle : ndarray, shape (N, A, N)
        Normalized counts; rows without data are all zero.
    empty : ndarray of bool, shape (N, A)
        True where the row had no observations.
    """
    c = as_counts(counts).astype(float)
    tot = c.sum(axis=2, keepdims=True)
    empty = tot[..., 0] == 0
    t = np.divide(c, tot, out=np.zeros_like(c), where=tot > 0)
    return t, empty


def _check_alpha(alpha, shape):
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != shape:
        alpha = np.broadcast_to(alpha, shape)
    if np.any(~np.isfinite(alpha)) or np.any(alpha <= 0):
        raise ParameterError("Dirichlet parameters must be finite and strictly positive")
    return alpha


def dirichlet_posterior_mean(counts, alpha) -> np.ndarray:
    """Posterior mean ``(c_i + alpha_i) / (sum c + sum alpha)`` per row."""
    c = as_counts(counts).astype(float)
    alpha = _check_alpha(alpha, c.shape)
    post = c + alpha
    return post / post.sum(axis=2, keepdims=True)


def prior_weight(counts, alpha) -> np.ndarray:
    """Weight on the prior mean: ``sum alpha / (sum c + sum alpha)`` per row."""
    c = as_counts(counts).astype(float)
    alpha = _check_alpha(alpha, c.shape)
    mag = alpha.sum(axis=2)
    return mag / (c.sum(axis=2) + mag)


def prior_mean(alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    return alpha / alpha.sum(axis=-1, keepdims=True)


def broadcast_eps(eps, shape) -> np.ndarray:
    """Broadcast a scalar or per-(s, a) weight to ``shape`` and range-check it."""
    eps = np.broadcast_to(np.asarray(eps, dtype=float), shape)
    if np.any(~np.isfinite(eps)) or np.any(eps < 0) or np.any(eps > 1):
        raise ParameterError(f"eps must lie in [0, 1], got range [{eps.min()}, {eps.max()}]")
    return eps


def broadcast_reg(t_reg, shape) -> np.ndarray:
    """Broadcast a regularization matrix to ``(N, A, N)``.

    ``t_reg`` may be a single row (N,), a per-state matrix (N, N) shared
    across actions, or a full tensor.  Each row must sum to 1 or to 0.
    """
    t_reg = np.asarray(t_reg, dtype=float)
    n, a, _ = shape
    if t_reg.shape == (n,):
        t_reg = np.broadcast_to(t_reg, shape)
    elif t_reg.shape == (n, n):
        t_reg = np.broadcast_to(t_reg[:, None, :], shape)
    elif t_reg.shape != shape:
        raise InvalidModelError(f"t_reg shape {t_reg.shape} incompatible with {shape}")
    if np.any(t_reg < 0) or np.any(~np.isfinite(t_reg)):
        raise InvalidModelError("t_reg must be finite and nonnegative")
    sums = t_reg.sum(axis=2)
    ok = (np.abs(sums - 1) <= ROW_SUM_TOL) | (np.abs(sums) <= ROW_SUM_TOL)
    if not np.all(ok):
        raise InvalidModelError("every t_reg row must sum to 1 (prior) or 0 (zeros matrix)")
    return t_reg


def weighted_average_regularize(t_mle, t_reg, eps, empty=None) -> np.ndarray:
    """``(1 - eps[s, a]) * t_mle[s, a] + eps[s, a] * t_reg[s, a]``.

    Rows flagged ``empty`` (by default, rows of ``t_mle`` that sum to zero)
    take the ``t_reg`` row outright, i.e. ``eps`` is forced to one.
    """
    t_mle = np.asarray(t_mle, dtype=float)
    shape = t_mle.shape
    eps = broadcast_eps(eps, shape[:2]).copy()
    t_reg = broadcast_reg(t_reg, shape)
    if empty is None:
        empty = t_mle.sum(axis=2) == 0
    eps[np.asarray(empty, dtype=bool)] = 1.0
    w = eps[..., None]
    return (1.0 - w) * t_mle + w * t_reg


def uniform_matrix(n_states: int) -> np.ndarray:
    return np.full(n_states, 1.0 / n_states)


def zeros_matrix(n_states: int) -> np.ndarray:
    return np.zeros(n_states)
