"""Infinite-lookback soft attention driven by the alignment mass.

beta[i, j] spreads each alignment probability alpha[i, k] over the prefix
1..k in proportion to the softmax energies, so the decoder may attend to
everything read so far. ``beta_recursive`` is the literal double sum used
as an oracle; ``beta_parallel`` is the vectorized form (a reversed
cumulative sum over prefix-normalized terms).
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError, ShapeError
from ..numerics import matrix as mx
from .params import EncDecStates, PolicyHeadParams

__all__ = [
    "attention_energies",
    "beta_recursive",
    "beta_parallel",
    "attention_output",
]


def attention_energies(params: PolicyHeadParams, states: EncDecStates) -> np.ndarray:
    """Positive attention energies e[i, j] = exp(scaled score - row max).

    The row max is subtracted before exponentiation; beta is invariant to
    any per-row shift of the scores (numerator and denominator share the
    factor), so this changes nothing but the floating-point range.
    """
    if not params.has_energy_projections:
        raise ValueError("head has no w_q/w_k energy projections")
    d_k = params.w_q.shape[1]
    scores = (states.s @ params.w_q) @ (states.h @ params.w_k).T / np.sqrt(d_k)
    return mx.exp(scores - scores.max(axis=1, keepdims=True))


def _check_pair(alpha, e) -> tuple[np.ndarray, np.ndarray]:
    alpha = mx.as_matrix(alpha)
    e = mx.as_matrix(e)
    if alpha.shape != e.shape:
        raise ShapeError(f"alpha {alpha.shape} and energies {e.shape} differ")
    if np.any(e <= 0.0) or not np.all(np.isfinite(e)):
        raise DomainError("attention energies must be strictly positive")
    return alpha, e


def beta_recursive(alpha, e) -> np.ndarray:
    """beta[i, j] = sum_{k >= j} alpha[i, k] * e[i, j] / sum_{l <= k} e[i, l]."""
    alpha, e = _check_pair(alpha, e)
    n_target, n_source = alpha.shape
    out = np.zeros_like(alpha)
    for i in range(n_target):
        prefix = np.cumsum(e[i])
        for j in range(n_source):
            total = 0.0
            for k in range(j, n_source):
                total += alpha[i, k] * e[i, j] / prefix[k]
            out[i, j] = total
    return out


def beta_parallel(alpha, e) -> np.ndarray:
    """Vectorized infinite-lookback attention.

    beta = e * flip(cumsum(flip(alpha / cumsum(e)))), all along rows. The
    inner division is a reciprocal-then-multiply so the identical graph runs
    on the reverse-mode tape.
    """
    alpha, e = _check_pair(alpha, e)
    inner = mx.hadamard(alpha, 1.0 / mx.cumsum(e, axis=1))
    return mx.hadamard(e, mx.flip(mx.cumsum(mx.flip(inner), axis=1)))


def attention_output(beta, states: EncDecStates) -> np.ndarray:
    """Context rows c_i = sum_j beta[i, j] v_j."""
    beta = mx.as_matrix(beta)
    if beta.shape[1] != states.source_len:
        raise ShapeError(
            f"beta has {beta.shape[1]} source columns, states have {states.source_len}")
    return mx.matmul(beta, states.v)
