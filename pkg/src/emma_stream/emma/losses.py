"""Latency and variance regularizers computed from the alignment matrix.

Positions are 1-indexed throughout: reading the first source token during
the first prediction is a delay of 1, not 0.
"""

from __future__ import annotations

import numpy as np

from ..numerics import matrix as mx

__all__ = [
    "expected_delays",
    "ideal_delays",
    "latency_loss",
    "alignment_variance",
    "variance_loss",
]


def expected_delays(alpha) -> np.ndarray:
    """Expected source position per target step: d_i = sum_j j * alpha[i, j]."""
    alpha = mx.as_matrix(alpha)
    positions = np.arange(1, alpha.shape[1] + 1, dtype=np.float64)
    return alpha @ positions


def ideal_delays(source_len: int, target_len: int) -> np.ndarray:
    """Delays of a uniform-rate policy: d*_i = (i - 1) * |x| / |y|."""
    if source_len < 1 or target_len < 1:
        raise ValueError("ideal delays need positive sequence lengths")
    return np.arange(target_len, dtype=np.float64) * (source_len / target_len)


def latency_loss(delays, source_len: int, target_len: int,
                 mode: str = "ideal-lag") -> float:
    """Mean deviation of the expected delays from a latency target.

    "ideal-lag" penalizes mean(d_i - d*_i), the gap to the uniform-rate
    policy; "mean" penalizes the raw mean delay.
    """
    if target_len < 1:
        raise ValueError("latency loss needs a positive target length")
    delays = np.asarray(delays, dtype=np.float64).ravel()
    if delays.size != target_len:
        raise ValueError(
            f"got {delays.size} delays for target length {target_len}")
    if mode == "ideal-lag":
        return float(np.mean(delays - ideal_delays(source_len, target_len)))
    if mode == "mean":
        return float(np.mean(delays))
    raise ValueError(f"unknown latency mode: {mode!r}")


def alignment_variance(alpha) -> np.ndarray:
    """Per-step variance of the aligned source position.

    v_i = sum_j j^2 alpha[i, j] - (sum_j j alpha[i, j])^2. With row mass
    below one the usual shortcut can undershoot, but it stays above -1e-12
    for any matrix produced by the alignment recurrence; the tests pin that.
    """
    alpha = mx.as_matrix(alpha)
    positions = np.arange(1, alpha.shape[1] + 1, dtype=np.float64)
    first = alpha @ positions
    second = alpha @ (positions * positions)
    return second - first * first


def variance_loss(variances) -> float:
    variances = np.asarray(variances, dtype=np.float64).ravel()
    if variances.size == 0:
        raise ValueError("variance loss needs at least one entry")
    return float(np.mean(variances))
