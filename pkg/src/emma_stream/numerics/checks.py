"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import DomainError

__all__ = ["central_difference_gradient", "finite_diff_check"]


def central_difference_gradient(f: Callable[[np.ndarray], float],
                                theta: np.ndarray,
                                h: float = 1e-5) -> np.ndarray:
    """Gradient estimate (f(t + h e_k) - f(t - h e_k)) / 2h per coordinate."""
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    theta = np.asarray(theta, dtype=np.float64).ravel().copy()
    grad = np.empty_like(theta)
    for k in range(theta.size):
        saved = theta[k]
        theta[k] = saved + h
        f_plus = float(f(theta))
        theta[k] = saved - h
        f_minus = float(f(theta))
        theta[k] = saved
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise DomainError(f"objective non-finite at probe for coordinate {k}")
        grad[k] = (f_plus - f_minus) / (2.0 * h)
    return grad


def finite_diff_check(f: Callable[[np.ndarray], float],
                      grad: Callable[[np.ndarray], np.ndarray],
                      theta: np.ndarray,
                      h: float = 1e-5) -> float:
    """Max relative error between an analytic gradient and central differences.

    Per coordinate: |g_analytic - g_central| / max(1e-8, |g_central|).
    """
    theta = np.asarray(theta, dtype=np.float64).ravel()
    g_analytic = np.asarray(grad(theta), dtype=np.float64).ravel()
    if g_analytic.size != theta.size:
        raise ValueError(
            f"gradient size {g_analytic.size} does not match parameter size {theta.size}")
    g_central = central_difference_gradient(f, theta, h)
    denom = np.maximum(1e-8, np.abs(g_central))
    return float(np.max(np.abs(g_analytic - g_central) / denom)) if theta.size else 0.0
