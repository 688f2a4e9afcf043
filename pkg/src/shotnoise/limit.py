"""The Gaussian limit ``X(u) = B(1 - u) + D(u)`` on finite grids.

``B`` is a Brownian motion and ``D`` an independent centered Gaussian process
with independent values and ``E D(u)**2 = u``. Because ``D`` has no path
version, only grid samples are offered.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from shotnoise.rng import RngStream

__all__ = [
    "LimitGridSample",
    "limit_covariance",
    "limit_covariance_matrix",
    "sample_limit_fdd",
    "sample_limit_batch",
    "cramer_wold_variance",
]


def _check_grid(u_grid) -> np.ndarray:
    u = np.asarray(u_grid, dtype=float).reshape(-1)
    if len(u) == 0:
        raise ValueError("u_grid is empty")
    if u[0] < 0.0 or u[-1] > 1.0 or np.any((u < 0.0) | (u > 1.0)):
        raise ValueError("u_grid must lie in [0, 1]")
    if np.any(np.diff(u) <= 0.0):
        raise ValueError("u_grid not increasing")
    return u


def limit_covariance(u: float, v: float) -> float:
    """``(1-u) ^ (1-v)`` off the diagonal and 1 on it (exact equality)."""
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise ValueError("u and v must lie in [0, 1]")
    if u == v:
        return 1.0
    return min(1.0 - u, 1.0 - v)


def limit_covariance_matrix(u_grid) -> np.ndarray:
    u = np.asarray(u_grid, dtype=float).reshape(-1)
    c = np.minimum.outer(1.0 - u, 1.0 - u)
    c[np.equal.outer(u, u)] = 1.0
    return c


@dataclass(frozen=True)
class LimitGridSample:
    u_grid: np.ndarray
    values: np.ndarray


def sample_limit_batch(u_grid, rng: RngStream, n: int) -> np.ndarray:
    """``n`` independent draws of ``(X(u_1), ..., X(u_K))``, shape ``(n, K)``."""
    u = _check_grid(u_grid)
    k = len(u)
    # B at the reversed times 1 - u_K < ... < 1 - u_1, built from increments
    v = (1.0 - u)[::-1]
    steps = np.diff(np.concatenate(([0.0], v)))
    incr = rng.gen.standard_normal((n, k)) * np.sqrt(steps)
    b = np.cumsum(incr, axis=1)[:, ::-1]
    d = rng.gen.standard_normal((n, k)) * np.sqrt(u)
    return b + d


def sample_limit_fdd(u_grid, rng: RngStream) -> LimitGridSample:
    u = _check_grid(u_grid)
    return LimitGridSample(u, sample_limit_batch(u, rng, 1)[0])


def cramer_wold_variance(alphas, u_grid) -> float:
    """Variance of ``sum_i alpha_i X(u_i)`` for ``u_1 < ... < u_n``."""
    a = np.asarray(alphas, dtype=float).reshape(-1)
    u = np.asarray(u_grid, dtype=float).reshape(-1)
    if len(a) != len(u):
        raise ValueError("alphas and u_grid lengths differ")
    if np.any(np.diff(u) <= 0.0):
        raise ValueError("u_grid not increasing")
    total = float(np.sum(a * a))
    for m in range(1, len(a)):
        total += 2.0 * a[m] * (1.0 - u[m]) * float(np.sum(a[:m]))
    return total
