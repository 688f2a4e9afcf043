"""Mergeable moment accumulation and normality diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

__all__ = [
    "MomentAccumulator",
    "merge_tree",
    "NormalityStats",
    "normality_stats",
    "covariance_standard_errors",
    "dkw_epsilon",
    "ecdf_on",
]


class MomentAccumulator:
    """Count, mean vector and centered cross-product matrix of vector samples.

    Batches are folded in with the pairwise (Chan et al.) update, so merging
    two accumulators equals accumulating their samples jointly.
    """

    __slots__ = ("count", "mean", "comoment")

    def __init__(self, dim: int):
        self.count = 0
        self.mean = np.zeros(dim)
        self.comoment = np.zeros((dim, dim))

    @property
    def dim(self) -> int:
        return len(self.mean)

    @property
    def sum(self) -> np.ndarray:
        return self.count * self.mean

    @property
    def cross(self) -> np.ndarray:
        """Raw sum of pairwise products ``sum_n x_n x_n^T``."""
        return self.comoment + self.count * np.outer(self.mean, self.mean)

    def add(self, x) -> "MomentAccumulator":
        return self.add_batch(np.asarray(x, dtype=float).reshape(1, -1))

    def add_batch(self, xs) -> "MomentAccumulator":
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise ValueError(f"expected shape (n, {self.dim}), got {xs.shape}")
        if len(xs) == 0:
            return self
        other = MomentAccumulator(self.dim)
        other.count = len(xs)
        other.mean = xs.mean(axis=0)
        dev = xs - other.mean
        other.comoment = dev.T @ dev
        self._absorb(other)
        return self

    def _absorb(self, other: "MomentAccumulator"):
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.comoment = other.count, other.mean.copy(), other.comoment.copy()
            return
        n = self.count + other.count
        delta = other.mean - self.mean
        self.comoment = self.comoment + other.comoment + np.outer(delta, delta) * (
            self.count * other.count / n
        )
        self.mean = self.mean + delta * (other.count / n)
        self.count = n

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        out = MomentAccumulator(self.dim)
        out._absorb(self)
        out._absorb(other)
        return out

    def covariance(self, ddof: int = 1) -> np.ndarray:
        if self.count <= ddof:
            raise ValueError("not enough samples for a covariance")
        c = self.comoment / (self.count - ddof)
        return 0.5 * (c + c.T)

    def finalize(self):
        """(count, mean, covariance)."""
        return self.count, self.mean.copy(), self.covariance()


def merge_tree(accs: list[MomentAccumulator]) -> MomentAccumulator:
    """Merge in a fixed balanced binary tree over the list order."""
    if not accs:
        raise ValueError("nothing to merge")
    level = list(accs)
    while len(level) > 1:
        nxt = [level[i].merge(level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


def covariance_standard_errors(cov: np.ndarray, n: int) -> np.ndarray:
    """Delta-method SE of sample covariances under normality.

    ``Var(c_ij) ~ (s_ii s_jj + s_ij^2) / (n - 1)``.
    """
    d = np.diag(cov)
    return np.sqrt((np.outer(d, d) + cov**2) / (n - 1))


@dataclass(frozen=True)
class NormalityStats:
    n: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_distance: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "ks_distance": self.ks_distance,
            "degenerate": self.degenerate,
        }


def normality_stats(samples) -> NormalityStats:
    """Standardized third/fourth moments and the KS distance to N(0, s^2)."""
    x = np.asarray(samples, dtype=float).reshape(-1)
    n = len(x)
    if n < 100:
        raise ValueError("normality_stats needs at least 100 samples")
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev**2))
    if m2 == 0.0 or m2 <= (np.finfo(float).eps * max(abs(mean), 1.0)) ** 2:
        return NormalityStats(n, mean, 0.0, math.nan, math.nan, math.nan, degenerate=True)
    m3 = float(np.mean(dev**3))
    m4 = float(np.mean(dev**4))
    var = m2 * n / (n - 1)
    ks = float(sps.kstest(x, "norm", args=(0.0, math.sqrt(var))).statistic)
    return NormalityStats(n, mean, var, m3 / m2**1.5, m4 / m2**2 - 3.0, ks)


def dkw_epsilon(n: int, alpha: float = 0.01) -> float:
    """Half-width of the Dvoretzky-Kiefer-Wolfowitz band at level ``1 - alpha``."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def ecdf_on(samples, points) -> np.ndarray:
    """Empirical CDF of ``samples`` evaluated at ``points``."""
    x = np.sort(np.asarray(samples, dtype=float).reshape(-1))
    return np.searchsorted(x, np.asarray(points, dtype=float), side="right") / len(x)
