"""Streaming renewal walks and single-pass shot-noise evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from shotnoise.jumps import DelayLaw, JumpLaw, sample_jumps, sample_stationary_delay
from shotnoise.kernels import ResponseKernel, closed_form_scaling, scaling_g
from shotnoise.rng import RngStream

__all__ = [
    "PathCursor",
    "EvalGrid",
    "FddPlan",
    "FddSample",
    "delay_law_for",
    "stream_next",
    "count_renewals",
    "walk_points",
    "evaluate_shot_noise",
    "fdd_replication",
    "SCALINGS",
]

SCALINGS = ("inverse", "remark3")
MAX_BLOCK = 1 << 16

_delay_cache: dict = {}


def delay_law_for(law: JumpLaw) -> DelayLaw:
    """Cached stationary-delay law (the inversion table is built once)."""
    key = (law.family, tuple(sorted(law.params.items())))
    if key not in _delay_cache:
        _delay_cache[key] = DelayLaw(law)
    return _delay_cache[key]


def block_size_for(law: JumpLaw, horizon: float) -> int:
    """Jumps per draw so that a path to ``horizon`` usually needs one block."""
    mu, var = law.mean, law.variance
    expected = horizon / mu
    spread = math.sqrt(var * horizon / mu**3) if horizon > 0 else 0.0
    return int(min(MAX_BLOCK, max(64, expected + 6.0 * spread + 32)))


class PathCursor:
    """Streaming state of the walk ``S_0, S_1, ...``.

    ``S_0 = 0`` for the zero-delayed walk, or a draw from the stationary delay
    law when ``delayed`` is true. Jumps are drawn ``block`` at a time; the
    sequence of points does not depend on how the caller consumes them.
    """

    def __init__(self, law: JumpLaw, rng: RngStream, delayed: bool = False, block: int = 4096):
        self.law = law
        self.rng = rng
        self.delayed = delayed
        self.block = int(block)
        start = sample_stationary_delay(delay_law_for(law), rng) if delayed else 0.0
        self._pts = np.array([start])
        self._pos = 0
        self.index = 0
        self.current_sum = start

    def _refill(self):
        jumps = sample_jumps(self.law, self.rng, self.block)
        # carry folded into the first jump: the sequential cumsum then equals
        # adding the jumps one at a time
        jumps[0] += self._pts[-1]
        self._pts = np.cumsum(jumps, out=jumps)
        self._pos = 0

    def next(self) -> float:
        if self._pos == len(self._pts):
            self._refill()
        x = self._pts[self._pos]
        self._pos += 1
        self.index += 1
        self.current_sum = float(x)
        return float(x)

    def take_block(self) -> np.ndarray:
        """All buffered points not yet yielded (refilling first if empty)."""
        if self._pos == len(self._pts):
            self._refill()
        out = self._pts[self._pos :]
        self._pos = len(self._pts)
        self.index += len(out)
        self.current_sum = float(out[-1])
        return out


def stream_next(cursor: PathCursor) -> float:
    return cursor.next()


def count_renewals(
    law: JumpLaw, t: float, delayed: bool, rng: RngStream, *, strict: bool = False
) -> int:
    """``N(t) = #{k: S_k <= t}`` on a fresh path (``N*`` when delayed).

    With ``strict=True`` the left limit ``N(t-) = #{k: S_k < t}`` is returned.
    """
    side = "left" if strict else "right"
    cursor = PathCursor(law, rng, delayed, block_size_for(law, t))
    n = 0
    while True:
        pts = cursor.take_block()
        if (pts[-1] < t) if strict else (pts[-1] <= t):
            n += len(pts)
            continue
        return n + int(np.searchsorted(pts, t, side=side))


def walk_points(law: JumpLaw, horizon: float, delayed: bool, rng: RngStream) -> np.ndarray:
    """Materialize every point ``S_k <= horizon`` of a fresh path."""
    cursor = PathCursor(law, rng, delayed, block_size_for(law, horizon))
    chunks = []
    while True:
        pts = cursor.take_block()
        if pts[-1] <= horizon:
            chunks.append(pts)
            continue
        chunks.append(pts[: np.searchsorted(pts, horizon, side="right")])
        return np.concatenate(chunks)


@dataclass(frozen=True)
class EvalGrid:
    times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        if len(times) == 0:
            raise ValueError("evaluation grid is empty")
        if not np.all(np.isfinite(times)) or np.any(times < 0.0):
            raise ValueError("evaluation times must be finite and nonnegative")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("evaluation times must be strictly increasing")
        object.__setattr__(self, "times", times)


def evaluate_shot_noise(
    law: JumpLaw,
    kernel: ResponseKernel,
    grid: EvalGrid,
    delayed: bool,
    rng: RngStream,
    block: int | None = None,
) -> np.ndarray:
    """``(Y(tau_1), ..., Y(tau_K))`` from one path, in a single pass.

    Shots are streamed block by block; each block is added to every grid
    time at or after its first shot, so memory stays ``O(K + block)``.
    """
    if not isinstance(grid, EvalGrid):
        grid = EvalGrid(grid)
    taus = grid.times
    last = taus[-1]
    if block is None:
        block = block_size_for(law, last)
    cursor = PathCursor(law, rng, delayed, block)
    acc = np.zeros(len(taus))
    while True:
        pts = cursor.take_block()
        if pts[0] > last:
            break
        for j in range(int(np.searchsorted(taus, pts[0], side="left")), len(taus)):
            n = np.searchsorted(pts, taus[j], side="right")
            acc[j] += np.sum(kernel.h(taus[j] - pts[:n]))
        if pts[-1] > last:
            break
    return acc


# -- finite-dimensional samples of the normalized process ---------------------------


@dataclass(frozen=True)
class FddSample:
    replication_index: int
    u_grid: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class FddPlan:
    """Deterministic ingredients of ``Z_t(u)`` shared by all replications.

    ``Z_t(u) = (Y(t + g(t,u)) - H(t + g(t,u)) / mu) / sqrt(sigma^2 mu^-3 m(t))``.
    """

    law: JumpLaw
    kernel: ResponseKernel
    t: float
    u_grid: np.ndarray
    scaling: str
    taus: np.ndarray
    centering: np.ndarray
    scale: float
    grid: EvalGrid
    grid_index: np.ndarray
    delayed: bool = False

    @classmethod
    def build(cls, law, kernel, t, u_grid, scaling="inverse", delayed=False):
        u = np.asarray(u_grid, dtype=float).reshape(-1)
        if len(u) == 0 or np.any(np.diff(u) <= 0.0) or u[0] < 0.0 or u[-1] > 1.0:
            raise ValueError("u_grid must be strictly increasing within [0, 1]")
        if not law.variance > 0.0:
            raise ValueError(f"{law.family} jumps have zero variance; Z_t is undefined")
        if scaling == "inverse":
            g = np.atleast_1d(scaling_g(kernel, t, u))
        elif scaling == "remark3":
            g = np.atleast_1d(closed_form_scaling(kernel, t, u))
        else:
            raise ValueError(f"unknown scaling {scaling!r}; expected one of {SCALINGS}")
        taus = t + g
        if np.any(np.diff(taus) < 0.0):
            raise ValueError("scaling is not nondecreasing in u")
        uniq, inverse = np.unique(taus, return_inverse=True)
        mu, var = law.mean, law.variance
        centering = np.atleast_1d(kernel.H(taus)) / mu
        scale = math.sqrt(var * kernel.m(t) / mu**3)
        return cls(
            law, kernel, float(t), u, scaling, taus, centering, scale,
            EvalGrid(uniq), inverse, delayed,
        )

    def replicate(self, rng: RngStream, replication_index: int = 0) -> FddSample:
        y = evaluate_shot_noise(self.law, self.kernel, self.grid, self.delayed, rng)
        z = (y[self.grid_index] - self.centering) / self.scale
        return FddSample(replication_index, self.u_grid, z)


def fdd_replication(law, kernel, t, u_grid, scaling, rng, replication_index=0) -> FddSample:
    return FddPlan.build(law, kernel, t, u_grid, scaling).replicate(rng, replication_index)
