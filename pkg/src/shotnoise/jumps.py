"""Positive jump laws and the stationary-delay (integrated tail) law."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from shotnoise.rng import RngStream

__all__ = [
    "JumpLaw",
    "DelayLaw",
    "exponential",
    "gamma",
    "uniform",
    "pareto",
    "point_mass",
    "jump_law_from_spec",
    "jump_moments",
    "sample_jump",
    "sample_jumps",
    "sample_stationary_delay",
    "sample_stationary_delays",
]

FAMILIES = ("exponential", "gamma", "uniform", "pareto", "point_mass")

_TINY = np.finfo(float).tiny
_LIGHT_TAIL_ORDER = 4.0


@dataclass(frozen=True)
class JumpLaw:
    """Distribution of a positive jump with closed-form mean and variance.

    ``params`` holds the family parameters by name, e.g. ``{"rate": 1.0}``.
    ``moment_order`` is an ``r > 2`` with ``E xi**r < inf``.
    """

    family: str
    params: dict
    moment_order: float
    mean: float = field(init=False)
    variance: float = field(init=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown jump family {self.family!r}")
        p = self.params
        if self.family == "exponential":
            _positive(p, "rate")
            mean, var = 1.0 / p["rate"], 1.0 / p["rate"] ** 2
        elif self.family == "gamma":
            _positive(p, "shape")
            _positive(p, "scale")
            mean = p["shape"] * p["scale"]
            var = p["shape"] * p["scale"] ** 2
        elif self.family == "uniform":
            a, b = p["a"], p["b"]
            if not 0.0 <= a < b:
                raise ValueError("uniform requires 0 <= a < b")
            mean, var = 0.5 * (a + b), (b - a) ** 2 / 12.0
        elif self.family == "pareto":
            _positive(p, "scale")
            k = p["index"]
            if not k > 2.0:
                raise ValueError("pareto requires tail index > 2 (finite variance)")
            if not 2.0 < self.moment_order < k:
                raise ValueError("pareto moment_order must lie in (2, index)")
            xm = p["scale"]
            mean = k * xm / (k - 1.0)
            var = xm**2 * k / ((k - 1.0) ** 2 * (k - 2.0))
        else:
            _positive(p, "d")
            mean, var = p["d"], 0.0
        if not self.moment_order > 2.0:
            raise ValueError("moment_order must exceed 2")
        object.__setattr__(self, "mean", float(mean))
        object.__setattr__(self, "variance", float(var))

    @property
    def is_lattice(self) -> bool:
        return self.family == "point_mass"

    def survival(self, x):
        """P{xi > x}."""
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.family == "exponential":
            return np.exp(-p["rate"] * np.maximum(x, 0.0))
        if self.family == "gamma":
            return special.gammaincc(p["shape"], np.maximum(x, 0.0) / p["scale"])
        if self.family == "uniform":
            a, b = p["a"], p["b"]
            return np.clip((b - x) / (b - a), 0.0, 1.0)
        if self.family == "pareto":
            xm, k = p["scale"], p["index"]
            return np.where(x < xm, 1.0, (xm / np.maximum(x, xm)) ** k)
        return np.where(x < p["d"], 1.0, 0.0)

    def to_spec(self) -> dict:
        return {"family": self.family, **self.params, "moment_order": self.moment_order}


def _positive(params, name):
    if not params.get(name, 0.0) > 0.0:
        raise ValueError(f"parameter {name!r} must be positive")


def exponential(rate: float = 1.0, moment_order: float = _LIGHT_TAIL_ORDER) -> JumpLaw:
    return JumpLaw("exponential", {"rate": float(rate)}, moment_order)


def gamma(shape: float, scale: float, moment_order: float = _LIGHT_TAIL_ORDER) -> JumpLaw:
    return JumpLaw("gamma", {"shape": float(shape), "scale": float(scale)}, moment_order)


def uniform(a: float, b: float, moment_order: float = _LIGHT_TAIL_ORDER) -> JumpLaw:
    return JumpLaw("uniform", {"a": float(a), "b": float(b)}, moment_order)


def pareto(scale: float, index: float, moment_order: float | None = None) -> JumpLaw:
    if moment_order is None:
        moment_order = 0.5 * (2.0 + index)
    return JumpLaw("pareto", {"scale": float(scale), "index": float(index)}, moment_order)


def point_mass(d: float, moment_order: float = _LIGHT_TAIL_ORDER) -> JumpLaw:
    return JumpLaw("point_mass", {"d": float(d)}, moment_order)


_SPEC_KEYS = {
    "exponential": ("rate",),
    "gamma": ("shape", "scale"),
    "uniform": ("a", "b"),
    "pareto": ("scale", "index"),
    "point_mass": ("d",),
}


def jump_law_from_spec(spec: dict) -> JumpLaw:
    """Build a law from a config mapping such as ``{"family": "exponential", "rate": 1.0}``."""
    spec = dict(spec)
    family = spec.pop("family", None)
    if family not in _SPEC_KEYS:
        raise ValueError(f"unknown jump family {family!r}")
    order = spec.pop("moment_order", None)
    unknown = set(spec) - set(_SPEC_KEYS[family])
    if unknown:
        raise ValueError(f"unexpected {family} parameters: {sorted(unknown)}")
    missing = [k for k in _SPEC_KEYS[family] if k not in spec]
    if missing and family != "exponential":
        raise ValueError(f"missing {family} parameters: {missing}")
    kwargs = {k: float(v) for k, v in spec.items()}
    if order is not None:
        kwargs["moment_order"] = float(order)
    return {
        "exponential": exponential,
        "gamma": gamma,
        "uniform": uniform,
        "pareto": pareto,
        "point_mass": point_mass,
    }[family](**kwargs)


def jump_moments(law: JumpLaw) -> tuple[float, float, float]:
    """(mean, variance, declared moment order)."""
    return law.mean, law.variance, law.moment_order


def sample_jumps(law: JumpLaw, rng: RngStream, n: int) -> np.ndarray:
    """``n`` independent jumps, strictly positive."""
    g = rng.gen
    p = law.params
    if law.family == "exponential":
        x = g.standard_exponential(n) / p["rate"]
    elif law.family == "gamma":
        x = g.standard_gamma(p["shape"], n) * p["scale"]
    elif law.family == "uniform":
        # (a, b]: positive even when a == 0
        x = g.random(n)
        x *= p["a"] - p["b"]
        x += p["b"]
        return x
    elif law.family == "pareto":
        return p["scale"] * rng.uniform_open_closed(n) ** (-1.0 / p["index"])
    else:
        return np.full(n, p["d"])
    return np.maximum(x, _TINY, out=x)


def sample_jump(law: JumpLaw, rng: RngStream) -> float:
    return float(sample_jumps(law, rng, 1)[0])


# --------------------------------------------------------------------------
# stationary delay


_TABLE_SIZE = 4096
_NEWTON_STEPS = 8


@dataclass(frozen=True)
class DelayLaw:
    """Law of the stationary delay, ``P{S*_0 <= x} = mu^-1 int_0^x P{xi > y} dy``.

    For the lattice family (point mass at ``d``) the arithmetic version
    ``P{S*_0 = kd} = (d / mu) P{xi >= kd}`` is used instead.
    """

    base: JumpLaw
    cdf_table: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.cdf_table is None and self.base.family in ("uniform", "gamma"):
            object.__setattr__(self, "cdf_table", _build_table(self))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        law = self.base
        p = law.params
        mu = law.mean
        xp = np.maximum(x, 0.0)
        if law.family == "exponential":
            out = -np.expm1(-p["rate"] * xp)
        elif law.family == "gamma":
            k, th = p["shape"], p["scale"]
            z = xp / th
            out = xp * special.gammaincc(k, z) / mu + special.gammainc(k + 1.0, z)
        elif law.family == "uniform":
            a, b = p["a"], p["b"]
            y = np.minimum(xp, b)
            inner = np.where(y < a, y, y - (y - a) ** 2 / (2.0 * (b - a)))
            out = inner / mu
        elif law.family == "pareto":
            xm, k = p["scale"], p["index"]
            below = xp * (k - 1.0) / (k * xm)
            above = 1.0 - (xm / np.maximum(xp, xm)) ** (k - 1.0) / k
            out = np.where(xp < xm, below, above)
        else:
            # the only atom is at d: P{S*_0 = d} = (d/mu) P{xi >= d} = 1
            out = np.where(xp < p["d"], 0.0, 1.0)
        return np.clip(np.where(x < 0.0, 0.0, out), 0.0, 1.0)

    def density(self, x):
        """Derivative of :meth:`cdf` (nonlattice families)."""
        return self.base.survival(x) / self.base.mean

    def atoms(self):
        """Lattice case: list of (location, mass)."""
        if not self.base.is_lattice:
            raise ValueError("delay law is continuous")
        d = self.base.params["d"]
        # P{xi >= kd} is 1 for k = 1 and 0 beyond
        return [(d, d / self.base.mean)]

    def quantile(self, u):
        """Inverse CDF; ``u`` in [0, 1)."""
        u = np.asarray(u, dtype=float)
        law = self.base
        p = law.params
        if law.family == "exponential":
            return -np.log1p(-u) / p["rate"]
        if law.family == "point_mass":
            return np.full_like(u, p["d"])
        if law.family == "pareto":
            xm, k = p["scale"], p["index"]
            knee = (k - 1.0) / k
            below = u * k * xm / (k - 1.0)
            above = xm * (k * (1.0 - np.minimum(u, 1.0 - 1e-300))) ** (-1.0 / (k - 1.0))
            return np.where(u < knee, below, above)
        return self._invert_table(u)

    def _invert_table(self, u):
        xs = np.asarray(self.cdf_table[0])
        fs = np.asarray(self.cdf_table[1])
        x = np.interp(u, fs, xs)
        # bracket: the grid cell holding the root, or [x_hi, inf) past the table
        idx = np.clip(np.searchsorted(fs, u, side="right"), 1, len(xs) - 1)
        past = u >= fs[-1]
        lo = np.where(past, xs[-1], xs[idx - 1])
        hi = np.where(past, np.inf, xs[idx])
        err = self.cdf(x) - u
        for _ in range(_NEWTON_STEPS):
            if np.all(np.abs(err) <= 1e-14):
                break
            lo = np.where(err < 0.0, x, lo)
            hi = np.where(err > 0.0, x, hi)
            dens = self.density(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                cand = x - err / dens
            fallback = np.where(np.isfinite(hi), 0.5 * (lo + hi), 2.0 * x + 1.0)
            inside = np.isfinite(cand) & (cand >= lo) & (cand <= hi)
            done = np.abs(err) <= 1e-14
            x = np.where(done, x, np.where(inside, cand, fallback))
            err = self.cdf(x) - u
        return x


def _build_table(law: DelayLaw):
    base = law.base
    p = base.params
    if base.family == "uniform":
        x_hi = p["b"]
    else:
        # integrated tail of a gamma law is negligible beyond this point
        x_hi = float(stats.gamma.isf(1e-16, p["shape"] + 1.0, scale=p["scale"]))
    xs = np.linspace(0.0, x_hi, _TABLE_SIZE)
    fs = law.cdf(xs)
    fs = np.maximum.accumulate(fs)
    return (tuple(xs.tolist()), tuple(fs.tolist()))


def sample_stationary_delays(law: DelayLaw, rng: RngStream, n: int) -> np.ndarray:
    if law.base.is_lattice:
        return np.full(n, law.base.params["d"])
    return law.quantile(rng.gen.random(n))


def sample_stationary_delay(law: DelayLaw, rng: RngStream) -> float:
    return float(sample_stationary_delays(law, rng, 1)[0])
