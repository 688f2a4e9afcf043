"""Response functions regularly varying with index -1/2 (plus pure powers).

Each kernel is ``h(t) = t**-0.5 * ell(t)`` for ``t >= t_min`` and the constant
``h(t_min)`` on ``[0, t_min)``. Slowly varying factors (with ``L == 1``):

* ``moderate(rho)``:  ``ell = (log t)**((rho - 1)/2)``
* ``slow(rho)``:      ``ell = (log t)**-0.5 * (log log t)**((rho - 1)/2)``
* ``fast(rho, gamma)``: ``ell = exp(rho/2 * (log t)**gamma) * (log t)**((gamma - 1)/2)``
* ``pure_power(beta)``: ``h = t**beta`` (index ``beta > -1/2``)

All formulas are written in the log-time coordinate ``s = log t``, where the
square integrand ``h(e^s)**2 e^s`` equals ``ell(e^s)**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

__all__ = [
    "ResponseKernel",
    "moderate",
    "slow",
    "fast",
    "pure_power",
    "kernel_from_spec",
    "h_eval",
    "h_primitive",
    "m_eval",
    "m_inverse",
    "scaling_g",
    "closed_form_scaling",
    "default_t_min",
]

FAMILIES = ("moderate", "slow", "fast", "pure_power")
NEG_HALF_FAMILIES = ("moderate", "slow", "fast")

_QUAD_PIECE = 2.0  # max width of a quadrature panel in log-time
_QUAD_EPSREL = 1e-12


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


# -- log h in the coordinate s = log t, and its s-derivative -------------------


def _log_h(family, p, s):
    if family == "moderate":
        a = 0.5 * (p["rho"] - 1.0)
        return -0.5 * s + (a * np.log(s) if a != 0.0 else 0.0)
    if family == "slow":
        a = 0.5 * (p["rho"] - 1.0)
        ls = np.log(s)
        return -0.5 * s - 0.5 * ls + (a * np.log(ls) if a != 0.0 else 0.0)
    if family == "fast":
        g = p["gamma"]
        return -0.5 * s + 0.5 * p["rho"] * s**g + 0.5 * (g - 1.0) * np.log(s)
    return p["beta"] * s


def _dlog_h(family, p, s):
    if family == "moderate":
        return -0.5 + 0.5 * (p["rho"] - 1.0) / s
    if family == "slow":
        return -0.5 - 0.5 / s + 0.5 * (p["rho"] - 1.0) / (s * np.log(s))
    if family == "fast":
        g, rho = p["gamma"], p["rho"]
        return -0.5 + 0.5 * rho * g * s ** (g - 1.0) + 0.5 * (g - 1.0) / s
    return p["beta"] + 0.0 * s


def _last_increase(family, p, s_floor):
    """Smallest s >= s_floor past which log h is nonincreasing for good."""
    grid = s_floor * np.geomspace(1.0, 1e8, 4001)
    d = _dlog_h(family, p, grid)
    pos = np.nonzero(d > 0.0)[0]
    if len(pos) == 0:
        return s_floor
    i = pos[-1]
    if i == len(grid) - 1:
        raise ValueError("kernel does not become nonincreasing on the search range")
    return optimize.brentq(lambda s: _dlog_h(family, p, s), grid[i], grid[i + 1], xtol=1e-14)


def default_t_min(family: str, params: dict) -> float:
    """Plateau cutoff making ``h`` finite and globally nonincreasing."""
    if family == "moderate":
        rho = params["rho"]
        if rho == 1.0:
            return 1.0
        if rho > 1.0:
            return math.exp(rho - 1.0)
        # ell blows up at t = 1 when rho < 1
        return math.e
    if family == "slow":
        return math.exp(_last_increase(family, params, math.e))
    if family == "fast":
        return math.exp(_last_increase(family, params, 1.0))
    return 1.0


@dataclass(frozen=True)
class ResponseKernel:
    """Nonnegative response function with its integrals and scaling.

    ``params`` keys: ``rho`` (moderate, slow, fast), ``gamma`` (fast),
    ``beta`` (pure_power).
    """

    family: str
    params: dict
    t_min: float
    h_min: float = field(init=False)
    m_plateau: float = field(init=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        p = self.params
        if self.family in NEG_HALF_FAMILIES and not p.get("rho", 0.0) > 0.0:
            raise ValueError("rho must be positive")
        if self.family == "fast" and not 0.0 < p.get("gamma", 0.0) < 1.0:
            raise ValueError("fast kernel requires gamma in (0, 1)")
        if self.family == "pure_power" and not p.get("beta", -1.0) > -0.5:
            raise ValueError("pure_power requires beta > -1/2")
        if not self.t_min > 0.0:
            raise ValueError("t_min must be positive")
        s0 = math.log(self.t_min)
        if self.family == "moderate" and p["rho"] < 1.0 and s0 <= 0.0:
            raise ValueError("moderate kernel with rho < 1 needs t_min > 1")
        if self.family == "slow" and s0 <= 1.0:
            raise ValueError("slow kernel needs t_min > e")
        if self.family == "fast" and s0 <= 0.0:
            raise ValueError("fast kernel needs t_min > 1")
        if s0 == 0.0 and self.family == "moderate" and p["rho"] > 1.0:
            h_min = 0.0
        else:
            h_min = math.exp(float(_log_h(self.family, p, s0)))
        object.__setattr__(self, "h_min", h_min)
        object.__setattr__(self, "m_plateau", self.t_min * h_min * h_min)

    @property
    def is_neg_half(self) -> bool:
        return self.family in NEG_HALF_FAMILIES

    @property
    def closed_form(self) -> dict:
        """Which of H, m, m^<- have analytic expressions."""
        h_closed = self.family == "pure_power" or (
            self.family == "moderate" and self.params["rho"] == 1.0
        )
        return {"H": h_closed, "m": True, "m_inverse": True}

    def to_spec(self) -> dict:
        return {"family": self.family, **self.params, "t_min": self.t_min}

    # -- h ------------------------------------------------------------------

    def h(self, t):
        t = np.asarray(t, dtype=float)
        x = np.maximum(t, self.t_min)
        p = self.params
        fam = self.family
        if fam == "moderate" and p["rho"] == 1.0:
            out = 1.0 / np.sqrt(x)
        elif fam == "moderate" and p["rho"] > 1.0 and self.t_min == 1.0:
            out = np.log(x) ** (0.5 * (p["rho"] - 1.0)) / np.sqrt(x)
        elif fam == "pure_power":
            out = x ** p["beta"]
        else:
            out = np.exp(_log_h(fam, p, np.log(x)))
        return _scalar_or_array(out)

    def h_squared_log_integrand(self, s):
        """``h(e^s)**2 * e^s`` for ``s >= log t_min``."""
        return np.exp(s + 2.0 * _log_h(self.family, self.params, s))

    # -- m = int_0^t h^2 ------------------------------------------------------

    def _m_above(self, s):
        """Closed-form ``int_{t_min}^{e^s} h^2`` (s >= log t_min)."""
        p = self.params
        s0 = math.log(self.t_min)
        fam = self.family
        if fam == "moderate":
            rho = p["rho"]
            return (s**rho - s0**rho) / rho
        if fam == "slow":
            rho = p["rho"]
            return (np.log(s) ** rho - math.log(s0) ** rho) / rho
        if fam == "fast":
            rho, g = p["rho"], p["gamma"]
            e0 = math.exp(rho * s0**g)
            return e0 * np.expm1(rho * s**g - rho * s0**g) / (g * rho)
        q = 2.0 * p["beta"] + 1.0
        return self.t_min**q * np.expm1(q * (s - s0)) / q

    def m(self, t):
        t = np.asarray(t, dtype=float)
        below = np.maximum(t, 0.0) * self.h_min**2
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.log(np.maximum(t, self.t_min))
            above = self.m_plateau + self._m_above(s)
        return _scalar_or_array(np.where(t < self.t_min, below, above))

    def m_quad(self, t: float) -> float:
        """``m`` by adaptive quadrature in log-time (independent of :meth:`m`)."""
        if t <= self.t_min:
            return max(t, 0.0) * self.h_min**2
        return self.m_plateau + _log_quad(self.h_squared_log_integrand, math.log(self.t_min), math.log(t))

    # -- H = int_0^t h ------------------------------------------------------

    def H(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.array([self._H_scalar(float(x)) for x in t_arr.ravel()]).reshape(t_arr.shape)
        return _scalar_or_array(out)

    def _H_scalar(self, t):
        if t <= self.t_min:
            return max(t, 0.0) * self.h_min
        base = self.t_min * self.h_min
        p = self.params
        if self.family == "moderate" and p["rho"] == 1.0:
            return base + 2.0 * (math.sqrt(t) - math.sqrt(self.t_min))
        if self.family == "pure_power":
            q = p["beta"] + 1.0
            return base + (t**q - self.t_min**q) / q
        return base + self.H_quad_above(t)

    def H_quad_above(self, t: float) -> float:
        """``int_{t_min}^t h`` by quadrature in log-time."""
        fam, p = self.family, self.params
        return _log_quad(lambda s: np.exp(s + _log_h(fam, p, s)), math.log(self.t_min), math.log(t))

    # -- generalized inverse of m ----------------------------------------------

    def m_inverse(self, v):
        v_arr = np.asarray(v, dtype=float)
        out = np.array([self._m_inverse_scalar(float(x)) for x in v_arr.ravel()]).reshape(
            v_arr.shape
        )
        return _scalar_or_array(out)

    def _m_inverse_scalar(self, v):
        if v <= 0.0:
            return 0.0
        if v <= self.m_plateau:
            return v / self.h_min**2
        w = v - self.m_plateau
        p = self.params
        s0 = math.log(self.t_min)
        fam = self.family
        with np.errstate(over="ignore"):
            if fam == "moderate":
                rho = p["rho"]
                s = (rho * w + s0**rho) ** (1.0 / rho)
                return float(np.exp(s))
            if fam == "slow":
                rho = p["rho"]
                q = (rho * w + math.log(s0) ** rho) ** (1.0 / rho)
                return float(np.exp(np.exp(q)))
            if fam == "fast":
                rho, g = p["rho"], p["gamma"]
                lg = float(np.logaddexp(math.log(g * rho * w), rho * s0**g))
                s = (lg / rho) ** (1.0 / g)
                return float(np.exp(s))
            q = 2.0 * p["beta"] + 1.0
            return float((q * w + self.t_min**q) ** (1.0 / q))

    def m_inverse_bisect(self, v: float, steps: int = 200) -> float:
        """``inf{t: m(t) >= v}`` by bracketing and bisection (no closed form used)."""
        if v <= 0.0:
            return 0.0
        lo, hi = 0.0, max(self.t_min, 1.0)
        while self.m(hi) < v:
            lo, hi = hi, 2.0 * hi
            if not math.isfinite(hi):
                return math.inf
        for _ in range(steps):
            mid = math.sqrt(lo * hi) if lo > 0.0 else 0.5 * hi
            if self.m(mid) >= v:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 4.0 * math.ulp(hi):
                break
        return hi


def _log_quad(f, s_lo, s_hi):
    """Integrate ``f(s)`` over ``[s_lo, s_hi]`` on panels of bounded width."""
    if s_hi <= s_lo:
        return 0.0
    n = max(1, math.ceil((s_hi - s_lo) / _QUAD_PIECE))
    edges = np.linspace(s_lo, s_hi, n + 1)
    parts = []
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=200)
        parts.append(val)
    return math.fsum(parts)


# -- constructors -------------------------------------------------------------


def _make(family, params, t_min):
    if t_min is None:
        t_min = default_t_min(family, params)
    return ResponseKernel(family, params, float(t_min))


def moderate(rho: float, t_min: float | None = None) -> ResponseKernel:
    return _make("moderate", {"rho": float(rho)}, t_min)


def slow(rho: float, t_min: float | None = None) -> ResponseKernel:
    return _make("slow", {"rho": float(rho)}, t_min)


def fast(rho: float, gamma: float, t_min: float | None = None) -> ResponseKernel:
    return _make("fast", {"rho": float(rho), "gamma": float(gamma)}, t_min)


def pure_power(beta: float, t_min: float | None = None) -> ResponseKernel:
    return _make("pure_power", {"beta": float(beta)}, t_min)


_SPEC_KEYS = {
    "moderate": ("rho",),
    "slow": ("rho",),
    "fast": ("rho", "gamma"),
    "pure_power": ("beta",),
}


def kernel_from_spec(spec: dict) -> ResponseKernel:
    """Kernel from a config mapping, e.g. ``{"family": "moderate", "rho": 1.0, "t_min": 1.0}``."""
    spec = dict(spec)
    family = spec.pop("family", None)
    if family not in _SPEC_KEYS:
        raise ValueError(f"unknown kernel family {family!r}")
    t_min = spec.pop("t_min", None)
    unknown = set(spec) - set(_SPEC_KEYS[family])
    if unknown:
        raise ValueError(f"unexpected {family} parameters: {sorted(unknown)}")
    missing = [k for k in _SPEC_KEYS[family] if k not in spec]
    if missing:
        raise ValueError(f"missing {family} parameters: {missing}")
    params = {k: float(spec[k]) for k in _SPEC_KEYS[family]}
    return _make(family, params, None if t_min is None else float(t_min))


# -- functional API -------------------------------------------------------------


def h_eval(k: ResponseKernel, t):
    return k.h(t)


def m_eval(k: ResponseKernel, t):
    return k.m(t)


def h_primitive(k: ResponseKernel, t):
    return k.H(t)


def m_inverse(k: ResponseKernel, v):
    return k.m_inverse(v)


def scaling_g(k: ResponseKernel, t, u):
    """``m^<-(u * m(t))``: nondecreasing in ``u`` with ``m(g)/m(t) = u``."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)):
        raise ValueError("u must lie in [0, 1]")
    return k.m_inverse(u * k.m(t))


def closed_form_scaling(k: ResponseKernel, t, u):
    """Asymptotic closed-form scaling for the moderate, slow and fast families."""
    if not k.is_neg_half:
        raise ValueError(f"no closed-form scaling for the {k.family} family")
    u = np.asarray(u, dtype=float)
    if np.any((u < 0.0) | (u > 1.0)):
        raise ValueError("u must lie in [0, 1]")
    t = np.asarray(t, dtype=float)
    s = np.log(t)
    p = k.params
    with np.errstate(divide="ignore", over="ignore"):
        if k.family == "moderate":
            out = np.exp(s * u ** (1.0 / p["rho"]))
        elif k.family == "slow":
            out = np.exp(np.exp(np.log(s) * u ** (1.0 / p["rho"])))
        else:
            rho, g = p["rho"], p["gamma"]
            out = t * u ** (s ** (1.0 - g) / (g * rho))
    return _scalar_or_array(out)
