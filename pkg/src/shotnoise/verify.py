"""Monte Carlo experiments, exact Poisson oracles and quadrature checks."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import integrate

from shotnoise.jumps import JumpLaw, exponential
from shotnoise.kernels import ResponseKernel, closed_form_scaling, scaling_g
from shotnoise.limit import cramer_wold_variance, limit_covariance_matrix
from shotnoise.renewal import EvalGrid, FddPlan, count_renewals, evaluate_shot_noise, walk_points
from shotnoise.rng import RngStream
from shotnoise.stats import (
    MomentAccumulator,
    covariance_standard_errors,
    dkw_epsilon,
    ecdf_on,
    merge_tree,
    normality_stats,
)

__all__ = [
    "CHUNK",
    "MIN_NORMALITY",
    "ExperimentReport",
    "FddExperiment",
    "run_fdd_experiment",
    "projection_report",
    "cramer_wold_experiment",
    "campbell_oracle",
    "campbell_experiment",
    "cross_integral",
    "lemma_variance_ratio",
    "poisson_fdd_covariance",
    "karamata_report",
    "scaling_consistency_report",
    "cov_ratio_report",
    "backward_invariance_experiment",
    "subadditivity_experiment",
    "renewal_clt_experiment",
]

CHUNK = 1000  # replications per work unit; fixed so merges never depend on workers
MIN_NORMALITY = 100  # fewer samples than this and moment diagnostics are skipped

# second stream namespace for experiments that need two independent families of paths
_SIDE_B = 1 << 40


def _chunks(n: int, size: int = CHUNK):
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def _gather_rows(fn, n, workers):
    """Run ``fn(start, stop) -> array`` over fixed chunks and stack in order."""
    return np.concatenate(_map(fn, _chunks(n), workers), axis=0)


def _floats(x):
    return np.asarray(x, dtype=float).tolist()


# -- finite-dimensional distribution experiment --------------------------------------------------


def _fdd_chunk(plan: FddPlan, seed: int, start: int, stop: int):
    z = np.empty((stop - start, len(plan.u_grid)))
    for i in range(start, stop):
        z[i - start] = plan.replicate(RngStream(seed, i), i).z
    return MomentAccumulator(z.shape[1]).add_batch(z), z


@dataclass
class ExperimentReport:
    config: dict
    workers: int
    replications: int
    u_grid: list
    taus: list
    mean: list
    mean_se: list
    covariance: list
    covariance_se: list
    limit_covariance: list
    max_abs_deviation: float
    max_deviation_se: float
    max_deviation_entry: list
    atom_bias: list
    marginals: list
    lattice_jumps: bool
    reference_covariance: list | None = None
    projections: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class FddExperiment:
    report: ExperimentReport
    samples: np.ndarray
    accumulator: MomentAccumulator


def run_fdd_experiment(
    law: JumpLaw,
    kernel: ResponseKernel,
    t: float,
    u_grid,
    replications: int,
    seed: int,
    workers: int = 1,
    scaling: str = "inverse",
    alphas=None,
) -> FddExperiment:
    """Replicate ``Z_t(u)`` on independent streams and compare with the limit law."""
    if replications < 2:
        raise ValueError("need at least two replications")
    plan = FddPlan.build(law, kernel, t, u_grid, scaling)
    parts = _map(partial(_fdd_chunk, plan, seed), _chunks(replications), workers)
    acc = merge_tree([p[0] for p in parts])
    z = np.concatenate([p[1] for p in parts], axis=0)
    n, mean, cov = acc.finalize()
    cov_se = covariance_standard_errors(cov, n)
    lim = limit_covariance_matrix(plan.u_grid)
    dev = np.abs(cov - lim)
    i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    ref = None
    if law.family == "exponential":
        ref = _floats(poisson_fdd_covariance(kernel, t, plan.u_grid, scaling))
    report = ExperimentReport(
        config={
            "jump": law.to_spec(),
            "kernel": kernel.to_spec(),
            "t": float(t),
            "scaling": scaling,
            "seed": int(seed),
        },
        workers=int(workers),
        replications=int(n),
        u_grid=_floats(plan.u_grid),
        taus=_floats(plan.taus),
        mean=_floats(mean),
        mean_se=_floats(np.sqrt(np.diag(cov) / n)),
        covariance=_floats(cov),
        covariance_se=_floats(cov_se),
        limit_covariance=_floats(lim),
        max_abs_deviation=float(dev[i, j]),
        max_deviation_se=float(cov_se[i, j]),
        max_deviation_entry=[int(i), int(j)],
        atom_bias=_floats(np.atleast_1d(kernel.h(plan.taus)) / plan.scale),
        marginals=[normality_stats(z[:, k]).to_dict() for k in range(z.shape[1])] if n >= MIN_NORMALITY else [],
        lattice_jumps=law.is_lattice,
        reference_covariance=ref,
    )
    if alphas is not None and n >= MIN_NORMALITY:
        report.projections.append(projection_report(z, alphas, plan.u_grid))
    return FddExperiment(report, z, acc)


def projection_report(z: np.ndarray, alphas, u_grid) -> dict:
    """Sample variance and normality of ``sum_i alpha_i Z(u_i)`` vs the limit."""
    a = np.asarray(alphas, dtype=float).reshape(-1)
    if len(a) != z.shape[1]:
        raise ValueError("alphas length differs from the u-grid")
    s = z @ a
    n = len(s)
    var = float(np.var(s, ddof=1))
    target = cramer_wold_variance(a, u_grid)
    return {
        "alphas": _floats(a),
        "variance": var,
        "variance_se": var * math.sqrt(2.0 / (n - 1)),
        "target_variance": target,
        "deviation": var - target,
        "normality": normality_stats(s).to_dict(),
    }


def cramer_wold_experiment(
    law, kernel, t, alphas, u_grid, replications, seed, workers=1, scaling="inverse"
) -> dict:
    exp = run_fdd_experiment(law, kernel, t, u_grid, replications, seed, workers, scaling)
    return projection_report(exp.samples, alphas, exp.report.u_grid)


# -- exact Poisson oracles -----------------------------------------------------------


@dataclass(frozen=True)
class CampbellMoments:
    mean_with_atom: float
    mean_pure: float
    variance: float


def campbell_oracle(kernel: ResponseKernel, t: float, rate: float = 1.0) -> CampbellMoments:
    """Mean and variance of ``Y(t)`` for Poisson shots of the given rate.

    ``mean_with_atom`` adds the deterministic shot at ``S_0 = 0``; it is the
    exact mean for exponential jumps. ``mean_pure`` omits it.
    """
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    h_t = kernel.h(t)
    H = kernel.H(t)
    return CampbellMoments(rate * H + h_t, rate * H, rate * kernel.m(t))


def _campbell_chunk(law, kernel, t, seed, start, stop):
    grid = EvalGrid([t])
    return np.array(
        [evaluate_shot_noise(law, kernel, grid, False, RngStream(seed, i))[0] for i in range(start, stop)]
    )


def campbell_experiment(kernel, t, replications, seed, workers=1, rate=1.0) -> dict:
    """Monte Carlo ``Y(t)`` with exponential jumps against :func:`campbell_oracle`."""
    law = exponential(rate)
    y = _gather_rows(partial(_campbell_chunk, law, kernel, t, seed), replications, workers)
    n = len(y)
    mean = float(y.mean())
    var = float(y.var(ddof=1))
    m4 = float(np.mean((y - mean) ** 4))
    oracle = campbell_oracle(kernel, t, rate)
    return {
        "t": float(t),
        "replications": n,
        "mean": mean,
        "mean_se": math.sqrt(var / n),
        "variance": var,
        "variance_se": math.sqrt(max(m4 - var**2, 0.0) / n),
        "oracle_mean": oracle.mean_with_atom,
        "oracle_mean_pure": oracle.mean_pure,
        "oracle_variance": oracle.variance,
    }


def cross_integral(kernel: ResponseKernel, upper: float, shift: float) -> float:
    """``int_0^upper h(y) h(y + shift) dy`` for ``shift >= 0``, by quadrature."""
    if shift < 0.0:
        raise ValueError("shift must be nonnegative")
    if upper <= 0.0:
        return 0.0
    t0 = kernel.t_min
    parts = []
    flat_end = min(upper, t0)
    if kernel.h_min > 0.0:
        pts = [t0 - shift] if 0.0 < t0 - shift < flat_end else None
        val, _ = integrate.quad(
            lambda y: kernel.h(y + shift), 0.0, flat_end, points=pts, epsabs=0.0, epsrel=1e-12, limit=200
        )
        parts.append(kernel.h_min * val)
    if upper > t0:
        s_lo, s_hi = math.log(t0), math.log(upper)
        n = max(1, math.ceil((s_hi - s_lo) / 2.0))
        edges = np.linspace(s_lo, s_hi, n + 1)

        def f(s):
            y = math.exp(s)
            return y * kernel.h(y) * kernel.h(y + shift)

        for a, b in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-12, limit=200)
            parts.append(val)
    return math.fsum(parts)


def _scaling(kernel, t, u, scaling):
    if scaling == "inverse":
        return scaling_g(kernel, t, u)
    if scaling == "remark3":
        return closed_form_scaling(kernel, t, u)
    raise ValueError(f"unknown scaling {scaling!r}")


def lemma_variance_ratio(kernel: ResponseKernel, t: float, a: float, b: float, scaling="inverse") -> float:
    """``int_0^{t+t_b} h(y) h(y + t_a - t_b) dy / m(t)`` with ``t_u = g(t, u)``."""
    if not 0.0 <= b < a <= 1.0:
        raise ValueError("need 0 <= b < a <= 1")
    ta = float(_scaling(kernel, t, a, scaling))
    tb = float(_scaling(kernel, t, b, scaling))
    return cross_integral(kernel, t + tb, ta - tb) / kernel.m(t)


def poisson_fdd_covariance(kernel, t, u_grid, scaling="inverse") -> np.ndarray:
    """Exact covariance of ``Z_t(u_i)`` when the jumps are exponential.

    The walk is then a Poisson process plus a deterministic point at 0, so
    ``cov(Y(a), Y(b)) = rate * int_0^a h(y) h(y + b - a) dy`` for ``a <= b``,
    and the rate cancels against the normalization.
    """
    u = np.asarray(u_grid, dtype=float).reshape(-1)
    g = np.atleast_1d(_scaling(kernel, t, u, scaling))
    m_t = kernel.m(t)
    k = len(u)
    c = np.empty((k, k))
    for i in range(k):
        c[i, i] = kernel.m(t + g[i]) / m_t
        for j in range(i + 1, k):
            # shift from g directly: t + g loses g entirely once g/t < machine epsilon
            lo, hi = sorted((g[i], g[j]))
            c[i, j] = c[j, i] = cross_integral(kernel, t + lo, hi - lo) / m_t
    return c


# -- Karamata and normalization tables -----------------------------------------------------------


def karamata_report(kernel: ResponseKernel, t_grid) -> list[dict]:
    """Karamata ratios along ``t_grid``.

    ``int_over_th2 = m(t) / (t h(t)^2)`` tends to ``1/(2 beta + 1)`` for pure
    powers; ``th2_over_int`` is its reciprocal and tends to 0 for the
    index -1/2 families. ``power_normalization_ratio`` compares ``sqrt(m(t))`` with
    ``(2 beta + 1)^-1/2 sqrt(t) h(t)``.
    """
    rows = []
    for t in np.asarray(t_grid, dtype=float):
        m = kernel.m(t)
        th2 = t * kernel.h(t) ** 2
        row = {"t": float(t), "m": m, "t_h2": th2, "int_over_th2": m / th2, "th2_over_int": th2 / m}
        if kernel.family == "pure_power":
            q = 2.0 * kernel.params["beta"] + 1.0
            row["karamata_limit"] = 1.0 / q
            row["power_normalization_ratio"] = math.sqrt(m) / (math.sqrt(t / q) * kernel.h(t))
        rows.append(row)
    return rows


def scaling_consistency_report(kernel: ResponseKernel, t_grid, u_grid) -> list[dict]:
    """``m(g(t,u)) / m(t) - u`` for the closed-form asymptotic scaling."""
    rows = []
    for t in np.asarray(t_grid, dtype=float):
        m_t = kernel.m(t)
        for u in np.asarray(u_grid, dtype=float):
            g = closed_form_scaling(kernel, t, u)
            rows.append({"t": float(t), "u": float(u), "g": float(g), "deviation": kernel.m(g) / m_t - u})
    return rows


def cov_ratio_report(kernel, t_grid, pairs, scaling="inverse") -> list[dict]:
    rows = []
    for a, b in pairs:
        for t in np.asarray(t_grid, dtype=float):
            r = lemma_variance_ratio(kernel, t, a, b, scaling)
            rows.append({"a": a, "b": b, "t": float(t), "ratio": r, "error": abs(r - (1.0 - a))})
    return rows


# -- renewal structure ------------------------------------------------------------------


def _backward_chunk(law, t, s, seed, start, stop):
    s = np.asarray(s)
    out = np.empty((stop - start, 2 * len(s)), dtype=np.int64)
    for i in range(start, stop):
        pa = walk_points(law, t, True, RngStream(seed, i))
        # N*(t) - N*((t - s)-) counts points in [t - s, t]
        out[i - start, : len(s)] = len(pa) - np.searchsorted(pa, t - s, side="left")
        pb = walk_points(law, float(s.max()), True, RngStream(seed, _SIDE_B + i))
        out[i - start, len(s) :] = np.searchsorted(pb, s, side="right")
    return out


def _compare_counts(a, b, alpha=0.01):
    """Two-sample ECDF sup distance, band, and mean comparison."""
    n_a, n_b = len(a), len(b)
    support = np.arange(min(a.min(), b.min()), max(a.max(), b.max()) + 1)
    diff = ecdf_on(a, support) - ecdf_on(b, support)
    band = dkw_epsilon(n_a, alpha) + dkw_epsilon(n_b, alpha)
    mean_diff = float(a.mean() - b.mean())
    se = math.sqrt(a.var(ddof=1) / n_a + b.var(ddof=1) / n_b)
    return {
        "sup_ecdf_distance": float(np.max(np.abs(diff))),
        "min_ecdf_difference": float(np.min(diff)),
        "band": band,
        "mean_a": float(a.mean()),
        "mean_b": float(b.mean()),
        "mean_difference": mean_diff,
        "mean_difference_se": se,
    }


def backward_invariance_experiment(law, t, s_grid, replications, seed, workers=1) -> dict:
    """Compare ``N*(t) - N*((t-s)-)`` with ``N*(s)`` on independent delayed paths."""
    s = np.asarray(s_grid, dtype=float)
    if np.any(s < 0.0) or np.any(s > t):
        raise ValueError("s_grid must lie in [0, t]")
    rows = _gather_rows(partial(_backward_chunk, law, float(t), s, seed), replications, workers)
    k = len(s)
    marginals = []
    for j in range(k):
        c = _compare_counts(rows[:, j], rows[:, k + j])
        c["s"] = float(s[j])
        c["ecdf_pass"] = c["sup_ecdf_distance"] <= c["band"]
        c["mean_pass"] = abs(c["mean_difference"]) <= 5.0 * c["mean_difference_se"]
        marginals.append(c)
    return {
        "t": float(t),
        "replications": len(rows),
        "marginals": marginals,
        "passed": all(m["ecdf_pass"] and m["mean_pass"] for m in marginals),
    }


def _subadd_chunk(law, s, t, seed, start, stop):
    out = np.empty((stop - start, 2), dtype=np.int64)
    for i in range(start, stop):
        pa = walk_points(law, s + t, False, RngStream(seed, i))
        out[i - start, 0] = len(pa) - np.searchsorted(pa, s, side="right")
        out[i - start, 1] = count_renewals(law, t, False, RngStream(seed, _SIDE_B + i))
    return out


def subadditivity_experiment(law, s, t, replications, seed, workers=1) -> dict:
    """Check ``N(t+s) - N(s) <=_d N(t)``: the ECDF of the left side must dominate."""
    rows = _gather_rows(partial(_subadd_chunk, law, float(s), float(t), seed), replications, workers)
    c = _compare_counts(rows[:, 0], rows[:, 1])
    # P{A > z} <= P{B > z}  <=>  F_A(z) >= F_B(z); tolerate the sampling band
    c["violation"] = max(0.0, -c["min_ecdf_difference"])
    c["passed"] = c["violation"] <= c["band"]
    c.update({"s": float(s), "t": float(t), "replications": len(rows)})
    return c


def _count_chunk(law, t, delayed, seed, start, stop):
    return np.array(
        [count_renewals(law, t, delayed, RngStream(seed, i)) for i in range(start, stop)], dtype=np.int64
    )


def renewal_clt_experiment(law, t, replications, seed, workers=1) -> dict:
    """Standardized ``N(t)`` moments and the elementary renewal ratio."""
    n_t = _gather_rows(partial(_count_chunk, law, float(t), False, seed), replications, workers)
    mu, var = law.mean, law.variance
    z = (n_t - t / mu) / math.sqrt(var * t / mu**3)
    ns = normality_stats(z)
    return {
        "t": float(t),
        "replications": len(n_t),
        "mean_count": float(n_t.mean()),
        "elementary_ratio": float(n_t.mean() / (t / mu)),
        "normality": ns.to_dict(),
    }
