import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from shotnoise import jumps as J
from shotnoise.rng import RngStream
from shotnoise.stats import dkw_epsilon

N = 10**6


def test_point_mass_draw_is_degenerate():
    law = J.point_mass(1.0)
    assert J.sample_jump(law, RngStream(0, 0)) == 1.0
    assert np.all(J.sample_jumps(law, RngStream(5, 3), 100) == 1.0)


def test_jump_moments_closed_forms():
    assert J.jump_moments(J.exponential(1.0))[:2] == (1.0, 1.0)
    mu, var, r = J.jump_moments(J.gamma(2.0, 0.5))
    assert (mu, var) == pytest.approx((1.0, 0.5))
    mu, var, r = J.jump_moments(J.pareto(1.0, 2.5))
    assert mu == pytest.approx(5.0 / 3.0)
    # x_m^2 k / ((k-1)^2 (k-2))
    assert var == pytest.approx(2.5 / (1.5**2 * 0.5))
    assert r == pytest.approx(2.25)
    assert 2.0 < r < 2.5


@pytest.mark.parametrize(
    "law",
    [J.exponential(1.0), J.exponential(3.0), J.gamma(2.0, 0.5), J.gamma(0.7, 2.0),
     J.uniform(0.0, 2.0), J.uniform(0.5, 1.5), J.pareto(1.0, 5.0)],
    ids=lambda law: f"{law.family}{law.params}",
)
def test_sample_moments_within_five_se(law):
    x = J.sample_jumps(law, RngStream(123, 7), N)
    assert np.all(x > 0.0)
    mean_se = math.sqrt(law.variance / N)
    assert abs(x.mean() - law.mean) <= 5 * mean_se
    m4 = np.mean((x - x.mean()) ** 4)
    var_se = math.sqrt((m4 - law.variance**2) / N)
    assert abs(x.var(ddof=1) - law.variance) <= 5 * var_se


def test_exponential_mean_example():
    x = J.sample_jumps(J.exponential(1.0), RngStream(1, 0), N)
    assert abs(x.mean() - 1.0) <= 0.004


def test_uniform_variance_example():
    x = J.sample_jumps(J.uniform(0.0, 2.0), RngStream(2, 0), N)
    # SE of the variance estimator for U(0,2): sqrt((m4 - var^2)/n), m4 = 1/5
    se = math.sqrt((0.2 - (1 / 3) ** 2) / N)
    assert abs(x.var(ddof=1) - 1.0 / 3.0) <= 4 * se


def test_pareto_mean_heavy_tail():
    law = J.pareto(1.0, 2.5)
    x = J.sample_jumps(law, RngStream(3, 0), N)
    assert np.all(x >= 1.0)
    assert abs(x.mean() - 5.0 / 3.0) <= 5 * math.sqrt(law.variance / N)


@pytest.mark.parametrize(
    "bad",
    [
        lambda: J.exponential(0.0),
        lambda: J.gamma(-1.0, 1.0),
        lambda: J.uniform(1.0, 1.0),
        lambda: J.uniform(-0.5, 1.0),
        lambda: J.pareto(1.0, 2.0),
        lambda: J.pareto(1.0, 3.0, moment_order=3.5),
        lambda: J.exponential(1.0, moment_order=2.0),
        lambda: J.point_mass(0.0),
    ],
)
def test_invalid_laws_rejected(bad):
    with pytest.raises(ValueError):
        bad()


def test_law_from_spec_roundtrip():
    law = J.jump_law_from_spec({"family": "gamma", "shape": 2, "scale": 0.5})
    assert law == J.gamma(2.0, 0.5)
    assert J.jump_law_from_spec(law.to_spec()) == law
    with pytest.raises(ValueError):
        J.jump_law_from_spec({"family": "gamma", "shape": 2})
    with pytest.raises(ValueError):
        J.jump_law_from_spec({"family": "weibull"})


# -- stationary delay ------------------------------------------------------------


def _integrated_tail(law, x):
    """Oracle: integrate the survival function directly."""
    pts = [v for v in law.params.values() if 0 < v < x]
    val, _ = integrate.quad(lambda y: float(law.survival(y)), 0.0, x, points=pts or None,
                            epsabs=1e-14, epsrel=1e-13, limit=500)
    return val / law.mean


@pytest.mark.parametrize(
    "law",
    [J.exponential(2.0), J.gamma(2.0, 0.5), J.gamma(0.5, 1.0), J.uniform(0.0, 2.0),
     J.uniform(1.0, 3.0), J.pareto(1.0, 2.5)],
    ids=lambda law: f"{law.family}{law.params}",
)
def test_delay_cdf_matches_integrated_tail(law):
    d = J.DelayLaw(law)
    for x in [0.0, 0.1, 0.5, 0.9, 1.0, 1.7, 2.5, 4.0, 9.0]:
        assert float(d.cdf(x)) == pytest.approx(_integrated_tail(law, x), abs=1e-10)
    assert float(d.cdf(1e9)) == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.diff(d.cdf(np.linspace(0, 10, 2001))) >= 0.0)


def test_uniform_delay_median():
    d = J.DelayLaw(J.uniform(0.0, 2.0))
    # x - x^2/4 = 1/2
    assert float(d.quantile(0.5)) == pytest.approx(2.0 - math.sqrt(2.0), abs=1e-12)


def test_exponential_delay_is_base_law():
    d = J.DelayLaw(J.exponential(1.0))
    xs = np.linspace(0.0, 8.0, 50)
    np.testing.assert_allclose(d.cdf(xs), 1.0 - np.exp(-xs), atol=1e-15)


def test_point_mass_delay_single_atom():
    law = J.point_mass(1.0)
    d = J.DelayLaw(law)
    assert d.atoms() == [(1.0, 1.0)]
    assert J.sample_stationary_delay(d, RngStream(0, 0)) == 1.0


@pytest.mark.parametrize(
    "law", [J.uniform(0.0, 2.0), J.uniform(0.5, 1.5), J.gamma(2.0, 0.5), J.gamma(0.3, 1.0)],
    ids=lambda law: f"{law.family}{law.params}",
)
def test_table_inversion_error_below_1e10(law):
    d = J.DelayLaw(law)
    u = np.concatenate([np.linspace(0.0, 1.0 - 1e-9, 20001), RngStream(9, 9).gen.random(20000)])
    x = d.quantile(u)
    assert np.max(np.abs(d.cdf(x) - u)) <= 1e-10


@pytest.mark.parametrize("law", [J.exponential(1.0), J.uniform(0.0, 2.0)], ids=lambda l: l.family)
def test_delay_sample_within_dkw_band(law):
    d = J.DelayLaw(law)
    n = 10**5
    x = np.sort(J.sample_stationary_delays(d, RngStream(11, 0), n))
    f = d.cdf(x)
    upper = np.arange(1, n + 1) / n
    lower = np.arange(0, n) / n
    dist = max(np.max(upper - f), np.max(f - lower))
    assert dist <= dkw_epsilon(n, 0.01)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), index=st.integers(0, 2**64 - 1))
def test_identical_keys_reproduce_draws(seed, index):
    law = J.gamma(1.5, 2.0)
    a = J.sample_jumps(law, RngStream(seed, index), 64)
    b = J.sample_jumps(law, RngStream(seed, index), 64)
    assert np.array_equal(a, b)
    assert J.sample_stationary_delay(J.DelayLaw(law), RngStream(seed, index)) == \
        J.sample_stationary_delay(J.DelayLaw(law), RngStream(seed, index))
