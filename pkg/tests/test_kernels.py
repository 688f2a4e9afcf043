import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shotnoise import kernels as K

E = math.e

NEG_HALF = [
    K.moderate(1.0, 1.0),
    K.moderate(0.5),
    K.moderate(3.0),
    K.slow(1.0),
    K.slow(3.0),
    K.fast(1.0, 0.5),
    K.fast(0.5, 0.3),
]
ALL = NEG_HALF + [K.pure_power(0.0), K.pure_power(-0.25), K.pure_power(0.5)]


def kid(k):
    return f"{k.family}{k.params}"


# -- worked examples -------------------------------------------------------------


def test_h_examples():
    k = K.moderate(1.0, 1.0)
    assert k.h(4.0) == 0.5
    assert k.h(0.5) == 1.0
    k3 = K.moderate(3.0, E**2)
    assert k3.h(E**4) == pytest.approx(4 * E**-2, rel=1e-14)
    assert k3.h(E**4) == pytest.approx(0.541341, abs=1e-6)


def test_m_examples():
    k = K.moderate(1.0, 1.0)
    assert k.m(E**9) == pytest.approx(10.0, rel=1e-15)
    assert k.m(0.0) == 0.0
    # h(1) = 0 for rho=2 with t_min=1, so the plateau adds nothing: m = (log t)^2 / 2
    assert K.moderate(2.0, 1.0).m(E**4) == pytest.approx(8.0, rel=1e-14)
    for kern in ALL:
        assert kern.m(0.0) == 0.0


def test_m_inverse_examples():
    k = K.moderate(1.0, 1.0)
    assert k.m_inverse(10.0) == pytest.approx(E**9, rel=1e-13)
    assert k.m_inverse(10.0) == pytest.approx(8103.084, abs=1e-3)
    assert k.m_inverse(0.0) == 0.0
    assert k.m_inverse(0.5) == pytest.approx(0.5, rel=1e-15)


def test_scaling_g_examples():
    k = K.moderate(1.0, 1.0)
    assert K.scaling_g(k, E**9, 0.5) == pytest.approx(E**4, rel=1e-13)
    assert K.scaling_g(k, E**9, 0.5) == pytest.approx(54.59815, abs=1e-5)
    for kern in ALL:
        assert K.scaling_g(kern, 1e6, 0.0) == 0.0
        assert K.scaling_g(kern, 1e6, 1.0) == pytest.approx(1e6, rel=1e-9)


def test_h_primitive_examples():
    k = K.moderate(1.0, 1.0)
    assert k.H(4.0) == pytest.approx(3.0)
    assert k.H(0.0) == 0.0
    assert k.H(100.0) == pytest.approx(19.0)


def test_closed_form_scaling_examples():
    assert K.closed_form_scaling(K.moderate(1.0, 1.0), E**9, 0.5) == pytest.approx(E**4.5, rel=1e-13)
    assert K.closed_form_scaling(K.moderate(1.0, 1.0), E**9, 0.5) == pytest.approx(90.017, abs=1e-3)
    assert K.closed_form_scaling(K.moderate(4.0), E**16, 1 / 16) == pytest.approx(E**8, rel=1e-13)
    assert K.closed_form_scaling(K.slow(1.0), E ** (E**4), 0.5) == pytest.approx(E ** (E**2), rel=1e-12)
    with pytest.raises(ValueError):
        K.closed_form_scaling(K.pure_power(0.0), 100.0, 0.5)


# -- structural invariants ---------------------------------------------------------


@pytest.mark.parametrize("kern", NEG_HALF + [K.pure_power(0.0), K.pure_power(-0.25)], ids=kid)
def test_h_nonnegative_nonincreasing(kern):
    t = np.concatenate([np.linspace(0.0, 3 * kern.t_min, 2000), np.geomspace(kern.t_min, 1e15, 4000)])
    t.sort()
    h = kern.h(t)
    assert np.all(h >= 0.0)
    assert np.all(np.diff(h) <= 1e-15 * h[:-1])


@pytest.mark.parametrize("kern", NEG_HALF, ids=kid)
def test_h_matches_regular_variation_form(kern):
    t = np.geomspace(kern.t_min, 1e12, 50)
    s = np.log(t)
    p = kern.params
    if kern.family == "moderate":
        ell = s ** ((p["rho"] - 1) / 2)
    elif kern.family == "slow":
        ell = s**-0.5 * np.log(s) ** ((p["rho"] - 1) / 2)
    else:
        ell = np.exp(p["rho"] / 2 * s ** p["gamma"]) * s ** ((p["gamma"] - 1) / 2)
    np.testing.assert_allclose(kern.h(t), t**-0.5 * ell, rtol=1e-12)
    assert kern.h(0.5 * kern.t_min) == kern.h(kern.t_min)


@pytest.mark.parametrize("kern", ALL, ids=kid)
def test_m_closed_form_matches_quadrature(kern):
    for t in [0.3 * kern.t_min, kern.t_min, 2 * kern.t_min, 1e3, 1e6, 1e9, 1e12]:
        assert kern.m(t) == pytest.approx(kern.m_quad(t), rel=1e-9)


def test_H_quadrature_matches_antiderivative():
    # moderate rho=3: int s e^{s/2} ds = e^{s/2} (2s - 4)
    k = K.moderate(3.0)
    s0 = math.log(k.t_min)
    for t in [10.0, 1e4, 1e10]:
        s = math.log(t)
        exact = k.t_min * k.h_min + math.exp(s / 2) * (2 * s - 4) - math.exp(s0 / 2) * (2 * s0 - 4)
        assert k.H(t) == pytest.approx(exact, rel=1e-9)
    # pure power: quadrature route against the closed form used by H
    p = K.pure_power(-0.25)
    for t in [5.0, 1e5, 1e11]:
        assert p.t_min * p.h_min + p.H_quad_above(t) == pytest.approx(p.H(t), rel=1e-9)


@pytest.mark.parametrize("kern", NEG_HALF, ids=kid)
def test_m_slowly_varying_and_unbounded(kern):
    t = np.geomspace(1e2, 1e300, 30)
    r = np.abs(kern.m(2 * t) / kern.m(t) - 1.0)
    assert np.all(np.diff(r) <= 1e-12)
    # the fast family converges like rho*gamma*log(2)*s^(gamma-1), slowest of the three
    assert r[-1] < 0.02
    assert kern.m(1e300) > kern.m(1e100) > kern.m(1e10)


@pytest.mark.parametrize("kern", ALL, ids=kid)
def test_m_inverse_closed_form_matches_bisection(kern):
    for v in [0.1 * kern.m_plateau, kern.m_plateau, 0.5 * kern.m(1e6), kern.m(1e6), kern.m(1e11)]:
        if v <= 0:
            continue
        t_cf = kern.m_inverse(v)
        assert kern.m_inverse_bisect(v) == pytest.approx(t_cf, rel=1e-9)
        assert abs(kern.m(t_cf) - v) <= 1e-9 * max(1.0, v)


@settings(max_examples=200, deadline=None)
@given(
    kern=st.sampled_from(NEG_HALF),
    log10_t=st.floats(2.0, 12.0),
    u=st.floats(0.0, 1.0),
)
def test_scaling_inverts_m_ratio(kern, log10_t, u):
    t = 10.0**log10_t
    g = K.scaling_g(kern, t, u)
    assert abs(kern.m(g) / kern.m(t) - u) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(kern=st.sampled_from(ALL), log10_t=st.floats(2.0, 12.0), u=st.floats(0.0, 1.0), du=st.floats(0.0, 1.0))
def test_scaling_nondecreasing_in_u(kern, log10_t, u, du):
    t = 10.0**log10_t
    v = min(1.0, u + du)
    assert K.scaling_g(kern, t, u) <= K.scaling_g(kern, t, v) * (1 + 1e-12)


@pytest.mark.parametrize("kern", [K.moderate(1.0, 1.0), K.moderate(3.0), K.slow(2.0), K.fast(1.0, 0.5)], ids=kid)
@pytest.mark.parametrize("u", [0.25, 0.5, 0.75])
def test_closed_form_scaling_consistency_trend(kern, u):
    t_grid = np.geomspace(1e3, 1e12, 10)
    dev = [abs(kern.m(K.closed_form_scaling(kern, t, u)) / kern.m(t) - u) for t in t_grid]
    assert all(b < a for a, b in zip(dev, dev[1:]))


# -- Karamata and the power-kernel normalization -------------------------------------------


def test_karamata_pure_power_limit():
    k = K.pure_power(0.5)
    t = 1e10
    assert abs(k.m(t) / (t * k.h(t) ** 2) - 0.5) <= 1e-2
    k0 = K.pure_power(0.0)
    # m(t) = t for the constant kernel, plateau included
    assert abs(k0.m(1e6) / (1e6 * k0.h(1e6) ** 2) - 1.0) <= 1e-5


@pytest.mark.parametrize("kern", NEG_HALF, ids=kid)
def test_karamata_slowly_varying_ratio_tends_to_zero(kern):
    t = np.geomspace(max(10 * kern.t_min, 1e3), 1e200, 40)
    r = t * kern.h(t) ** 2 / kern.m(t)
    assert np.all(np.diff(r) < 0.0)
    assert r[-1] < 0.05


def test_moderate_ratio_closed_form():
    k = K.moderate(1.0, 1.0)
    for t in [E**9, 1e3, 1e8, 1e12]:
        assert t * k.h(t) ** 2 / k.m(t) == pytest.approx(1 / (1 + math.log(t)), abs=1e-6)
    assert E**9 * k.h(E**9) ** 2 / k.m(E**9) == pytest.approx(0.1, rel=1e-12)


@pytest.mark.parametrize("beta", [0.0, 0.5, -0.25])
def test_power_kernel_normalization(beta):
    k = K.pure_power(beta)
    t = 1e10
    ratio = math.sqrt(k.m(t)) / ((2 * beta + 1) ** -0.5 * math.sqrt(t) * k.h(t))
    assert abs(ratio - 1.0) <= 1e-2


# -- construction -------------------------------------------------------------------


def test_default_cutoffs():
    assert K.moderate(1.0).t_min == 1.0
    assert K.moderate(3.0).t_min == pytest.approx(E**2)
    assert K.slow(1.0).t_min == pytest.approx(E**E)
    # late increase of log h for large rho pushes the slow cutoff outward
    assert K.slow(8.0).t_min > E**E
    k = K.fast(2.0, 0.5)
    s = np.log(np.geomspace(k.t_min, 1e20, 2000))
    assert np.all(np.diff(k.h(np.exp(s))) <= 0.0)


def test_kernel_from_spec():
    k = K.kernel_from_spec({"family": "moderate", "rho": 1.0, "t_min": 1.0})
    assert k == K.moderate(1.0, 1.0)
    assert K.kernel_from_spec(k.to_spec()) == k
    with pytest.raises(ValueError):
        K.kernel_from_spec({"family": "fast", "rho": 1.0})
    with pytest.raises(ValueError):
        K.kernel_from_spec({"family": "pure_power", "beta": -0.5})
    with pytest.raises(ValueError):
        K.kernel_from_spec({"family": "slow", "rho": 1.0, "t_min": 2.0})
