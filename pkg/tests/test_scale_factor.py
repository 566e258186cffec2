"""Background geometry: closed forms, derivative consistency, horizons,
expansion-rate thresholds, and the monotone-plus-curvature gate."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgflrw import (DeSitter, PowerLaw, Tabulated, c_epsilon,
                    check_monotone_expansion, check_t0_condition, hubble_rate,
                    min_admissible_t0, t0_condition_threshold)
from kgflrw.errors import (NegativeTime, NoAdmissibleT0, TimeBeyondHorizon)

# frozen references
GOLDEN = (math.sqrt(5.0) + 1.0) / 2.0  # c_epsilon at m = c = eps = 1


def fd_check(sf, t, dt=1e-4):
    """Central-difference consistency of (a, adot, addot)."""
    a_m, _, _ = sf.eval(t - dt)
    a_0, ad, add = sf.eval(t)
    a_p, _, _ = sf.eval(t + dt)
    ad_fd = (a_p - a_m) / (2 * dt)
    add_fd = (a_p - 2 * a_0 + a_m) / (dt * dt)
    assert ad == pytest.approx(ad_fd, rel=1e-7, abs=1e-7)
    assert add == pytest.approx(add_fd, rel=1e-5, abs=1e-5)


def test_powerlaw_closed_form():
    sf = PowerLaw(a0=2.0, H=0.7, sigma=1.0, n=3)
    expo = 2.0 / (3 * 2.0)
    for t in (0.0, 0.3, 1.7):
        base = 1.0 + 3 * 2.0 * 0.7 * t / 2.0
        a, ad, _ = sf.eval(t)
        assert a == pytest.approx(2.0 * base ** expo, rel=1e-14)
    fd_check(sf, 0.9)
    assert hubble_rate(sf, 0.0) == pytest.approx(0.7, rel=1e-14)


def test_powerlaw_minkowski_is_static():
    sf = PowerLaw(a0=1.0, H=0.0, sigma=0.0, n=1)
    a, ad, add = sf.eval(1.23)
    assert (a, ad, add) == (1.0, 0.0, 0.0)
    assert sf.horizon() == math.inf


def test_desitter_exact_exponential():
    sf = DeSitter(a0=1.5, H=0.4, n=2)
    for t in (0.0, 0.8, 2.0):
        a, ad, add = sf.eval(t)
        assert a == pytest.approx(1.5 * math.exp(0.4 * t), rel=1e-15)
        assert ad == pytest.approx(0.4 * a, rel=1e-15)
        assert add == pytest.approx(0.16 * a, rel=1e-15)
    fd_check(sf, 1.1)


def test_desitter_curvature_identity_machine_zero():
    # adot^2 - addot*a vanishes identically for the exponential background;
    # numerically it survives to a few ulps of the products
    eps_m = np.finfo(float).eps
    for H in (0.0, 0.3, 1.0, 2.5):
        sf = DeSitter(a0=1.0, H=H, n=3)
        for t in np.linspace(0.0, 4.0, 41):
            a, ad, add = sf.eval(float(t))
            scale = max(ad * ad, abs(add * a), 1e-300)
            assert abs(ad * ad - add * a) <= 8.0 * eps_m * scale


def test_negative_time_rejected():
    sf = DeSitter(a0=1.0, H=0.5, n=1)
    with pytest.raises(NegativeTime):
        sf.eval(-0.1)


def test_horizon_formula_triples():
    # 20 (n, sigma, H) triples; finite exactly when (1+sigma)H < 0
    triples = [(n, s, H) for n in (1, 2, 3)
               for s in (-3.0, -1.5, 0.0, 1.0)
               for H in (-0.5, 0.8)][:20]
    assert len(triples) == 20
    for n, s, H in triples:
        sf = PowerLaw(a0=1.0, H=H, sigma=s, n=n)
        if (1.0 + s) * H >= 0:
            assert sf.horizon() == math.inf
        else:
            T0 = -2.0 / (n * (1.0 + s) * H)
            assert sf.horizon() == pytest.approx(T0, rel=1e-14)
            a_near, _, _ = sf.eval(0.9999999 * T0)
            if (1.0 + s) < 0:  # expansion blows up (phantom)
                assert a_near > 1e2
            else:              # contraction to zero (crunch)
                assert a_near < 1e-2
            with pytest.raises(TimeBeyondHorizon):
                sf.eval(T0)


def test_desitter_horizon_infinite():
    assert DeSitter(a0=1.0, H=1.0, n=1).horizon() == math.inf


def test_monotone_expansion_closed_forms():
    assert check_monotone_expansion(PowerLaw(a0=1, H=0.0, sigma=-5.0, n=1),
                                    0.0, 10.0)
    assert check_monotone_expansion(PowerLaw(a0=1, H=0.5, sigma=0.0, n=3),
                                    0.0, 10.0)
    assert check_monotone_expansion(DeSitter(a0=1, H=0.5, n=1), 0.0, 10.0)
    assert check_monotone_expansion(PowerLaw(a0=1, H=0.5, sigma=-0.999, n=1),
                                    0.0, 10.0)
    # contracting background fails the rate condition
    assert not check_monotone_expansion(DeSitter(a0=1, H=-0.2, n=1), 0.0, 1.0)


def test_bigrip_rejected():
    sf = PowerLaw(a0=1.0, H=1.0, sigma=-3.0, n=1)
    assert sf.horizon() == pytest.approx(1.0, rel=1e-14)
    assert not check_monotone_expansion(sf, 0.0, 0.9)


@settings(max_examples=60, deadline=None)
@given(H=st.floats(0.0, 3.0), sigma=st.floats(-0.9999, 4.0),
       n=st.integers(1, 3))
def test_monotone_expansion_property(H, sigma, n):
    sf = PowerLaw(a0=1.0, H=H, sigma=sigma, n=n)
    assert check_monotone_expansion(sf, 0.0, min(5.0, 0.9 * sf.horizon()))


@settings(max_examples=30, deadline=None)
@given(H=st.floats(0.05, 3.0), sigma=st.floats(-4.0, -1.1),
       n=st.integers(1, 3))
def test_phantom_rejected_property(H, sigma, n):
    sf = PowerLaw(a0=1.0, H=H, sigma=sigma, n=n)
    assert not check_monotone_expansion(sf, 0.0, 0.9 * sf.horizon())


def test_tabulated_matches_source():
    src = DeSitter(a0=1.0, H=0.5, n=1)
    ts = np.linspace(0.0, 2.0, 201)
    a_v, ad_v, add_v = src.eval(ts)
    tab = Tabulated(ts, a_v, ad_v, add_v, n=1)
    assert tab.horizon() == pytest.approx(2.0)
    for t in (0.0, 0.37, 1.99):
        a_t, ad_t, _ = tab.eval(t)
        a_s, ad_s, _ = src.eval(t)
        assert a_t == pytest.approx(a_s, rel=1e-6)
        assert ad_t == pytest.approx(ad_s, rel=1e-5)
    # the last knot itself stays evaluable; beyond it is out of domain
    tab.eval(2.0)
    with pytest.raises(TimeBeyondHorizon):
        tab.eval(2.0 + 1e-6)
    assert check_monotone_expansion(tab, 0.0, 1.9)


def test_tabulated_needs_enough_knots():
    with pytest.raises(ValueError):
        Tabulated([0.0, 1.0], [1.0, 2.0], [1.0, 1.0], [0.0, 0.0], n=1)


def test_tabulated_rejects_inconsistent_rate():
    ts = np.linspace(0.0, 1.0, 8)
    a_v = np.exp(ts)
    with pytest.raises(ValueError):
        Tabulated(ts, a_v, -np.exp(ts), np.exp(ts), n=1)


def test_t0_threshold_and_condition():
    # threshold = |m| c (sqrt(eps(eps+4)) - eps) / (2n)
    thr = t0_condition_threshold(1.0, 1.0, 1.0, 1)
    assert thr == pytest.approx((math.sqrt(5.0) - 1.0) / 2.0, rel=1e-14)
    assert t0_condition_threshold(0.0, 1.0, 1.0, 1) == math.inf
    ok, got = check_t0_condition(DeSitter(a0=1, H=0.5, n=1), 0.0, 1.0, 1.0, 1.0)
    assert ok and got == pytest.approx(thr)
    ok, _ = check_t0_condition(DeSitter(a0=1, H=0.7, n=1), 0.0, 1.0, 1.0, 1.0)
    assert not ok


def test_c_epsilon_frozen():
    # C_eps = 2 / (|m| c (sqrt(eps(eps+4)) - eps)); the golden ratio at 1,1,1
    assert c_epsilon(1.0, 1.0, 1.0) == pytest.approx(GOLDEN, rel=1e-15)
    # reciprocal relation with the rate threshold
    for m, c, eps, n in [(1.0, 1.0, 1.0, 1), (2.0, 0.5, 3.0, 3)]:
        thr = t0_condition_threshold(m, c, eps, n)
        assert c_epsilon(m, c, eps) == pytest.approx(1.0 / (n * thr), rel=1e-13)


def test_min_admissible_t0():
    # flat or slow expansion: t0 = 0 already admissible
    assert min_admissible_t0(PowerLaw(a0=1, H=0.0, sigma=0, n=1),
                             1.0, 1.0, 1.0).t0 == 0.0
    assert min_admissible_t0(DeSitter(a0=1, H=0.5, n=1),
                             1.0, 1.0, 1.0).t0 == 0.0
    # powerlaw rate decays like 1/t: admissible start exists and matches
    sf = PowerLaw(a0=1.0, H=2.0, sigma=0.0, n=1)
    res = min_admissible_t0(sf, 1.0, 1.0, 1.0)
    assert res.t0 > 0.0
    assert res.c_eps == pytest.approx(GOLDEN, rel=1e-14)
    ok, thr = check_t0_condition(sf, res.t0 * (1 + 1e-9), 1.0, 1.0, 1.0)
    assert ok
    # ... and the found start sits exactly on the rate threshold
    assert hubble_rate(sf, res.t0) == pytest.approx(thr, rel=1e-12)
    # de Sitter rate never decays: beyond-threshold H has no admissible start
    with pytest.raises(NoAdmissibleT0):
        min_admissible_t0(DeSitter(a0=1.0, H=5.0, n=1), 1.0, 1.0, 1.0)
