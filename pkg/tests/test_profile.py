import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delaunay_sn import (
    CmcParams,
    DelaunayTag,
    DelaunayType,
    DomainError,
    EndpointKind,
    NoAdmissibleInterval,
    OutOfBand,
    classify,
    contact_constant,
    critical_constants,
    denom_D,
    envelope_L,
    equilibrium_latitude,
    equilibrium_ratio,
    profile_interval,
    rhs_R,
    s1_rate,
    theta,
)
from delaunay_sn.profile import d_denom_D, gap

from oracles import admissible_sign_scan, contact_latitude_by_bisection


# --- parameters -------------------------------------------------------------


def test_params_validation():
    with pytest.raises(ValueError):
        CmcParams(2, 0.0, 0.0)
    with pytest.raises(ValueError):
        CmcParams(3.5, 0.0, 0.0)
    with pytest.raises(ValueError):
        CmcParams(3, math.inf, 0.0)
    with pytest.raises(ValueError):
        CmcParams(3, 0.0, math.nan)
    p = CmcParams(4, 3.0, 0.1)
    assert p.k == 1.0
    assert p.mirrored() == CmcParams(4, -3.0, -0.1)


def test_admissibility_flag():
    assert CmcParams(3, 1.0, 0.1).is_admissible
    assert not CmcParams(3, 1.0, 0.5).is_admissible


# --- equilibrium data -------------------------------------------------------


def test_equilibrium_ratio_values():
    assert equilibrium_ratio(3, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert equilibrium_ratio(3, 1.0) == pytest.approx((1 + math.sqrt(5)) / 2, abs=1e-15)
    assert equilibrium_ratio(4, 0.0) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


@pytest.mark.parametrize("h", [-40.0, -3.0, -1e-3, 0.0, 2.0, 40.0])
def test_equilibrium_ratio_positive(h):
    assert equilibrium_ratio(5, h) > 0


def test_equilibrium_latitude_values():
    assert equilibrium_latitude(3, 0.0) == pytest.approx(math.pi / 4, abs=1e-15)
    assert equilibrium_latitude(3, 1.0) == pytest.approx(
        contact_latitude_by_bisection(3, 1.0), abs=1e-13
    )
    assert equilibrium_latitude(3, 1.0) == pytest.approx(math.atan((math.sqrt(5) - 1) / 2), abs=1e-14)
    assert equilibrium_latitude(4, 0.0) == pytest.approx(math.atan(math.sqrt(2)), abs=1e-15)


@pytest.mark.parametrize("n", range(3, 11))
def test_contact_equation_and_ratio(n):
    for h in np.linspace(-5, 5, 21):
        sh = equilibrium_latitude(n, h)
        assert abs(-math.tan(sh) + (n - 2) / math.tan(sh) - h) < 1e-12 * max(1, abs(h))
        assert abs(1 / math.tan(sh) - equilibrium_ratio(n, h)) < 1e-12
        assert sh == pytest.approx(contact_latitude_by_bisection(n, h), abs=1e-12)


def test_contact_constant_values():
    assert contact_constant(3, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert contact_constant(4, 0.0) == pytest.approx(2 / (3 * math.sqrt(3)), abs=1e-15)
    sh = contact_latitude_by_bisection(3, 1.0)
    assert contact_constant(3, 1.0) == pytest.approx(
        math.cos(sh) * math.sin(sh) - 0.5 * math.sin(sh) ** 2, abs=1e-13
    )


@pytest.mark.parametrize("n,h", [(3, 1.0), (4, -2.0), (6, 0.5), (3, 0.0)])
def test_contact_is_a_double_zero(n, h):
    Ch = contact_constant(n, h)
    sh = equilibrium_latitude(n, h)
    p = CmcParams(n, h, Ch)

    def g(s):
        return envelope_L(s, n) - rhs_R(s, Ch, h, n)

    assert abs(g(sh)) < 1e-15
    assert abs(d_denom_D(sh, p)) < 1e-12
    # quadratic on both sides: halving the offset quarters the gap
    for d in (1e-3, -1e-3):
        assert g(sh + d) < 0
        assert g(sh + d) / g(sh + d / 2) == pytest.approx(4.0, rel=2e-2)


def test_critical_constants():
    cc = critical_constants(5, 2.0)
    assert cc.s0 == pytest.approx(math.atan(math.sqrt(3)), abs=1e-14)
    assert cc.Ch == contact_constant(5, 2.0)
    assert cc.ChNeg == contact_constant(5, -2.0)
    assert cc.Ch > -2.0 / 4


# --- pointwise functions ------------------------------------------------------


def test_pointwise_values():
    assert envelope_L(math.pi / 4, 3) == pytest.approx(0.5, abs=1e-15)
    assert rhs_R(math.pi / 2, 0.2, 3.0, 4) == pytest.approx(1.2, abs=1e-15)
    p = CmcParams(3, 0.0, 0.3)
    assert denom_D(math.pi / 4, p) == pytest.approx(0.25 - 0.09, abs=1e-15)


def test_pointwise_n3_exponent():
    # n = 3 makes the envelope cos s sin s; exponent-zero slips would show here
    s = np.linspace(0.1, 1.4, 7)
    np.testing.assert_allclose(envelope_L(s, 3), np.cos(s) * np.sin(s), rtol=1e-15)
    np.testing.assert_allclose(rhs_R(s, 0.1, 2.0, 3), 0.1 + np.sin(s) ** 2, rtol=1e-15)


def test_theta_and_rate_values():
    p = CmcParams(3, 0.0, 0.3)
    assert theta(math.pi / 4, p) == pytest.approx(0.5625, abs=1e-14)
    assert s1_rate(math.pi / 4, p) == pytest.approx(0.3 / (math.sqrt(0.5) * 0.4), abs=1e-14)
    assert s1_rate(math.pi / 4, p) == pytest.approx(1.0607, abs=1e-4)


def test_theta_and_rate_vanish_at_s_hat():
    p = CmcParams(3, 1.0, -0.2)
    iv = profile_interval(p)
    assert iv.s_hat is not None
    assert theta(iv.s_hat, p) == 0.0
    assert s1_rate(iv.s_hat, p) == 0.0


def test_theta_diverges_at_contact():
    Ch = contact_constant(3, 1.0)
    sh = equilibrium_latitude(3, 1.0)
    values = [theta(sh, CmcParams(3, 1.0, (1 - eps) * Ch)) for eps in (1e-2, 1e-4, 1e-6)]
    # D at the contact latitude is linear in the distance to C_h
    assert values[0] < values[1] < values[2]
    assert values[2] / values[1] == pytest.approx(100.0, rel=1e-2)


def test_domain_errors():
    p = CmcParams(3, 1.0, 0.1)
    with pytest.raises(DomainError):
        theta(0.01, p)
    with pytest.raises(DomainError):
        s1_rate(1.5, p)


def test_flower_rate_limit_at_pole():
    for n, h in [(3, 1.0), (5, 2.5), (8, 0.3)]:
        p = CmcParams(n, -h, h / (n - 1))
        assert s1_rate(math.pi / 2, p) == pytest.approx(h / 2, abs=1e-12)
        assert s1_rate(math.pi / 2 - 1e-6, p) == pytest.approx(h / 2, abs=1e-9)


# --- intervals -----------------------------------------------------------------


def test_geodesic_interval():
    iv = profile_interval(CmcParams(4, 0.0, 0.0))
    assert (iv.s_lo, iv.s_hi) == (0.0, math.pi / 2)
    assert iv.lo_kind is EndpointKind.AXIS and iv.hi_kind is EndpointKind.POLE


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("h", [0.5, 1.0, 2.0, 4.0])
def test_sphere_union_interval(n, h):
    iv = profile_interval(CmcParams(n, h, 0.0))
    assert iv.s_lo == 0.0 and iv.lo_kind is EndpointKind.AXIS
    assert iv.s_hi == pytest.approx(math.atan((n - 1) / h), abs=1e-12)


@pytest.mark.parametrize(
    "n,h,frac", [(3, 1.0, 0.9), (3, 1.0, 0.3), (4, 2.0, -0.5), (5, 0.0, 0.7), (6, -1.0, 0.2)]
)
def test_interval_matches_sign_scan(n, h, frac):
    C = frac * (contact_constant(n, h) if frac > 0 else contact_constant(n, -h))
    iv = profile_interval(CmcParams(n, h, C))
    lo, hi = admissible_sign_scan(n, h, C)
    step = 0.5 * math.pi / 10_000
    assert iv.s_lo <= lo < iv.s_lo + step
    assert iv.s_hi - step < hi <= iv.s_hi
    assert iv.lo_kind is EndpointKind.D_ZERO and iv.hi_kind is EndpointKind.D_ZERO
    for e, factor in ((iv.s_lo, iv.lo_factor), (iv.s_hi, iv.hi_factor)):
        assert abs(gap(e, CmcParams(n, h, C), factor)) < 1e-12


@pytest.mark.parametrize("n,h", [(3, 1.0), (4, 0.5), (7, 3.0)])
def test_endpoints_are_simple_zeros(n, h):
    Ch = contact_constant(n, h)
    for frac in (0.01, 0.5, 0.99):
        p = CmcParams(n, h, frac * Ch)
        iv = profile_interval(p)
        for e in (iv.s_lo, iv.s_hi):
            assert abs(d_denom_D(e, p)) > 1e-8


def test_flower_interval_ends_at_pole():
    iv = profile_interval(CmcParams(3, -1.0, 0.5))
    assert iv.s_hi == math.pi / 2 and iv.hi_kind is EndpointKind.POLE


def test_no_admissible_interval():
    with pytest.raises(NoAdmissibleInterval):
        profile_interval(CmcParams(3, 1.0, 0.4))
    with pytest.raises(NoAdmissibleInterval):
        profile_interval(CmcParams(3, 1.0, -0.9))
    with pytest.raises(NoAdmissibleInterval):
        profile_interval(CmcParams(3, 1.0, contact_constant(3, 1.0)))


def test_band_shrinks_to_contact_latitude():
    for n, h in [(3, 1.0), (5, 0.2)]:
        p = CmcParams(n, h, (1 - 1e-5) * contact_constant(n, h))
        iv = profile_interval(p)
        assert iv.length < 1e-2
        assert iv.s_lo < equilibrium_latitude(n, h) < iv.s_hi


band_params = st.tuples(
    st.integers(3, 8),
    st.floats(-4, 4, allow_nan=False),
    st.floats(0.001, 0.999),
)


@settings(max_examples=60, deadline=None)
@given(band_params)
def test_symmetry_under_sign_flip(args):
    n, h, t = args
    lo, hi = -contact_constant(n, -h), contact_constant(n, h)
    C = lo + t * (hi - lo)
    p = CmcParams(n, h, C)
    if p.is_flower:
        return
    a, b = profile_interval(p), profile_interval(p.mirrored())
    assert (a.s_lo, a.s_hi) == pytest.approx((b.s_lo, b.s_hi), abs=1e-13)
    s = np.linspace(a.s_lo, a.s_hi, 9)[1:-1]
    np.testing.assert_allclose(s1_rate(s, p), -s1_rate(s, p.mirrored()), rtol=1e-13, atol=1e-15)


# --- classification --------------------------------------------------------


def test_classify_examples():
    assert classify(CmcParams(3, 1.0, 0.0)).tag is DelaunayTag.SPHERE_UNION
    assert classify(CmcParams(3, 1.0, -0.5)).tag is DelaunayTag.FLOWER
    assert classify(CmcParams(5, 2.0, -0.5)).tag is DelaunayTag.FLOWER
    assert classify(CmcParams(3, 0.0, 0.0)).tag is DelaunayTag.GEODESIC


def test_classify_bands():
    n, h = 3, 1.0
    Ch, Cmh, k = contact_constant(n, h), contact_constant(n, -h), h / (n - 1)
    expect = [
        (Ch, DelaunayTag.STATIC_TORUS),
        (0.5 * Ch, DelaunayTag.UNDULOID),
        (0.0, DelaunayTag.SPHERE_UNION),
        (-0.5 * k, DelaunayTag.NODOID),
        (-k, DelaunayTag.FLOWER),
        (-0.5 * (k + Cmh), DelaunayTag.NEG_UNDULOID),
        (-Cmh, DelaunayTag.NEG_STATIC_TORUS),
    ]
    for C, tag in expect:
        assert classify(CmcParams(n, h, C)).tag is tag
    # boundaries within the relative tolerance
    assert classify(CmcParams(n, h, Ch * (1 - 1e-12))).tag is DelaunayTag.STATIC_TORUS
    assert classify(CmcParams(n, h, 1e-13)).tag is DelaunayTag.SPHERE_UNION
    assert classify(CmcParams(n, h, -k * (1 + 1e-12))).tag is DelaunayTag.FLOWER
    with pytest.raises(OutOfBand):
        classify(CmcParams(n, h, Ch * 1.001))
    with pytest.raises(OutOfBand):
        classify(CmcParams(n, h, -Cmh * 1.001))


def test_classify_negative_h_uses_symmetry():
    assert classify(CmcParams(3, -1.0, 0.5)).tag is DelaunayTag.FLOWER
    assert classify(CmcParams(3, -1.0, -0.1)).tag is DelaunayTag.UNDULOID


def test_normal_convention_sign():
    fixed = DelaunayType(DelaunayTag.NEG_UNDULOID, "fixed")
    cont = DelaunayType(DelaunayTag.NEG_UNDULOID, "continuous")
    assert fixed.mean_curvature_sign == -1 and cont.mean_curvature_sign == 1
    assert DelaunayType(DelaunayTag.NODOID, "fixed").mean_curvature_sign == 1
    with pytest.raises(ValueError):
        classify(CmcParams(3, 1.0, 0.1), "sideways")
