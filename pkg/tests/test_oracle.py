import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import delaunay_sn.oracle as oracle
from delaunay_sn import (
    CmcParams,
    DomainError,
    StencilTooWide,
    assemble_global,
    cmc_residual,
    contact_constant,
    mean_curvature_fd,
    profile_interval,
    shape_diagonal,
    static_torus_curve,
)
from delaunay_sn.oracle import uniform_global, uniform_piece


def random_interior(n, h, t, u):
    lo, hi = -contact_constant(n, -h), contact_constant(n, h)
    C = lo + t * (hi - lo)
    p = CmcParams(n, h, C)
    if p.is_flower:
        return None, None
    iv = profile_interval(p)
    s = iv.s_lo + u * iv.length
    # Theta vanishes where R does (the geodesic, and s_hat on nodoids)
    if abs(C + p.k * math.sin(s) ** (n - 1)) < 1e-9:
        return None, None
    return p, s


@settings(max_examples=200, deadline=None)
@given(
    st.integers(3, 6),
    st.floats(-4, 4, allow_nan=False),
    st.floats(0.01, 0.99),
    st.floats(0.01, 0.99),
)
def test_residual_vanishes(n, h, t, u):
    p, s = random_interior(n, h, t, u)
    if p is None:
        return
    assert abs(cmc_residual(s, p)) < 1e-8


def test_residual_detects_a_wrong_curve(monkeypatch):
    # Theta of one mean curvature checked against the equation of another
    p = CmcParams(3, 1.0, 0.1)
    q = CmcParams(3, 1.0 + 1e-3, 0.1)
    iv = profile_interval(p)
    s = np.linspace(iv.s_lo, iv.s_hi, 7)[1:-1]
    true_theta = oracle._theta_and_derivative
    monkeypatch.setattr(oracle, "_theta_and_derivative", lambda s, params: true_theta(s, p))
    assert np.all(np.abs(cmc_residual(s, q)) > 1e-3)


def test_residual_domain_errors():
    p = CmcParams(3, 1.0, -0.2)
    iv = profile_interval(p)
    with pytest.raises(DomainError):
        cmc_residual(iv.s_hat, p)
    with pytest.raises(DomainError):
        cmc_residual(iv.s_hi + 0.01, p)


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 7), st.floats(-3, 3, allow_nan=False), st.floats(0.02, 0.98), st.floats(0.02, 0.98))
def test_shape_trace_is_h(n, h, t, u):
    p, s = random_interior(n, h, t, u)
    if p is None:
        return
    first, second = shape_diagonal(s, p)
    assert (n - 2) * first + second == pytest.approx(h, abs=1e-9)


def test_shape_diagonal_near_contact_is_the_torus():
    # close to C_h the hypersurface is near the product torus with curvatures cot and -tan
    n, h = 4, 1.0
    p = CmcParams(n, h, (1 - 1e-8) * contact_constant(n, h))
    iv = profile_interval(p)
    s = 0.5 * (iv.s_lo + iv.s_hi)
    first, second = shape_diagonal(s, p)
    assert first == pytest.approx(1 / math.tan(s), rel=1e-6)
    assert second == pytest.approx(-math.tan(s), abs=1e-2)


# --- finite differences -------------------------------------------------------


@pytest.mark.parametrize("h", [0.0, 1.0, -2.0])
def test_fd_static_torus(h):
    n = 3
    curve = static_torus_curve(n, h, 64)
    params = CmcParams(n, h, contact_constant(n, h))
    rep = mean_curvature_fd(curve, params)
    assert rep.max_abs_err < 1e-10


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("h", [0.5, 1.0, 2.0, 4.0])
def test_fd_sphere_union(n, h):
    curve = uniform_global(CmcParams(n, h, 0.0), 1e-4)
    rep = mean_curvature_fd(curve, margin=0.1)
    assert rep.max_abs_err < 1e-6


def test_fd_convergence_on_unduloid():
    p = CmcParams(3, 1.0, 0.5 * contact_constant(3, 1.0))
    e1 = mean_curvature_fd(uniform_piece(p, 1e-4)).max_abs_err
    e2 = mean_curvature_fd(uniform_piece(p, 2.5e-5)).max_abs_err
    assert e1 < 1e-4
    assert e1 / e2 >= 12


def test_fd_wider_stencil_still_consistent():
    p = CmcParams(3, 1.0, 0.5 * contact_constant(3, 1.0))
    rep = mean_curvature_fd(uniform_piece(p, 1e-4), stencil_width=4)
    assert rep.max_abs_err < 1e-4 and rep.stencil_width == 4


@pytest.mark.parametrize(
    "params",
    [CmcParams(3, 1.0, -0.2), CmcParams(4, 2.0, 0.05), CmcParams(3, -1.0, 0.1)],
    ids=["nodoid", "unduloid-n4", "negative-h"],
)
def test_fd_on_assembled_curves(params):
    curve = uniform_global(params, 2e-4, periods=2)
    rep = mean_curvature_fd(curve)
    assert rep.max_abs_err < 1e-4
    np.testing.assert_allclose(rep.samples[:, 2], params.h)


def test_fd_conventions_after_flower():
    h = 1.0
    C = -0.5 * (0.5 + contact_constant(3, -1.0))
    curve = uniform_global(CmcParams(3, h, C), 2e-4)
    fixed = mean_curvature_fd(curve, normal_convention="fixed")
    cont = mean_curvature_fd(curve, normal_convention="continuous")
    assert fixed.max_abs_err < 1e-4 and cont.max_abs_err < 1e-4
    assert fixed.samples[0, 2] == -h and cont.samples[0, 2] == h
    with pytest.raises(ValueError):
        mean_curvature_fd(curve, normal_convention="outer")


def test_fd_flower():
    curve = uniform_global(CmcParams(3, -1.0, 0.5), 2e-4, periods=2)
    rep = mean_curvature_fd(curve, normal_convention="continuous")
    assert rep.max_abs_err < 1e-4


def test_fd_does_not_use_closed_form(monkeypatch):
    # the oracle must work from the samples alone
    curve = uniform_piece(CmcParams(3, 1.0, 0.1), 2e-4)

    def forbidden(*args, **kwargs):
        raise AssertionError("closed-form profile function called")

    for name in ("s1_rate", "theta", "denom_D", "d_denom_D", "rhs_R", "envelope_L", "profile_interval"):
        monkeypatch.setattr(oracle, name, forbidden, raising=False)
    rep = mean_curvature_fd(curve)
    assert rep.max_abs_err < 1e-4


def test_fd_detects_a_wrong_curve():
    p = CmcParams(3, 1.0, 0.1)
    curve = uniform_piece(p, 2e-4)
    assert mean_curvature_fd(curve, CmcParams(3, 1.05, 0.1)).max_abs_err > 1e-2
    bent = type(curve)(p, curve.samples * np.array([1.0, 1.01]), 1, (), curve.tag, ())
    assert mean_curvature_fd(bent).max_abs_err > 1e-3


def test_fd_argument_errors():
    curve = assemble_global(CmcParams(3, 1.0, 0.1), grid_size=64)
    with pytest.raises(StencilTooWide):
        mean_curvature_fd(curve, stencil_width=200)
    with pytest.raises(ValueError):
        mean_curvature_fd(curve, margin=0.6)
    with pytest.raises(ValueError):
        mean_curvature_fd(static_torus_curve(3, 1.0))


def test_report_serialization():
    rep = mean_curvature_fd(static_torus_curve(3, 1.0, 16), CmcParams(3, 1.0, contact_constant(3, 1.0)))
    d = json.loads(rep.to_json(1e-8))
    assert d["passed"] is True and d["count"] == len(rep.samples)
    assert set(d["samples"][0]) == {"s", "H_numeric", "H_target", "sphere_value", "profile_value"}
