"""Period width W(h, C) = 2 * integral of ds1/ds over the profile interval.

At a D-zero endpoint ``e`` the integrand blows up like ``|s - e|^{-1/2}``
(the zero of D is simple there).  Writing ``s = e +/- u^2`` turns it into an
analytic function of ``u`` which adaptive Gauss-Kronrod handles to machine
precision.  On the flower parameter the upper endpoint is the pole, where the
integrand has the finite limit h/2 but suffers cancellation; there it is
replaced by a fourth order series in ``pi/2 - s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .exceptions import NonConvergent, OutOfBand
from .profile import (
    BOUNDARY_RTOL,
    EPS_POLE,
    HALF_PI,
    CmcParams,
    EndpointKind,
    ProfileInterval,
    contact_constant,
    equilibrium_latitude,
    gap_derivative,
    gap_from_root,
    profile_interval,
)

#: errEst above this raises NonConvergent
MAX_ERR = 1e-6

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=400, full_output=1)


@dataclass(frozen=True)
class WidthResult:
    W: float
    err_est: float
    endpoints_handled: tuple


@dataclass(frozen=True)
class AdjustedWidth:
    Wtilde: float
    branch: str
    err_est: float = 0.0


def flower_rate(s, n: int, h: float):
    """Phase speed on the flower curve (mean curvature -h, C = h/(n-1)), h > 0.

    Positive on the whole interval and equal to h/2 at the pole.  Within
    EPS_POLE of the pole the series through (pi/2 - s)^4 is used; elsewhere a
    closed form that avoids forming 1 - sin^{n-1} s directly.
    """
    s = np.asarray(s, dtype=float)
    delta = HALF_PI - s
    d2 = delta * delta
    series = (
        0.5 * h
        + d2 * (h**3 / 16.0 + (n - 1) * h / 8.0)
        + d2 * d2
        * (3.0 * h**5 / 256.0 + (9 * n - 13) * h**3 / 192.0 + (n * n - n - 1) * h / 48.0)
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        m = n - 1
        one_minus = -np.expm1(m * np.log1p(-2.0 * np.sin(0.5 * delta) ** 2))
        sd = np.sin(delta)
        q = (h / m) * one_minus / (sd * sd)
        closed = q / np.sqrt(np.cos(delta) ** (2 * (n - 2)) - (q * sd) ** 2)
    out = np.where(delta < EPS_POLE, series, closed)
    return out[()] if out.ndim == 0 else out


def width_limit_at_zero(n: int, h: float) -> float:
    """lim_{C -> 0+} W(h, C) = 2 arctan((n-1)/h), h > 0."""
    if not h > 0:
        raise ValueError("width_limit_at_zero needs h > 0")
    return 2.0 * math.atan((n - 1) / h)


def width_limit_at_contact(n: int, h: float) -> float:
    """lim_{C -> C_h-} W(h, C), evaluated by both closed forms."""
    cot = 1.0 / math.tan(equilibrium_latitude(n, h))
    first = 2.0 * math.pi / math.sqrt(1.0 + (n - 2) * cot * cot)
    second = 2.0 * math.pi / math.sqrt(
        2.0 + (h * h + h * math.sqrt(h * h + 4.0 * (n - 2))) / (2.0 * (n - 2))
    )
    if abs(first - second) > 1e-12 * max(1.0, abs(h)) ** 2:
        raise ArithmeticError(f"contact limit forms disagree: {first!r} vs {second!r}")
    return first


# ---------------------------------------------------------------------------
# integrands


def _offset_trig(se: float, ce: float, d):
    """sin and cos of e + d from those of e.

    Near the pole cos s is tiny and cos(e + d) evaluated directly carries an
    absolute rounding error that is large relative to it; the addition
    formula keeps the integrand smooth in d.
    """
    sd, cd = np.sin(d), np.cos(d)
    return se * cd + ce * sd, ce * cd - se * sd


def _endpoint_trig(params: CmcParams, e: float, factor: str):
    """sin e and cos e for a D-zero endpoint, with cos e to full relative precision.

    A root near the pole is only known to an absolute accuracy of one ulp of
    pi/2, which is a large relative error in cos e when the band hugs the
    pole.  There the root is re-solved in t = pi/2 - s.
    """
    ce = math.cos(e)
    if ce > 1e-3:
        return math.sin(e), ce
    n, C, k = params.n, params.C, params.k
    sgn = -1.0 if factor == "minus" else 1.0

    def g(t):
        c = math.cos(t)
        return math.sin(t) * c ** (n - 2) + sgn * (C + k * c ** (n - 1))

    t0 = HALF_PI - e
    lo, hi = 0.5 * t0, 2.0 * t0 + 1e-300
    if not g(lo) * g(hi) < 0:
        return math.sin(e), ce
    t = brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
    return math.cos(t), math.sin(t)


def _dzero_integrand(params: CmcParams, e: float, sigma: float, factor: str):
    """u -> ds1/ds(e + sigma u^2) * 2u for a D-zero endpoint e."""
    n, h, C = params.n, params.h, params.C
    k = params.k
    sgn = -1.0 if factor == "minus" else 1.0

    se, ce = _endpoint_trig(params, e, factor)
    Le = ce * se ** (n - 2)
    Re = C + k * se ** (n - 1)
    slope = abs(float(gap_derivative(e, params, factor)))
    other_e = Le - sgn * Re
    limit = 2.0 * Re / (ce * math.sqrt(slope * other_e))

    def f(u):
        if u == 0.0:
            return limit
        d = sigma * u * u
        s = e + d
        sn, cs = _offset_trig(se, ce, d)
        L = cs * sn ** (n - 2)
        R = C + k * sn ** (n - 1)
        vanishing = L + sgn * R
        if abs(vanishing) < 1e-3 * (L + abs(R)):
            vanishing = float(gap_from_root(s, e, params, factor, d))
        D = vanishing * (L - sgn * R)
        if not D > 0:
            return limit
        return R / (cs * math.sqrt(D)) * 2.0 * u

    return f


def substituted_rate(u, params: CmcParams, e: float, sigma: float, factor: str, absolute=False):
    """Vectorized ``ds1/ds(e + sigma u^2) * 2u`` near the D-zero endpoint ``e``."""
    n, C, k = params.n, params.C, params.k
    sgn = -1.0 if factor == "minus" else 1.0
    u = np.asarray(u, dtype=float)
    se, ce = _endpoint_trig(params, e, factor)
    d = sigma * u * u
    s = e + d
    sn, cs = _offset_trig(se, ce, d)
    L = cs * sn ** (n - 2)
    R = C + k * sn ** (n - 1)
    vanishing = L + sgn * R
    bad = np.abs(vanishing) < 1e-3 * (L + np.abs(R))
    if np.any(bad):
        vanishing = np.array(vanishing, copy=True)
        vanishing[bad] = gap_from_root(s[bad], e, params, factor, d[bad])
    D = vanishing * (L - sgn * R)
    Re = C + k * se ** (n - 1)
    other_e = ce * se ** (n - 2) - sgn * Re
    limit = 2.0 * Re / (ce * math.sqrt(abs(float(gap_derivative(e, params, factor))) * other_e))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(D > 0, R / (cs * np.sqrt(D)) * 2.0 * u, limit)
    return np.abs(out) if absolute else out


def plain_rate(s, params: CmcParams, absolute=False):
    """Vectorized ds1/ds away from D-zero endpoints, flower-regularized near the pole."""
    s = np.asarray(s, dtype=float)
    n, C, k = params.n, params.C, params.k
    sn, cs = np.sin(s), np.cos(s)
    L = cs * sn ** (n - 2)
    R = C + k * sn ** (n - 1)
    D = (L - R) * (L + R)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(R == 0.0, 0.0, R / (cs * np.sqrt(D)))
    if params.is_flower:
        near = HALF_PI - s < 0.05
        if np.any(near):
            sign = -math.copysign(1.0, params.h)
            out = np.where(near, sign * flower_rate(s, n, abs(params.h)), out)
    return np.abs(out) if absolute else out


def _plain_integrand(params: CmcParams):
    n, h, C = params.n, params.h, params.C
    k = params.k

    def f(s):
        sn, cs = math.sin(s), math.cos(s)
        L = cs * sn ** (n - 2)
        R = C + k * sn ** (n - 1)
        if R == 0.0:
            return 0.0
        D = (L - R) * (L + R)
        if not D > 0:
            raise NonConvergent(f"integrand left the admissible set at s={s!r}")
        return R / (cs * math.sqrt(D))

    return f


def _flower_integrand(params: CmcParams):
    n, h = params.n, params.h
    sign = -math.copysign(1.0, h)
    habs = abs(h)
    plain = _plain_integrand(params)

    def f(s):
        if HALF_PI - s < 0.05:
            return sign * float(flower_rate(s, n, habs))
        return plain(s)

    return f


def _run_quad(f, a, b, points=None):
    value, abserr, info, *rest = quad(f, a, b, points=points, **_QUAD_OPTS)
    return value, abserr


def half_integrals(params: CmcParams, iv: ProfileInterval, split: float | None = None):
    """Integrals of ds1/ds over [s_lo, split] and [split, s_hi].

    Returns ``((left, err), (right, err), tags)``.
    """
    if split is None:
        split = 0.5 * (iv.s_lo + iv.s_hi)
    tags = []
    pieces = []
    for e, kind, factor, sigma, a, b in (
        (iv.s_lo, iv.lo_kind, iv.lo_factor, 1.0, iv.s_lo, split),
        (iv.s_hi, iv.hi_kind, iv.hi_factor, -1.0, split, iv.s_hi),
    ):
        if kind is EndpointKind.D_ZERO:
            f = _dzero_integrand(params, e, sigma, factor)
            umax = math.sqrt(abs(split - e))
            # a root hugging the pole carries a spike of width sqrt(cos e) in u
            scale = math.sqrt(math.cos(e))
            points = [m * scale for m in (1.0, 10.0, 100.0) if m * scale < 0.5 * umax]
            v, err = _run_quad(f, 0.0, umax, points or None)
            tags.append("D-zero:u^2")
        elif kind is EndpointKind.POLE and params.is_flower:
            v, err = _run_quad(_flower_integrand(params), a, b)
            tags.append("pole:series")
        elif params.h == 0.0 and params.C == 0.0:
            v, err = 0.0, 0.0
            tags.append(kind.value)
        else:
            v, err = _run_quad(_plain_integrand(params), a, b)
            tags.append(kind.value)
        pieces.append((v, err))
    return pieces[0], pieces[1], tuple(tags)


def _integrate(params: CmcParams) -> WidthResult:
    iv = profile_interval(params)
    (left, e1), (right, e2), tags = half_integrals(params, iv)
    W = 2.0 * (left + right)
    err = 2.0 * (e1 + e2)
    if not (math.isfinite(W) and err <= MAX_ERR):
        raise NonConvergent(f"width quadrature for {params}: W={W!r}, errEst={err!r}")
    return WidthResult(W, err, tags)


def width(params: CmcParams) -> WidthResult:
    """Signed period width W(h, C) with a Gauss-Kronrod error estimate.

    Negative h is evaluated through W(h, C) = -W(-h, -C).  The flower
    parameter is rejected; use :func:`flower_width`.
    """
    if params.is_flower:
        raise ValueError("W is not defined on the flower parameter; use flower_width")
    if params.h < 0:
        res = _integrate(params.mirrored())
        return WidthResult(-res.W, res.err_est, res.endpoints_handled)
    return _integrate(params)


def flower_width(n: int, h: float) -> WidthResult:
    """beta = W(-h, h/(n-1)) for h > 0: twice the phase gained from z_L to the pole."""
    if not h > 0:
        raise ValueError("flower_width needs h > 0")
    return _integrate(CmcParams(n, -h, h / (n - 1)))


def adjusted_width(n: int, h: float, C: float) -> AdjustedWidth:
    """Continuous repair of W(h, .) across the flower parameter C = -h/(n-1).

    Defined for h >= 0 on [-C_{-h}, C_h]; the closed band edges return the
    contact limits.
    """
    if h < 0:
        raise ValueError("adjusted_width is defined for h >= 0")
    k = h / (n - 1)
    Ch = contact_constant(n, h)
    Cmh = contact_constant(n, -h)
    scale = max(Ch, Cmh)

    def close(x, b):
        return abs(x - b) <= BOUNDARY_RTOL * max(abs(b), scale)

    if close(C, Ch):
        return AdjustedWidth(width_limit_at_contact(n, h), "contact-limit")
    if close(C, -Cmh):
        return AdjustedWidth(2.0 * math.pi - width_limit_at_contact(n, -h), "neg-contact-limit")
    if C > Ch or C < -Cmh:
        raise OutOfBand(f"C={C!r} outside [-C_(-h), C_h] = [{-Cmh!r}, {Ch!r}]")
    if close(C, -k):
        if h == 0:
            # the flower degenerates to the great circle, beta = 0
            return AdjustedWidth(math.pi, "flower")
        beta = flower_width(n, h)
        return AdjustedWidth(math.pi - beta.W, "flower", beta.err_est)
    if C > -k:
        res = width(CmcParams(n, h, C))
        return AdjustedWidth(res.W, "width", res.err_est)
    res = width(CmcParams(n, -h, -C))
    return AdjustedWidth(2.0 * math.pi - res.W, "mirrored", res.err_est)
