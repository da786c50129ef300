"""Closed-form profile functions and admissible parameter domains.

A rotational hypersurface of S^n is swept by rotating the generating curve
``gamma(s) = (cos s * exp(i s1(s)), sin s)`` on S^2 with the round factor
S^{n-2}.  It has constant (unnormalized) mean curvature ``h`` exactly when

    Theta = R^2 / D,        ds1/ds = R / (cos s * sqrt(D))

with ``L(s) = cos s sin^{n-2} s``, ``R(s) = C + h/(n-1) sin^{n-1} s`` and
``D = L^2 - R^2``.  Everything here is a pure function of ``(n, h, C)``.

Sign convention: ``h`` and ``C`` are stored signed.  A curve of mean
curvature ``-h`` with constant ``C`` is the mirror image (s1 -> -s1) of the
curve for ``(h, -C)``; :meth:`CmcParams.mirrored` implements that map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .exceptions import DomainError, NoAdmissibleInterval, OutOfBand

HALF_PI = 0.5 * math.pi

#: relative tolerance for deciding measure-zero classification boundaries
BOUNDARY_RTOL = 1e-10

#: inside this distance from pi/2 the flower rate is replaced by its series
EPS_POLE = 1e-4

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


@dataclass(frozen=True)
class CmcParams:
    """Ambient dimension ``n``, signed mean curvature ``h`` and constant ``C``."""

    n: int
    h: float
    C: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValueError(f"n must be an integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if self.n < 3:
            raise ValueError(f"n must be >= 3, got {self.n}")
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "C", float(self.C))
        if not (math.isfinite(self.h) and math.isfinite(self.C)):
            raise ValueError("h and C must be finite")

    @property
    def k(self) -> float:
        """Coefficient h/(n-1) of sin^{n-1} s in R."""
        return self.h / (self.n - 1)

    def mirrored(self) -> "CmcParams":
        return CmcParams(self.n, -self.h, -self.C)

    @property
    def is_flower(self) -> bool:
        """True on the pole-touching parameter C = -h/(n-1), h != 0."""
        return self.h != 0.0 and abs(self.C + self.k) <= BOUNDARY_RTOL * abs(self.k)

    @property
    def is_admissible(self) -> bool:
        try:
            profile_interval(self)
        except NoAdmissibleInterval:
            return False
        return True


@dataclass(frozen=True)
class CriticalConstants:
    s0: float
    sh: float
    Ch: float
    ChNeg: float


class EndpointKind(str, Enum):
    D_ZERO = "D-zero"
    AXIS = "axis-zero"
    POLE = "pole"


@dataclass(frozen=True)
class ProfileInterval:
    """Maximal open s-interval on which D > 0.

    ``lo_factor``/``hi_factor`` name the vanishing factor of
    ``D = (L - R)(L + R)`` at a D-zero endpoint: ``"minus"`` or ``"plus"``.
    """

    s_lo: float
    s_hi: float
    lo_kind: EndpointKind
    hi_kind: EndpointKind
    s_hat: Optional[float] = None
    lo_factor: Optional[str] = None
    hi_factor: Optional[str] = None

    @property
    def length(self) -> float:
        return self.s_hi - self.s_lo

    def contains(self, s) -> bool:
        s = np.asarray(s)
        return bool(np.all((s > self.s_lo) & (s < self.s_hi)))


class DelaunayTag(str, Enum):
    STATIC_TORUS = "StaticTorus"
    UNDULOID = "Unduloid"
    SPHERE_UNION = "SphereUnion"
    NODOID = "Nodoid"
    FLOWER = "Flower"
    NEG_UNDULOID = "NegUnduloid"
    NEG_STATIC_TORUS = "NegStaticTorus"
    GEODESIC = "Geodesic"


# Beyond the flower the deformation continues with the opposite fixed normal.
POST_FLOWER_TAGS = frozenset(
    {DelaunayTag.FLOWER, DelaunayTag.NEG_UNDULOID, DelaunayTag.NEG_STATIC_TORUS}
)


@dataclass(frozen=True)
class DelaunayType:
    tag: DelaunayTag
    normal_convention: str = "continuous"

    @property
    def mean_curvature_sign(self) -> int:
        """Sign relating the reported mean curvature to ``h``.

        Under the ``continuous`` convention every member of the family has
        mean curvature ``h``; under ``fixed`` the post-flower types carry ``-h``.
        """
        if self.normal_convention == "fixed" and self.tag in POST_FLOWER_TAGS:
            return -1
        return 1


# ---------------------------------------------------------------------------
# equilibrium (static torus) data


def equilibrium_ratio(n: int, h: float) -> float:
    """Radius ratio a/b of the CMC product a*S^1 x b*S^{n-2}."""
    root = math.sqrt(h * h + 4.0 * (n - 2))
    if h >= 0:
        return (h + root) / (2.0 * (n - 2))
    # same value without cancellation for h << 0
    return 2.0 / (root - h)


def equilibrium_latitude(n: int, h: float) -> float:
    """Contact latitude s_h, the root of -tan s + (n-2) cot s = h in (0, pi/2)."""
    return math.atan2(1.0, equilibrium_ratio(n, h))


def contact_constant(n: int, h: float) -> float:
    """C_h, the value of C at which L and R touch (at s = s_h)."""
    s = equilibrium_latitude(n, h)
    return math.cos(s) * math.sin(s) ** (n - 2) - h / (n - 1) * math.sin(s) ** (n - 1)


def critical_constants(n: int, h: float) -> CriticalConstants:
    return CriticalConstants(
        s0=math.atan(math.sqrt(n - 2)),
        sh=equilibrium_latitude(n, h),
        Ch=contact_constant(n, h),
        ChNeg=contact_constant(n, -h),
    )


# ---------------------------------------------------------------------------
# pointwise profile functions


def envelope_L(s, n: int):
    return np.cos(s) * np.sin(s) ** (n - 2)


def rhs_R(s, C: float, h: float, n: int):
    return C + h / (n - 1) * np.sin(s) ** (n - 1)


def denom_D(s, params: CmcParams):
    L = envelope_L(s, params.n)
    R = rhs_R(s, params.C, params.h, params.n)
    return (L - R) * (L + R)


def _dL(t, n):
    return (n - 2) * np.cos(t) ** 2 * np.sin(t) ** (n - 3) - np.sin(t) ** (n - 1)


def _dR(t, n, h):
    return h * np.cos(t) * np.sin(t) ** (n - 2)


def d_denom_D(s, params: CmcParams):
    """Derivative dD/ds = 2 (L L' - R R')."""
    n, h = params.n, params.h
    L = envelope_L(s, n)
    R = rhs_R(s, params.C, h, n)
    return 2.0 * (L * _dL(s, n) - R * _dR(s, n, h))


def gap_derivative(t, params: CmcParams, factor: str):
    """d/ds of L - R (``factor="minus"``) or of L + R (``"plus"``)."""
    sign = -1.0 if factor == "minus" else 1.0
    return _dL(t, params.n) + sign * _dR(t, params.n, params.h)


def _integrate_gap_derivative(params, factor, start, s):
    s = np.asarray(s, dtype=float)
    half = 0.5 * (s - start)
    mid = 0.5 * (s + start)
    t = mid[..., None] + half[..., None] * _GL_NODES
    return half * np.sum(_GL_WEIGHTS * gap_derivative(t, params, factor), axis=-1)


def gap(s, params: CmcParams, factor: str):
    """L - R or L + R, accurate to machine precision in the absolute sense of
    the contact offset rather than of L.

    Each factor is unimodal with its maximum at the contact latitude
    (``s_h`` for ``L - R``, ``s_{-h}`` for ``L + R``), where its value is
    ``C_h - C`` or ``C_{-h} + C``.  Integrating the derivative from there
    removes the cancellation that plain evaluation suffers near contact.
    """
    n, h, C = params.n, params.h, params.C
    if factor == "minus":
        start = equilibrium_latitude(n, h)
        offset = contact_constant(n, h) - C
        sign = -1.0
    elif factor == "plus":
        start = equilibrium_latitude(n, -h)
        offset = contact_constant(n, -h) + C
        sign = 1.0
    else:
        raise ValueError(f"factor must be 'minus' or 'plus', got {factor!r}")
    s = np.asarray(s, dtype=float)
    L = envelope_L(s, n)
    R = rhs_R(s, C, h, n)
    direct = L + sign * R
    bad = np.abs(direct) < 1e-3 * (np.abs(L) + np.abs(R))
    if np.any(bad):
        fixed = offset + _integrate_gap_derivative(params, factor, start, s[bad])
        direct = np.array(direct, dtype=float, copy=True)
        direct[bad] = fixed
    return direct[()] if np.ndim(direct) == 0 else direct


def gap_from_root(s, root: float, params: CmcParams, factor: str, offset=None):
    """Vanishing factor of D near one of its roots, as an integral from the root.

    ``offset`` (= s - root, if known exactly) avoids the rounding of s - root
    when s is very close to a root far from zero.
    """
    if offset is None:
        return _integrate_gap_derivative(params, factor, root, s)
    half = 0.5 * np.asarray(offset, dtype=float)
    t = (root + half)[..., None] + half[..., None] * _GL_NODES
    return half * np.sum(_GL_WEIGHTS * gap_derivative(t, params, factor), axis=-1)


def _check_positive_D(D):
    if np.any(~(D > 0)):
        raise DomainError("D(s) <= 0: s lies outside the admissible interval")


def theta(s, params: CmcParams):
    """Theta = (a ds1/ds)^2 = R^2 / D; exactly 0 where R = 0."""
    s = np.asarray(s, dtype=float)
    R = rhs_R(s, params.C, params.h, params.n)
    D = denom_D(s, params)
    _check_positive_D(D)
    out = np.where(R == 0.0, 0.0, R * R / np.where(D > 0, D, 1.0))
    return out[()] if out.ndim == 0 else out


def s1_rate(s, params: CmcParams):
    """Signed phase speed ds1/ds = R / (cos s sqrt(D)).

    On the flower parameter, points within EPS_POLE of the pole are routed
    to the cancellation-free series of :func:`delaunay_sn.width.flower_rate`.
    """
    s = np.asarray(s, dtype=float)
    if params.is_flower:
        from .width import flower_rate

        near = (HALF_PI - s) < EPS_POLE
        if np.any(near):
            out = np.empty_like(s)
            sign = -math.copysign(1.0, params.h)
            out[near] = sign * flower_rate(s[near], params.n, abs(params.h))
            if np.any(~near):
                out[~near] = s1_rate(s[~near], params)
            return out[()] if out.ndim == 0 else out
    R = rhs_R(s, params.C, params.h, params.n)
    D = denom_D(s, params)
    _check_positive_D(D)
    out = np.where(R == 0.0, 0.0, R / (np.cos(s) * np.sqrt(np.where(D > 0, D, 1.0))))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# domains


def _root(f, lo, hi):
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        # the root is within rounding of a bracket end (e.g. |h| far below
        # cos of the float nearest pi/2); that end is the best float answer
        end, val = (lo, flo) if abs(flo) < abs(fhi) else (hi, fhi)
        if abs(val) < 1e-15:
            return end
    return brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)


def profile_interval(params: CmcParams) -> ProfileInterval:
    """Maximal interval where D > 0, with endpoint kinds and the R-zero s_hat.

    L - R and L + R are each unimodal on (0, pi/2), so their positivity sets
    are intervals bracketed by the contact latitudes; the admissible set is
    the intersection of the two.
    """
    n, h, C = params.n, params.h, params.C
    k = params.k
    Ch = contact_constant(n, h)
    Cmh = contact_constant(n, -h)
    # strict: the closed band edges are static tori, not intervals
    if not (C < Ch and C > -Cmh):
        raise NoAdmissibleInterval(
            f"C={C!r} outside the open band (-C_(-h), C_h) = ({-Cmh!r}, {Ch!r})"
        )
    s_plus_h = equilibrium_latitude(n, h)
    s_minus_h = equilibrium_latitude(n, -h)

    def g_minus(s):
        return float(gap(s, params, "minus"))

    def g_plus(s):
        return float(gap(s, params, "plus"))

    tiny = 1e-300
    if C > 0:
        lo = _root(g_minus, tiny, s_plus_h)
        lo_kind, lo_factor = EndpointKind.D_ZERO, "minus"
    elif C < 0:
        lo = _root(g_plus, tiny, s_minus_h)
        lo_kind, lo_factor = EndpointKind.D_ZERO, "plus"
    else:
        lo, lo_kind, lo_factor = 0.0, EndpointKind.AXIS, None

    R_pole = C + k
    if params.is_flower or (h == 0.0 and C == 0.0):
        hi, hi_kind, hi_factor = HALF_PI, EndpointKind.POLE, None
    elif R_pole > 0:
        hi = _root(g_minus, s_plus_h, HALF_PI)
        hi_kind, hi_factor = EndpointKind.D_ZERO, "minus"
    else:
        hi = _root(g_plus, s_minus_h, HALF_PI)
        hi_kind, hi_factor = EndpointKind.D_ZERO, "plus"

    if not lo < hi:
        raise NoAdmissibleInterval(f"empty interval for {params}")

    s_hat = None
    if k != 0.0:
        ratio = -C / k
        if 0.0 < ratio < 1.0:
            cand = math.asin(ratio ** (1.0 / (n - 1)))
            if lo < cand < hi:
                s_hat = cand
    return ProfileInterval(lo, hi, lo_kind, hi_kind, s_hat, lo_factor, hi_factor)


def _close(x: float, b: float, scale: float) -> bool:
    return abs(x - b) <= BOUNDARY_RTOL * max(abs(b), scale)


def classify(params: CmcParams, normal_convention: str = "continuous") -> DelaunayType:
    """Delaunay type of ``params`` along the deformation in C at fixed h >= 0.

    Negative h is mapped through (h, C) -> (-h, -C) first.
    """
    if normal_convention not in ("continuous", "fixed"):
        raise ValueError(f"unknown normal convention {normal_convention!r}")
    if params.h < 0:
        params = params.mirrored()
    n, h, C = params.n, params.h, params.C
    k = params.k
    Ch = contact_constant(n, h)
    Cmh = contact_constant(n, -h)
    scale = max(Ch, Cmh)

    def tagged(tag):
        return DelaunayType(tag, normal_convention)

    if _close(C, Ch, scale):
        return tagged(DelaunayTag.STATIC_TORUS)
    if _close(C, -Cmh, scale):
        return tagged(DelaunayTag.NEG_STATIC_TORUS)
    if C > Ch or C < -Cmh:
        raise OutOfBand(f"C={C!r} outside [-C_(-h), C_h] = [{-Cmh!r}, {Ch!r}]")
    if _close(C, 0.0, scale):
        return tagged(DelaunayTag.GEODESIC if h == 0 else DelaunayTag.SPHERE_UNION)
    if C > 0:
        return tagged(DelaunayTag.UNDULOID)
    if _close(C, -k, scale):
        return tagged(DelaunayTag.FLOWER)
    if C > -k:
        return tagged(DelaunayTag.NODOID)
    return tagged(DelaunayTag.NEG_UNDULOID)
