"""Independent checks that generated immersions have constant mean curvature.

Two routes are provided.  :func:`cmc_residual` and :func:`shape_diagonal`
plug the closed-form Theta back into the second order equation it is meant
to solve.  :func:`mean_curvature_fd` ignores those formulas altogether: it
differentiates the sampled curve on S^2 and adds the analytic contribution
of the round S^{n-2} factor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .curves import GeneratingCurve, assemble_global, integrate_phase, sphere_points
from .exceptions import DomainError, StencilTooWide
from .profile import (
    POST_FLOWER_TAGS,
    CmcParams,
    classify,
    d_denom_D,
    denom_D,
    envelope_L,
    profile_interval,
    rhs_R,
)

#: default fraction of each piece's s-range excluded at both ends
DEFAULT_MARGIN = 0.02


def _theta_and_derivative(s, params: CmcParams):
    n, h, C = params.n, params.h, params.C
    L = envelope_L(s, n)
    R = rhs_R(s, C, h, n)
    D = denom_D(s, params)
    if np.any(D <= 0):
        raise DomainError("D <= 0: outside the profile interval")
    dR = h * L
    dD = d_denom_D(s, params)
    theta = R * R / D
    dtheta = (2.0 * R * dR * D - R * R * dD) / (D * D)
    return theta, dtheta, R


def cmc_residual(s, params: CmcParams):
    """Residual of the second order CMC equation at ``s`` (zero for the closed form).

    The mean curvature enters with the orientation of the phase speed: on
    stretches where R < 0 the curve runs backwards in s1 and the equation
    holds with -h for the fixed normal.
    """
    s = np.asarray(s, dtype=float)
    theta, dtheta, R = _theta_and_derivative(s, params)
    if np.any(theta == 0):
        raise DomainError("Theta = 0 (R vanishes); the equation is singular there")
    a, b = np.cos(s), np.sin(s)
    h_eff = np.sign(R) * params.h
    res = (
        -b / a
        + (params.n - 2) * a / b
        - np.sqrt((1.0 + theta) / theta) * h_eff
        + dtheta / (2.0 * theta * (1.0 + theta))
    )
    return res[()] if res.ndim == 0 else res


def _s1_derivatives(s, params: CmcParams):
    """ds1/ds and d^2 s1/ds^2 from the closed form."""
    n = params.n
    a, b = np.cos(s), np.sin(s)
    R = rhs_R(s, params.C, params.h, n)
    D = denom_D(s, params)
    if np.any(D <= 0):
        raise DomainError("D <= 0: outside the profile interval")
    dR = params.h * envelope_L(s, n)
    dD = d_denom_D(s, params)
    root = np.sqrt(D)
    rate = R / (a * root)
    drate = dR / (a * root) + R * b / (a * a * root) - R * dD / (2.0 * a * D * root)
    return rate, drate


def shape_diagonal(s, params: CmcParams):
    """Principal curvatures ``(sphere factor, profile direction)`` for the unit normal.

    The sphere-factor value has multiplicity n - 2, so
    ``(n - 2) * first + second == h``.
    """
    s = np.asarray(s, dtype=float)
    a, b = np.cos(s), np.sin(s)
    rate, drate = _s1_derivatives(s, params)
    theta = (a * rate) ** 2
    if np.any(theta == 0):
        raise DomainError("Theta = 0 (R vanishes); the normalization degenerates")
    box = -a * b * rate**2 / (1.0 + theta) + (
        -2.0 * a * b * rate**2 + a * a * rate * drate
    ) / (theta * (1.0 + theta))
    scale = np.sign(rate) * np.sqrt(theta / (1.0 + theta))
    first = a / b * scale
    second = box * scale
    if first.ndim == 0:
        return float(first), float(second)
    return first, second


# ---------------------------------------------------------------------------
# finite-difference oracle


@dataclass(frozen=True, eq=False)
class CurvatureReport:
    """Columns of ``samples``: s, H_numeric, H_target, sphere value, profile value."""

    samples: np.ndarray
    max_abs_err: float
    normal_convention: str
    margin: float
    stencil_width: int

    def passed(self, tol: float) -> bool:
        return bool(self.max_abs_err < tol)

    def to_dict(self, tol=None) -> dict:
        out = {
            "max_abs_err": float(self.max_abs_err),
            "normal_convention": self.normal_convention,
            "margin": self.margin,
            "stencil_width": self.stencil_width,
            "count": int(len(self.samples)),
            "samples": [
                dict(zip(("s", "H_numeric", "H_target", "sphere_value", "profile_value"),
                         map(float, row)))
                for row in self.samples
            ],
        }
        if tol is not None:
            out["tolerance"] = tol
            out["passed"] = self.passed(tol)
        return out

    def to_json(self, tol=None) -> str:
        return json.dumps(self.to_dict(tol), indent=2)


def _piece_curvatures(s, s1, n, w, keep):
    """Sphere-factor and profile principal curvatures at indices ``keep``."""
    g = sphere_points(s, s1)
    i = keep
    h1 = (s[i] - s[i - w])[:, None]
    h2 = (s[i + w] - s[i])[:, None]
    gm, g0, gp = g[i - w], g[i], g[i + w]
    d1 = (h1 * h1 * (gp - g0) + h2 * h2 * (g0 - gm)) / (h1 * h2 * (h1 + h2))
    d2 = 2.0 * ((gp - g0) / h2 - (g0 - gm) / h1) / (h1 + h2)
    # unit tangent along the traversal direction, normal T x gamma inside S^2
    direction = np.sign(s[i + w] - s[i - w])[:, None]
    T = direction * d1 / np.linalg.norm(d1, axis=1)[:, None]
    nu = np.cross(T, g0)
    profile = np.sum(d2 * nu, axis=1) / np.sum(d1 * d1, axis=1)
    sphere = -nu[:, 2] / np.sin(s[i])
    return sphere, profile


def mean_curvature_fd(
    curve: GeneratingCurve,
    params: CmcParams | None = None,
    stencil_width: int = 1,
    margin: float = DEFAULT_MARGIN,
    normal_convention: str = "fixed",
) -> CurvatureReport:
    """Finite-difference mean curvature along every smooth piece of ``curve``.

    The profile curvature comes from three-point differences of the sampled
    points in the parameter s (nonuniform spacing allowed), projected on the
    normal ``T x gamma``; the S^{n-2} factor contributes ``(n - 2) * (-nu_z / sin s)``.
    Samples within ``margin`` times the piece's s-range of either end are
    skipped.  Latitude circles (constant s) use the exact geodesic curvature
    ``-tan s``.

    With ``normal_convention="fixed"`` the post-flower types are reported with
    respect to the opposite normal, so their mean curvature is -h.
    """
    if normal_convention not in ("fixed", "continuous"):
        raise ValueError(f"unknown normal convention {normal_convention!r}")
    if stencil_width < 1:
        raise ValueError("stencil_width must be >= 1")
    if not 0.0 <= margin < 0.5:
        raise ValueError("margin must lie in [0, 0.5)")
    params = params if params is not None else curve.params
    if params is None:
        raise ValueError("params are required for this curve")
    n = params.n
    w = stencil_width
    rows = []
    for start, stop in curve.pieces():
        s = curve.s[start:stop]
        s1 = curve.s1[start:stop]
        lo, hi = float(s.min()), float(s.max())
        if hi - lo == 0.0:
            # latitude circle: exact curvatures of a small circle on S^2
            sgn = np.sign(np.gradient(s1))
            sphere = sgn / np.tan(s)
            profile = -sgn * np.tan(s)
            rows.append(np.column_stack([s, sphere, profile]))
            continue
        span = hi - lo
        idx = np.arange(w, len(s) - w)
        ok = (s[idx] - lo >= margin * span) & (hi - s[idx] >= margin * span)
        keep = idx[ok]
        if len(keep) == 0:
            continue
        sphere, profile = _piece_curvatures(s, s1, n, w, keep)
        rows.append(np.column_stack([s[keep], sphere, profile]))
    if not rows:
        raise StencilTooWide(
            f"no sample has a width-{w} stencil clear of the margin {margin}"
        )
    data = np.concatenate(rows)
    sign = 1.0
    if normal_convention == "fixed" and curve.tag in POST_FLOWER_TAGS:
        sign = -1.0
    sphere = sign * data[:, 1]
    profile = sign * data[:, 2]
    H = (n - 2) * sphere + profile
    target = np.full_like(H, sign * params.h)
    table = np.column_stack([data[:, 0], H, target, sphere, profile])
    return CurvatureReport(
        table, float(np.max(np.abs(H - target))), normal_convention, margin, w
    )


def uniform_piece(params: CmcParams, ds: float) -> GeneratingCurve:
    """Fundamental piece sampled at (approximately) uniform s-spacing ``ds``."""
    iv = profile_interval(params)
    panels = max(64, int(math.ceil(iv.length / ds)))
    samples = integrate_phase(params, panels, spacing="uniform")
    return GeneratingCurve(params, samples, 1, (), classify(params).tag, ())


def uniform_global(params: CmcParams, ds: float, periods: int = 1) -> GeneratingCurve:
    """Assembled curve whose pieces have uniform s-spacing ``ds``."""
    iv = profile_interval(params)
    panels = max(64, int(math.ceil(iv.length / ds)))
    return assemble_global(params, periods, grid_size=panels, spacing="uniform")
