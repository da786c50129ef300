"""Generating curves on S^2: phase integration, reflection assembly, checks and export.

A curve is stored as samples ``(s, s1)`` in the folded chart
``s in [0, pi/2]`` and mapped to ``(cos s cos s1, cos s sin s1, sin s)``.
The fundamental piece runs over the profile interval with ``s1 = 0`` at its
left end.  Global curves are built by reflecting the last traversed piece at
its end point: a phase reflection ``s1 -> 2 phi - s1`` at a D-zero endpoint,
and ``s1 -> 2 phi + pi - s1`` at the pole (the continuation through ``p``
along the opposite meridian).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import NotClosed, PoleCollision, UnsupportedFormat, UnsupportedType
from .profile import (
    HALF_PI,
    CmcParams,
    DelaunayTag,
    EndpointKind,
    classify,
    equilibrium_latitude,
    profile_interval,
)
from .width import flower_width, plain_rate, substituted_rate, width

_PANEL_NODES, _PANEL_WEIGHTS = np.polynomial.legendre.leggauss(10)

#: endpoint gap below which a curve counts as closed
CLOSED_GAP = 1e-6
#: s below which a sample is on the rotation axis
AXIS_TOL = 1e-14


@dataclass(frozen=True)
class AssemblyRecord:
    """One reflection join; ``index`` is the global sample index of the joint."""

    kind: str  # "phase-reflection" | "meridian-flip" | "pole-reflection"
    index: int
    phase: float
    s: float


@dataclass(frozen=True, eq=False)
class GeneratingCurve:
    params: Optional[CmcParams]
    samples: np.ndarray
    periods: int
    assembly: tuple = ()
    tag: Optional[DelaunayTag] = None
    # sample indices where one smooth piece ends and the next begins
    breaks: tuple = ()
    points3d: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        samples = np.ascontiguousarray(self.samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 2:
            raise ValueError("samples must have shape (m, 2)")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        pts = sphere_points(samples[:, 0], samples[:, 1])
        pts.setflags(write=False)
        object.__setattr__(self, "points3d", pts)

    def __len__(self):
        return len(self.samples)

    @property
    def s(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def s1(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def capped(self) -> bool:
        """Both ends on the rotation axis: the hypersurface closes through it."""
        return bool(len(self) > 1 and self.s[0] <= AXIS_TOL and self.s[-1] <= AXIS_TOL)

    @property
    def endpoint_gap(self) -> float:
        if self.capped:
            return 0.0
        return float(np.linalg.norm(self.points3d[-1] - self.points3d[0]))

    @property
    def is_closed(self) -> bool:
        return self.endpoint_gap < CLOSED_GAP

    def pieces(self):
        """Index ranges ``(start, stop)`` of the smooth pieces between breaks."""
        edges = [0, *self.breaks, len(self) - 1]
        return [(a, b + 1) for a, b in zip(edges[:-1], edges[1:])]


def sphere_points(s, s1) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    s1 = np.asarray(s1, dtype=float)
    cs = np.cos(s)
    return np.stack([cs * np.cos(s1), cs * np.sin(s1), np.sin(s)], axis=-1)


# ---------------------------------------------------------------------------
# phase integration


def _half_grid(a: float, b: float, e: Optional[float], panels: int, spacing: str):
    """Nodes on [a, b]; u^2-clustered towards ``e`` when ``e`` is a D-zero end."""
    if e is None or spacing == "uniform":
        return np.linspace(a, b, panels + 1)
    far = b if e == a else a
    u = np.linspace(0.0, math.sqrt(abs(far - e)), panels + 1)
    nodes = e + math.copysign(1.0, far - e) * u * u
    return nodes if e == a else nodes[::-1]


def _panel_integrals(nodes, params, e, factor, absolute):
    """Integral of ds1/ds over each panel of ``nodes`` (ascending)."""
    lo, hi = nodes[:-1], nodes[1:]
    if e is None:
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        s = mid[:, None] + half[:, None] * _PANEL_NODES[None, :]
        vals = plain_rate(s, params, absolute=absolute)
        return half * (vals @ _PANEL_WEIGHTS)
    # substitute s = e + sigma u^2 on every panel of this half
    sigma = 1.0 if e <= lo[0] else -1.0
    ua = np.sqrt(np.abs(lo - e))
    ub = np.sqrt(np.abs(hi - e))
    half = 0.5 * (ub - ua)
    mid = 0.5 * (ub + ua)
    u = mid[:, None] + half[:, None] * _PANEL_NODES[None, :]
    vals = substituted_rate(u.ravel(), params, e, sigma, factor, absolute=absolute)
    # ds = sigma * 2u du; the integrand already carries 2u, ua -> ub runs with s for sigma = 1
    return sigma * half * (vals.reshape(u.shape) @ _PANEL_WEIGHTS)


def integrate_phase(
    params: CmcParams,
    grid_size: int = 512,
    spacing: str = "clustered",
    absolute: bool = False,
) -> np.ndarray:
    """Samples ``(s, s1)`` of the fundamental piece, ``s1 = 0`` at the left end.

    ``grid_size`` panels are split evenly between the two halves of the
    interval; ``spacing="clustered"`` places them uniformly in ``u`` where
    ``s = endpoint +/- u^2`` so the vertical tangencies at D-zeros are
    resolved.  Each panel is integrated with 10-point Gauss-Legendre in the
    same variable.  ``absolute=True`` integrates ``|ds1/ds|`` (the drawing
    with non-negative phase speed).
    """
    if grid_size < 64:
        raise ValueError("grid_size must be >= 64")
    if spacing not in ("clustered", "uniform"):
        raise ValueError(f"unknown spacing {spacing!r}")
    iv = profile_interval(params)
    mid = 0.5 * (iv.s_lo + iv.s_hi)
    half_panels = grid_size // 2
    lo_e = iv.s_lo if iv.lo_kind is EndpointKind.D_ZERO else None
    hi_e = iv.s_hi if iv.hi_kind is EndpointKind.D_ZERO else None
    left = _half_grid(iv.s_lo, mid, lo_e, half_panels, spacing)
    right = _half_grid(mid, iv.s_hi, hi_e, grid_size - half_panels, spacing)
    if iv.s_hat is not None:
        # move the nearest interior node onto s_hat so the R-zero is a sample
        nodes = left if iv.s_hat < mid else right
        j = int(np.argmin(np.abs(nodes[1:-1] - iv.s_hat))) + 1
        nodes[j] = iv.s_hat

    if params.h == 0.0 and params.C == 0.0:
        inc_l = np.zeros(len(left) - 1)
        inc_r = np.zeros(len(right) - 1)
    else:
        inc_l = _panel_integrals(left, params, lo_e, iv.lo_factor, absolute)
        inc_r = _panel_integrals(right, params, hi_e, iv.hi_factor, absolute)
    s = np.concatenate([left, right[1:]])
    s1 = np.concatenate([[0.0], np.cumsum(np.concatenate([inc_l, inc_r]))])
    return np.column_stack([s, s1])


# ---------------------------------------------------------------------------
# global assembly


def _reflect(segment: np.ndarray, kind: str) -> np.ndarray:
    phi = segment[-1, 1]
    out = segment[::-1].copy()
    if kind == "pole-reflection":
        out[:, 1] = 2.0 * phi + math.pi - out[:, 1]
    else:
        out[:, 1] = 2.0 * phi - out[:, 1]
    return out


def _nodoid_piece(params: CmcParams, grid_size: int, spacing: str):
    """Fundamental nodoid piece built from the non-negative drawing.

    The part over (s_lo, s_hat) is flipped across the meridian through the
    phase reached at s_hat, then the piece is re-gauged to start at 0.
    """
    iv = profile_interval(params)
    drawn = integrate_phase(params, grid_size, spacing, absolute=True)
    j = int(np.flatnonzero(drawn[:, 0] == iv.s_hat)[0])
    theta_hat = drawn[j, 1]
    piece = drawn.copy()
    piece[:j, 1] = 2.0 * theta_hat - drawn[:j, 1]
    piece[:, 1] -= piece[0, 1]
    return piece, AssemblyRecord("meridian-flip", j, float(piece[j, 1]), float(iv.s_hat))


def assemble_global(
    params: CmcParams,
    periods: int = 1,
    grid_size: int = 512,
    spacing: str = "clustered",
) -> GeneratingCurve:
    """Extend the fundamental piece by reflections into a global curve.

    One period is two fundamental pieces (one full width for unduloids and
    nodoids, one petal for the flower).  Sphere unions and the geodesic end
    on the rotation axis after two pieces, so ``periods`` is ignored there.
    """
    if periods < 1:
        raise ValueError("periods must be >= 1")
    if params.h < 0:
        curve = assemble_global(params.mirrored(), periods, grid_size, spacing)
        samples = curve.samples.copy()
        samples[:, 1] = -samples[:, 1]
        recs = tuple(
            AssemblyRecord(r.kind, r.index, -r.phase, r.s) for r in curve.assembly
        )
        return GeneratingCurve(params, samples, curve.periods, recs, curve.tag, curve.breaks)

    tag = classify(params).tag
    if tag in (DelaunayTag.STATIC_TORUS, DelaunayTag.NEG_STATIC_TORUS):
        raise UnsupportedType(
            f"{tag.value}: the profile is a single latitude; use static_torus_curve"
        )
    iv = profile_interval(params)
    records = []
    flip = None
    if tag is DelaunayTag.NODOID:
        piece, flip = _nodoid_piece(params, grid_size, spacing)
        records.append(flip)
    else:
        piece = integrate_phase(params, grid_size, spacing)

    capped = iv.lo_kind is EndpointKind.AXIS
    n_pieces = 2 if capped else 2 * periods
    if capped:
        periods = 1
    end_kinds = {True: iv.hi_kind, False: iv.lo_kind}

    parts = [piece]
    breaks = []
    count = len(piece)
    forward = True
    current = piece
    for _ in range(n_pieces - 1):
        end = end_kinds[forward]
        kind = "pole-reflection" if end is EndpointKind.POLE else "phase-reflection"
        nxt = _reflect(current, kind)
        joint = count - 1
        records.append(AssemblyRecord(kind, joint, float(current[-1, 1]), float(current[-1, 0])))
        breaks.append(joint)
        if flip is not None:
            # every reflected nodoid piece carries its own flip, in reversed order
            local = len(nxt) - 1 - flip.index if forward else flip.index
            records.append(
                AssemblyRecord("meridian-flip", joint + local, float(nxt[local, 1]), flip.s)
            )
        parts.append(nxt[1:])
        count += len(nxt) - 1
        current = nxt
        forward = not forward
    samples = np.concatenate(parts)
    records.sort(key=lambda r: r.index)
    return GeneratingCurve(params, samples, periods, tuple(records), tag, tuple(breaks))


def static_torus_curve(n: int, h: float, samples: int = 256) -> GeneratingCurve:
    """Latitude circle s = s_h generating the CMC product torus (signed h)."""
    sh = equilibrium_latitude(n, h)
    s1 = np.linspace(0.0, 2.0 * math.pi, samples + 1)
    data = np.column_stack([np.full_like(s1, sh), s1])
    return GeneratingCurve(None, data, 1, (), DelaunayTag.STATIC_TORUS, ())


def petal_count(beta: float, max_denominator: int = 64) -> Optional[int]:
    """Number of petals of the closed flower with width ``beta``, if rational.

    Consecutive petals differ by a rotation of ``pi - beta`` about the pole.
    """
    frac = Fraction(abs(beta) / math.pi).limit_denominator(max_denominator)
    if abs(abs(beta) / math.pi - float(frac)) > 1e-9:
        return None
    return ((1 - frac) / 2).denominator


# ---------------------------------------------------------------------------
# closure and embeddedness


@dataclass(frozen=True)
class ClosureResult:
    closed: bool
    rational: Optional[Fraction]
    periods: Optional[int]
    ratio: Optional[float]
    err_est: float = 0.0


def closure_test(params: CmcParams, max_denominator: int = 64) -> ClosureResult:
    """Decide closure from the rationality of W/pi (beta/pi for the flower)."""
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    tag = classify(params).tag
    if tag is DelaunayTag.SPHERE_UNION:
        return ClosureResult(True, None, 1, None)
    if tag is DelaunayTag.GEODESIC:
        return ClosureResult(True, Fraction(1), 1, 1.0)
    if tag in (DelaunayTag.STATIC_TORUS, DelaunayTag.NEG_STATIC_TORUS):
        return ClosureResult(True, None, 1, None)
    if tag is DelaunayTag.FLOWER:
        res = flower_width(params.n, abs(params.h))
    else:
        res = width(params)
    ratio = abs(res.W) / math.pi
    frac = Fraction(ratio).limit_denominator(max_denominator)
    closed = abs(ratio - float(frac)) < res.err_est / math.pi + 1e-9
    if not closed:
        return ClosureResult(False, None, None, ratio, res.err_est)
    if tag is DelaunayTag.FLOWER:
        periods = ((1 - frac) / 2).denominator
    else:
        p, q = frac.numerator, frac.denominator
        periods = 2 * q // math.gcd(p, 2)
    return ClosureResult(True, frac, periods, ratio, res.err_est)


@dataclass(frozen=True)
class EmbeddingResult:
    embedded: bool
    min_separation: float
    spacing: float


def _resample(points: np.ndarray, count: int, cyclic: bool):
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    t = np.concatenate([[0.0], np.cumsum(seg)])
    total = t[-1]
    if cyclic:
        grid = np.linspace(0.0, total, count, endpoint=False)
    else:
        grid = np.linspace(0.0, total, count)
    out = np.column_stack([np.interp(grid, t, points[:, j]) for j in range(points.shape[1])])
    out /= np.linalg.norm(out, axis=1)[:, None]
    return out, total / (count if cyclic else count - 1)


def embedding_test(curve: GeneratingCurve, resolution: int = 20000, window: int = 20) -> EmbeddingResult:
    """Scan for self-intersections of a closed curve.

    The curve is resampled uniformly in arclength with spacing ``delta``;
    pairs closer than ``window`` steps along the curve are ignored, and the
    curve is embedded when every remaining pair is farther apart than
    ``10 * delta``.
    """
    if not curve.is_closed:
        raise NotClosed(f"endpoint gap {curve.endpoint_gap!r} >= {CLOSED_GAP}")
    cyclic = not curve.capped
    pts, delta = _resample(curve.points3d, resolution, cyclic)
    m = len(pts)
    tree = cKDTree(pts)

    def separation(i, j):
        d = np.abs(i - j)
        return np.minimum(d, m - d) if cyclic else d

    best = math.inf
    kq = min(m, 2 * window + 8)
    idx = np.arange(m)
    pending = idx
    while len(pending):
        dist, nb = tree.query(pts[pending], k=kq)
        ok = separation(pending[:, None], nb) > window
        cand = np.where(ok, dist, np.inf).min(axis=1)
        if np.isfinite(cand).any():
            best = min(best, float(cand.min()))
        # points whose k-th neighbour is still closer than the best may hide a smaller pair
        unresolved = ~np.isfinite(cand) & (dist[:, -1] < best)
        pending = pending[unresolved]
        if kq == m:
            break
        kq = min(m, 2 * kq)
    return EmbeddingResult(bool(best > 10.0 * delta), best, delta)


# ---------------------------------------------------------------------------
# join regularity


def _menger(p0, p1, p2) -> float:
    a = p1 - p0
    b = p2 - p1
    c = p2 - p0
    cross = a[0] * b[1] - a[1] * b[0]
    return 2.0 * cross / (np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c))


def _chart(curve: GeneratingCurve, kind: str) -> np.ndarray:
    s, s1 = curve.s, curve.s1
    if kind == "pole-reflection":
        rho = HALF_PI - s
        return np.column_stack([rho * np.cos(s1), rho * np.sin(s1)])
    return np.column_stack([s1, s])


def _one_sided_curvature(xy: np.ndarray, idx: Sequence[int]) -> float:
    """Curvature at ``idx[0]`` extrapolated from two Menger triples going away from it."""
    i0, i1, i2, i3 = idx
    k1 = _menger(xy[i0], xy[i1], xy[i2])
    k2 = _menger(xy[i1], xy[i2], xy[i3])
    # triple centres measured by chord length from the joint
    d1 = np.linalg.norm(xy[i1] - xy[i0])
    d2 = d1 + np.linalg.norm(xy[i2] - xy[i1])
    return k1 - (k2 - k1) * d1 / (d2 - d1)


def join_curvature_jumps(curve: GeneratingCurve):
    """``[(record, jump)]``: one-sided discrete curvature mismatch at each joint.

    Meridian flips and phase reflections are measured in the planar
    ``(s1, s)`` chart, pole reflections in the aerial chart around ``p``.
    Curvature on each side is the Menger curvature extrapolated to the joint.
    """
    out = []
    for rec in curve.assembly:
        xy = _chart(curve, rec.kind)
        i = rec.index
        left = _one_sided_curvature(xy, [i, i - 1, i - 2, i - 3])
        right = _one_sided_curvature(xy, [i, i + 1, i + 2, i + 3])
        # traversal of the left triple runs backwards, so its signed value flips
        out.append((rec, abs(-left - right)))
    return out


def _one_sided_derivative(x0, x1, x2):
    """Derivative at x0 of the quadratic through x0, x1, x2 in chord length."""
    t1 = np.linalg.norm(x1 - x0)
    t2 = t1 + np.linalg.norm(x2 - x1)
    return (
        -(t1 + t2) / (t1 * t2) * x0
        + t2 / (t1 * (t2 - t1)) * x1
        - t1 / (t2 * (t2 - t1)) * x2
    )


def join_tangent_mismatch(curve: GeneratingCurve):
    """``[(record, angle)]`` between second-order one-sided tangents at each joint (3D)."""
    pts = curve.points3d
    out = []
    for rec in curve.assembly:
        i = rec.index
        if abs(curve.s[i] - HALF_PI) < 1e-12:
            xy = _chart(curve, rec.kind)
        else:
            xy = pts
        back = -_one_sided_derivative(xy[i], xy[i - 1], xy[i - 2])
        fwd = _one_sided_derivative(xy[i], xy[i + 1], xy[i + 2])
        cosang = np.dot(back, fwd) / (np.linalg.norm(back) * np.linalg.norm(fwd))
        out.append((rec, float(math.acos(min(1.0, max(-1.0, cosang))))))
    return out


# ---------------------------------------------------------------------------
# export


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_curve(curve: GeneratingCurve, fmt: str = "csv") -> bytes:
    """Serialize samples and 3D points; every float at 17 significant digits."""
    if len(curve) == 0:
        raise ValueError("cannot export an empty curve")
    rows = np.column_stack([curve.samples, curve.points3d])
    if fmt == "csv":
        lines = ["s,s1,x,y,z"]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        return ("\n".join(lines) + "\n").encode()
    if fmt == "json":
        keys = ("s", "s1", "x", "y", "z")
        recs = [
            "{" + ", ".join(f'"{k}": {_fmt(v)}' for k, v in zip(keys, row)) + "}"
            for row in rows
        ]
        return ("[\n" + ",\n".join(recs) + "\n]\n").encode()
    raise UnsupportedFormat(f"unsupported curve format {fmt!r}")


def load_curve_samples(data: bytes, fmt: str = "csv") -> np.ndarray:
    """Inverse of :func:`export_curve`: the ``(s, s1)`` columns."""
    if fmt == "csv":
        arr = np.loadtxt(io.StringIO(data.decode()), delimiter=",", skiprows=1, ndmin=2)
        return arr[:, :2]
    if fmt == "json":
        recs = json.loads(data.decode())
        return np.array([[r["s"], r["s1"]] for r in recs], dtype=float)
    raise UnsupportedFormat(f"unsupported curve format {fmt!r}")


# ---------------------------------------------------------------------------
# meshes


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices4d: np.ndarray
    vertices3d: np.ndarray
    faces: tuple

    @property
    def euler_characteristic(self) -> int:
        edges = set()
        for f in self.faces:
            for a, b in zip(f, f[1:] + f[:1]):
                edges.add((min(a, b), max(a, b)))
        return len(self.vertices3d) - len(edges) + len(self.faces)

    def to_obj(self) -> str:
        lines = [f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}" for x, y, z in self.vertices3d]
        lines += ["f " + " ".join(str(i + 1) for i in f) for f in self.faces]
        return "\n".join(lines) + "\n"


def _projection_basis(pole: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the complement of ``pole``, Gram-Schmidt on e1..e4."""
    basis = []
    order = np.argsort(np.abs(pole), kind="stable")[:3]
    for j in sorted(order):
        v = np.zeros(4)
        v[j] = 1.0
        v -= np.dot(v, pole) * pole
        for b in basis:
            v -= np.dot(v, b) * b
        basis.append(v / np.linalg.norm(v))
    return np.array(basis)


def stereographic(points4d: np.ndarray, pole=(0.0, 0.0, 0.0, -1.0)) -> np.ndarray:
    pole = np.asarray(pole, dtype=float)
    pole = pole / np.linalg.norm(pole)
    if np.any(np.linalg.norm(points4d - pole, axis=1) < 1e-9):
        raise PoleCollision("a mesh point coincides with the projection pole")
    basis = _projection_basis(pole)
    denom = 1.0 - points4d @ pole
    return (points4d @ basis.T) / denom[:, None]


def mesh(
    curve: GeneratingCurve,
    azimuthal_resolution: int = 64,
    pole=(0.0, 0.0, 0.0, -1.0),
) -> Mesh:
    """Rotate the curve by the circle factor: ``(cos s e^{i s1}, sin s e^{i phi})`` in S^3.

    For n > 3 this is the slice through one great circle of S^{n-2}.  Rings
    on the axis collapse to a single vertex; closed curves wrap around.
    """
    M = int(azimuthal_resolution)
    if M < 3:
        raise ValueError("azimuthal_resolution must be >= 3")
    s, s1 = curve.s, curve.s1
    wrap = curve.is_closed and not curve.capped
    rows = len(s) - 1 if wrap else len(s)
    phi = 2.0 * math.pi * np.arange(M) / M
    verts = []
    ring_ids = []
    for i in range(rows):
        a, b = math.cos(s[i]), math.sin(s[i])
        base = [a * math.cos(s1[i]), a * math.sin(s1[i])]
        if s[i] <= AXIS_TOL:
            ring_ids.append([len(verts)] * M)
            verts.append(base + [0.0, 0.0])
        else:
            ring_ids.append(list(range(len(verts), len(verts) + M)))
            verts.extend(base + [b * math.cos(p), b * math.sin(p)] for p in phi)
    v4 = np.array(verts)
    faces = []
    pairs = [(i, i + 1) for i in range(rows - 1)]
    if wrap:
        pairs.append((rows - 1, 0))
    for i, j in pairs:
        ri, rj = ring_ids[i], ring_ids[j]
        for t in range(M):
            quad = [ri[t], ri[(t + 1) % M], rj[(t + 1) % M], rj[t]]
            face = []
            for v in quad:
                if v not in face:
                    face.append(v)
            if len(face) >= 3:
                faces.append(tuple(face))
    v3 = stereographic(v4, pole)
    return Mesh(v4, v3, tuple(faces))
