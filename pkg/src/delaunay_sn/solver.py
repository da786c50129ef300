"""Root solves for closed and embedded configurations."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .curves import assemble_global, closure_test, embedding_test
from .exceptions import NonConvergent, TargetOutOfRange
from .profile import CmcParams, contact_constant
from .width import (
    adjusted_width,
    flower_width,
    width,
    width_limit_at_contact,
    width_limit_at_zero,
)

SCAN_POINTS = 256
WIDTH_TOL = 1e-8


@dataclass(frozen=True)
class WidthSolution:
    C: float
    W: float
    residual: float
    brackets: tuple


def _limit_at_zero(n: int, h: float) -> float:
    return math.pi if h == 0 else width_limit_at_zero(n, h)


def solve_width(n: int, h: float, target_w: float, scan_points: int = SCAN_POINTS) -> WidthSolution:
    """Find C in (0, C_h) with W(h, C) = target_w.

    W(h, .) is scanned on a uniform grid of ``scan_points`` values with the
    closed-form limits at both ends; every sign change of W - target gives a
    bracket, solved by Brent's method.  The smallest root is returned and all
    brackets are reported.
    """
    if h < 0:
        raise ValueError("solve_width expects h >= 0 (use the sign symmetry for h < 0)")
    w0 = _limit_at_zero(n, h)
    wc = width_limit_at_contact(n, h)
    lo, hi = min(w0, wc), max(w0, wc)
    if not (lo < target_w < hi):
        raise TargetOutOfRange(
            f"target width {target_w!r} outside the open range ({lo!r}, {hi!r})"
        )
    Ch = contact_constant(n, h)

    def f(C):
        if C <= 0.0:
            return w0 - target_w
        if C >= Ch:
            return wc - target_w
        return width(CmcParams(n, h, C)).W - target_w

    grid = np.linspace(0.0, Ch, scan_points + 1)
    vals = np.array([f(C) for C in grid])
    brackets = []
    for j in range(scan_points):
        if vals[j] == 0.0 and 0 < j:
            brackets.append((float(grid[j]), float(grid[j])))
        elif vals[j] * vals[j + 1] < 0:
            brackets.append((float(grid[j]), float(grid[j + 1])))
    if not brackets:
        raise NonConvergent("no sign change of W - target found on the scan grid")
    a, b = brackets[0]
    C = a if a == b else brentq(f, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    W = width(CmcParams(n, h, C)).W
    residual = abs(W - target_w)
    if residual >= WIDTH_TOL:
        raise NonConvergent(f"width residual {residual!r} after root solve")
    return WidthSolution(float(C), float(W), float(residual), tuple(brackets))


def embedded_h_range(n: int) -> tuple:
    """Open h-interval on which the contact limit of W exceeds pi."""
    if n < 3:
        raise ValueError("n must be >= 3")
    return (0.0, math.sqrt(4.0 * (n - 2) / 3.0))


def z_interval(n: int, k: int) -> Optional[tuple]:
    """Open interval of h admitting W = 2 pi / k by the limit bounds, or None if empty."""
    if n < 3 or k < 3 or int(k) != k:
        raise ValueError("need n >= 3 and integer k >= 3")
    lower = k * (n - 1) / math.pi
    upper = (k * k - 2) * math.sqrt((n - 2) / (k * k - 1))
    return (lower, upper) if lower < upper else None


@lru_cache(maxsize=None)
def chain_start(n: int, k_max: int = 1000) -> Optional[float]:
    """Infimum d0 of the tail of h covered by overlapping consecutive Z(k), k <= k_max."""
    if not 3 <= n <= 9:
        return None
    intervals = [z_interval(n, k) for k in range(3, k_max + 1)]
    start = None
    for j in range(len(intervals) - 1, 0, -1):
        cur, prev = intervals[j], intervals[j - 1]
        if prev is None or cur is None or prev[1] <= cur[0]:
            start = j
            break
    else:
        start = 0
    return intervals[start][0]


def count_embedded(n: int, h: float) -> int:
    """Lower bound 1 + floor(pi (h - d0) / (n - 1)) on the embedded solutions, or 0."""
    if not 3 <= n <= 9:
        raise ValueError("the counting bound needs 3 <= n <= 9")
    d0 = chain_start(n)
    if h <= d0:
        return 0
    return 1 + math.floor(math.pi * (h - d0) / (n - 1))


@dataclass(frozen=True)
class EmbeddedSolution:
    params: CmcParams
    k: int
    W_achieved: float
    residual: float
    embedded: bool
    closed: bool = False
    endpoint_gap: float = math.nan
    min_separation: float = math.nan
    brackets: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = {"n": self.params.n, "h": self.params.h, "C": self.params.C}
        d["brackets"] = [list(b) for b in self.brackets]
        return d


def find_embedded(
    n: int,
    h: float,
    k: Optional[int] = None,
    target_w: Optional[float] = None,
    grid_size: int = 1024,
    scan_points: int = SCAN_POINTS,
) -> EmbeddedSolution:
    """Solve W(h, C) = target, assemble until closed and scan for self-intersections.

    The target defaults to 2 pi / k.  The reported ``k`` is the number of
    periods needed to close the curve (k itself when the target is 2 pi / k).
    """
    if target_w is None:
        if k is None or k < 1:
            raise ValueError("give k >= 1 or an explicit target width")
        target_w = 2.0 * math.pi / k
    sol = solve_width(n, h, target_w, scan_points)
    params = CmcParams(n, h, sol.C)
    closure = closure_test(params)
    periods = closure.periods if closure.closed else (k or 1)
    curve = assemble_global(params, periods, grid_size=grid_size)
    closed = curve.is_closed
    embedded, sep = False, math.nan
    if closed:
        emb = embedding_test(curve)
        embedded, sep = emb.embedded, emb.min_separation
    return EmbeddedSolution(
        params, periods, sol.W, sol.residual, bool(closed and embedded), bool(closed),
        curve.endpoint_gap, sep, sol.brackets,
    )


def solutions_to_json(solutions) -> str:
    """Sweep report: a JSON array of EmbeddedSolution records."""
    return json.dumps([s.to_dict() for s in solutions], indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# flowers


@dataclass(frozen=True)
class FlowerClosure:
    beta: float
    ratio: float
    rational: Optional[Fraction]
    petals: Optional[int]
    err_est: float


def flower_closure(n: int, h: float, max_denominator: int = 64) -> FlowerClosure:
    """Rational recognition of beta/pi and the resulting petal count."""
    if not h > 0:
        raise ValueError("flower_closure needs h > 0")
    res = flower_width(n, h)
    ratio = res.W / math.pi
    frac = Fraction(ratio).limit_denominator(max_denominator)
    if abs(ratio - float(frac)) < res.err_est / math.pi + 1e-9:
        return FlowerClosure(res.W, ratio, frac, ((1 - frac) / 2).denominator, res.err_est)
    return FlowerClosure(res.W, ratio, None, None, res.err_est)


def solve_flower_beta(n: int, target_beta: float, xtol: float = 1e-14) -> float:
    """h > 0 with flower width beta(h) = target_beta; beta increases from 0 to pi."""
    if not 0.0 < target_beta < math.pi:
        raise TargetOutOfRange("target beta must lie in (0, pi)")

    def f(h):
        return flower_width(n, h).W - target_beta

    lo, hi = 1e-3, 1.0
    while f(lo) > 0:
        lo *= 0.1
        if lo < 1e-12:
            raise TargetOutOfRange("target beta too small to bracket")
    while f(hi) < 0:
        hi *= 2.0
        if hi > 1e6:
            raise TargetOutOfRange("target beta too close to pi to bracket")
    return brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


def negative_unduloid_width_range(n: int, h: float, samples: int = 64) -> tuple:
    """Observed range of the adjusted width on the branch (-C_{-h}, -h/(n-1)), h > 0.

    Any rational multiple of pi inside this range is a closed negative-h unduloid.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    k = h / (n - 1)
    Cmh = contact_constant(n, -h)
    grid = np.linspace(-Cmh, -k, samples + 1)[1:-1]
    vals = [adjusted_width(n, h, C).Wtilde for C in grid]
    return (float(min(vals)), float(max(vals)))
