"""Characteristic quasi-polynomials and their roots.

Three functions are handled:

* ``at_zero``  -- linearisation at 0: ``lambda + rho - 2 rho exp(-lambda)``
* ``at_star``  -- linearisation at ``1/(rho+1)`` in its integral form, which
  has no spurious root at 0
* ``reduced``  -- ``lambda + rho - rho exp(-lambda)``

Roots in a rectangle are located with the argument principle (phase
increments along the boundary, refined until each increment is small),
recursive quadrisection and Newton polishing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .model import InvalidInputError, ModelParams

AT_ZERO = "at_zero"
AT_STAR = "at_star"
REDUCED = "reduced"
TAGS = (AT_ZERO, AT_STAR, REDUCED)

RESIDUAL_TOL = 1e-10
MIN_CELL = 1e-3
NEWTON_MAXIT = 50
NEWTON_STEP_TOL = 1e-13


class SubdivisionError(RuntimeError):
    """Root count from the argument principle could not be reconciled."""


class DegenerateParameterError(ValueError):
    """rho sits on a stability threshold where counting is discontinuous."""


class Rectangle(NamedTuple):
    re_lo: float
    re_hi: float
    im_lo: float
    im_hi: float

    @property
    def diameter(self) -> float:
        return math.hypot(self.re_hi - self.re_lo, self.im_hi - self.im_lo)

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return (self.re_lo - margin <= z.real <= self.re_hi + margin
                and self.im_lo - margin <= z.imag <= self.im_hi + margin)


def default_rect(n_pairs: int = 5) -> Rectangle:
    return Rectangle(-5.0, 3.0, 0.0, 2 * n_pairs * math.pi + math.pi)


@dataclass(frozen=True)
class CharRoot:
    lam: complex
    residual: float
    equilibrium_tag: str


# ---------------------------------------------------------------- functions

def char_zero(lam, params: ModelParams):
    rho = params.rho
    return lam + rho - 2.0 * rho * np.exp(-lam)


def char_zero_deriv(lam, params: ModelParams):
    return 1.0 + 2.0 * params.rho * np.exp(-lam)


def _real_type(lam):
    dt = np.asarray(lam).dtype
    if dt.kind == "c" or dt.kind == "f":
        return np.finfo(dt).dtype.type
    return float


def char_star(lam, params: ModelParams):
    """``P(lambda) + Q(lambda) exp(-lambda)``.

    This polynomial form is the integral form multiplied by ``-lambda``, so
    it vanishes at 0 even though 0 is not an eigenvalue.  Coefficients are
    formed in the precision of ``lam`` (pass ``np.clongdouble`` input for
    extended precision).
    """
    rho = _real_type(lam)(params.rho)
    one = rho / rho
    a = rho / (rho + one)
    P = lam * lam + (rho + a) * lam + a * rho
    Q = -a * rho - rho * lam
    return P + Q * np.exp(-lam)


def _exprel_neg(lam):
    """``(1 - exp(-lam)) / lam`` and its derivative, entire in ``lam``."""
    lam = np.asarray(lam, dtype=complex)
    small = np.abs(lam) < 1e-3
    safe = np.where(small, 1.0, lam)
    e = np.exp(-safe)
    val = np.where(small, 1 - lam / 2 + lam ** 2 / 6 - lam ** 3 / 24,
                   -np.expm1(-safe) / safe)
    der = np.where(small, -0.5 + lam / 3 - lam ** 2 / 8 + lam ** 3 / 30,
                   (safe * e - 1.0 + e) / safe ** 2)
    return val, der


def char_star_integral(lam, params: ModelParams):
    """Integral-form characteristic function at the positive equilibrium.

    ``-rho(1 + 1/(rho+1)) - rho^2/(rho+1) (1 - e^-lam)/lam + rho e^-lam - lam``;
    equals ``-rho`` at ``lam = 0``.
    """
    rho = params.rho
    val, _ = _exprel_neg(lam)
    out = (-rho * (1.0 + 1.0 / (rho + 1.0)) - rho * rho / (rho + 1.0) * val
           + rho * np.exp(-np.asarray(lam, dtype=complex)) - lam)
    return out[()] if np.ndim(out) == 0 else out


def char_star_integral_deriv(lam, params: ModelParams):
    rho = params.rho
    _, der = _exprel_neg(lam)
    out = -rho * rho / (rho + 1.0) * der - rho * np.exp(-np.asarray(lam, dtype=complex)) - 1.0
    return out[()] if np.ndim(out) == 0 else out


def char_reduced(lam, params: ModelParams):
    rho = params.rho
    return lam + rho - rho * np.exp(-lam)


def char_reduced_deriv(lam, params: ModelParams):
    return 1.0 + params.rho * np.exp(-lam)


_FUNCS = {
    AT_ZERO: (char_zero, char_zero_deriv),
    AT_STAR: (char_star_integral, char_star_integral_deriv),
    REDUCED: (char_reduced, char_reduced_deriv),
}


def char_function(which: str):
    try:
        return _FUNCS[which]
    except KeyError:
        raise InvalidInputError(f"unknown equilibrium tag {which!r}; expected one of {TAGS}") from None


def leading_real_root_at_zero(params: ModelParams) -> float:
    """The positive real root of ``lambda + rho = 2 rho exp(-lambda)``."""
    rho = params.rho
    return brentq(lambda x: x + rho - 2 * rho * math.exp(-x), 0.0, rho, xtol=1e-15, rtol=1e-15)


# ------------------------------------------------------- argument principle

class _IllConditioned(Exception):
    pass


def _edge_phase(f, df, z0: complex, z1: complex, max_points: int = 200_000) -> float:
    """Unwrapped change of ``arg f`` from ``z0`` to ``z1``."""
    length = abs(z1 - z0)
    n0 = max(16, int(8 * length) + 1)
    t = np.linspace(0.0, 1.0, n0 + 1)
    while True:
        z = z0 + (z1 - z0) * t
        fz = f(z)
        afz = np.abs(fz)
        if not np.all(np.isfinite(fz)) or np.any(afz == 0):
            raise _IllConditioned
        dphi = np.angle(fz[1:] / fz[:-1])
        dfz = np.abs(df(z))
        dz = np.diff(t) * length
        # linear model: the step must be short compared with |f| / |f'|
        lin = dz * np.maximum(dfz[1:], dfz[:-1]) > 0.5 * np.minimum(afz[1:], afz[:-1])
        bad = (np.abs(dphi) > np.pi / 8) | lin
        if not bad.any():
            return float(dphi.sum())
        if t.size > max_points:
            raise _IllConditioned
        t = np.sort(np.concatenate((t, 0.5 * (t[:-1][bad] + t[1:][bad]))))


def _winding(f, df, rect: Rectangle) -> int:
    a = complex(rect.re_lo, rect.im_lo)
    b = complex(rect.re_hi, rect.im_lo)
    c = complex(rect.re_hi, rect.im_hi)
    d = complex(rect.re_lo, rect.im_hi)
    total = sum(_edge_phase(f, df, p, q) for p, q in ((a, b), (b, c), (c, d), (d, a)))
    w = total / (2 * np.pi)
    k = round(w)
    if abs(w - k) > 1e-6:
        raise _IllConditioned
    return int(k)


# deterministic, irregular outward shifts for (left, right, bottom, top)
_JITTER = ((0.618, 0.302, 0.847, 0.414), (0.236, 0.732, 0.541, 0.913),
           (0.871, 0.129, 0.377, 0.654), (0.455, 0.981, 0.162, 0.288))


def _robust_count(f, df, rect: Rectangle, scale: float):
    """Winding count, nudging the edges outward if a root is near the boundary."""
    try:
        return _winding(f, df, rect), rect
    except _IllConditioned:
        pass
    for k in range(1, 9):
        eps = scale * 4.0 ** k
        a, b, c, d = _JITTER[k % len(_JITTER)]
        r = Rectangle(rect.re_lo - a * eps, rect.re_hi + b * eps,
                      rect.im_lo - c * eps, rect.im_hi + d * eps)
        try:
            return _winding(f, df, r), r
        except _IllConditioned:
            continue
    raise SubdivisionError(f"boundary of {rect} stays too close to a root")


def count_roots(which: str, params: ModelParams, rect: Rectangle) -> int:
    """Number of roots inside ``rect`` by the argument principle."""
    f0, df0 = char_function(which)
    n, _ = _robust_count(lambda z: f0(z, params), lambda z: df0(z, params), Rectangle(*rect),
                         1e-6 * max(1.0, Rectangle(*rect).diameter))
    return n


def _newton(f, df, z: complex):
    # a diverging start overflows exp(-z); it is rejected, not reported
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(NEWTON_MAXIT):
            fz = complex(f(z))
            dfz = complex(df(z))
            if dfz == 0 or not np.isfinite(fz) or not np.isfinite(dfz):
                return None
            step = fz / dfz
            z = z - step
            if abs(step) < NEWTON_STEP_TOL * max(1.0, abs(z)):
                return z
        return z if abs(f(z)) < RESIDUAL_TOL else None


def _split(r: Rectangle, f, df):
    """Quadrisect slightly off-centre, moving the cut lines away from roots."""
    for frac in (0.5137, 0.4711, 0.5573, 0.4289):
        xm = r.re_lo + frac * (r.re_hi - r.re_lo)
        ym = r.im_lo + (1.0 - frac) * (r.im_hi - r.im_lo)
        cells = [Rectangle(r.re_lo, xm, r.im_lo, ym), Rectangle(xm, r.re_hi, r.im_lo, ym),
                 Rectangle(r.re_lo, xm, ym, r.im_hi), Rectangle(xm, r.re_hi, ym, r.im_hi)]
        try:
            return [(c, _winding(f, df, c)) for c in cells]
        except _IllConditioned:
            continue
    raise SubdivisionError(f"could not split {r} away from its roots")


def _locate(f, df, rect: Rectangle, count: int, out: list):
    if count == 0:
        return
    if count == 1 or rect.diameter < MIN_CELL:
        centre = complex(0.5 * (rect.re_lo + rect.re_hi), 0.5 * (rect.im_lo + rect.im_hi))
        z = _newton(f, df, centre)
        margin = 1e-9 * max(1.0, abs(centre))
        if z is not None and rect.contains(z, margin) and abs(f(z)) < RESIDUAL_TOL:
            if count == 1:
                out.append(z)
                return
        if rect.diameter < MIN_CELL:
            if z is None:
                raise SubdivisionError(f"Newton failed in cell {rect}")
            out.extend([z] * count)
            return
    for cell, n in _split(rect, f, df):
        _locate(f, df, cell, n, out)


def _snap_real(z: complex, f) -> complex:
    if abs(z.imag) < 1e-9 * max(1.0, abs(z)):
        zr = complex(z.real, 0.0)
        if abs(f(zr)) <= max(abs(f(z)), RESIDUAL_TOL):
            return zr
    return z


def _sort_roots(roots):
    return sorted(roots, key=lambda z: (-round(z.real, 12), -z.imag))


def find_roots(which: str, params: ModelParams, rect: Rectangle | None = None,
               max_roots: int | None = None, mirror: bool = True) -> list[CharRoot]:
    """All roots of the chosen characteristic function in ``rect``.

    With ``mirror`` (default) a rectangle whose lower edge is on the real
    axis is treated as the upper half of a conjugate-symmetric search: real
    roots on that edge are included and the conjugates of complex roots
    are appended.  Roots are sorted by descending real part.
    """
    f0, df0 = char_function(which)
    f = lambda z: f0(z, params)
    df = lambda z: df0(z, params)
    rect = Rectangle(*(default_rect() if rect is None else rect))
    if rect.re_lo >= rect.re_hi or rect.im_lo >= rect.im_hi:
        raise InvalidInputError(f"degenerate rectangle {rect}")
    half = mirror and rect.im_lo == 0.0
    search = rect
    if half:
        search = rect._replace(im_lo=-min(0.05, 0.1 * (rect.im_hi - rect.im_lo)))
    count, search = _robust_count(f, df, search, 1e-6 * max(1.0, search.diameter))
    found: list[complex] = []
    _locate(f, df, search, count, found)
    if len(found) != count:
        raise SubdivisionError(f"winding count {count} but {len(found)} roots refined")
    found = [_snap_real(z, f) for z in found]
    uniq: list[complex] = []
    for z in found:
        if all(abs(z - u) > 1e-8 * max(1.0, abs(z)) for u in uniq):
            uniq.append(z)
    if len(uniq) != count:
        raise SubdivisionError(f"winding count {count} but {len(uniq)} distinct roots")
    if half:
        upper = [z for z in uniq if z.imag >= 0]
        uniq = upper + [z.conjugate() for z in upper if z.imag > 0]
    elif mirror:
        uniq = _symmetrise(uniq)
    roots = _sort_roots(uniq)
    if max_roots is not None and len(roots) > max_roots:
        roots = roots[:max_roots]
        last = roots[-1]
        if last.imag > 0:
            # keep conjugate pairs whole
            roots = roots[:-1]
    return [CharRoot(z, float(abs(f(z))), which) for z in roots]


def _symmetrise(roots):
    out = []
    used = set()
    for i, z in enumerate(roots):
        if i in used:
            continue
        if z.imag == 0:
            out.append(z)
            continue
        j = min((k for k in range(len(roots)) if k != i and k not in used),
                key=lambda k: abs(roots[k] - z.conjugate()), default=None)
        if j is not None and abs(roots[j] - z.conjugate()) < 1e-8 * max(1.0, abs(z)):
            used.add(j)
            zz = complex(0.5 * (z.real + roots[j].real), 0.5 * abs(z.imag - roots[j].imag))
            out.extend([zz, zz.conjugate()])
        else:
            out.append(z)
    return out


# ---------------------------------------------------------- stability chart

def rho_crit(j: int) -> float:
    """Threshold where the j-th pair at zero crosses the imaginary axis."""
    if int(j) != j or j < 1:
        raise InvalidInputError("j must be a positive integer")
    return (2 * j * math.pi - math.pi / 3) / math.sqrt(3)


def unstable_count_at_zero(params: ModelParams) -> int:
    """``1 + 2k`` where k counts the thresholds rho_j below rho."""
    rho = params.rho
    k = 0
    j = 1
    while True:
        rc = rho_crit(j)
        if abs(rho - rc) < 1e-9:
            raise DegenerateParameterError(f"rho={rho} is at threshold rho_{j}={rc}")
        if rc >= rho:
            break
        k = j
        j += 1
    return 1 + 2 * k


def unstable_count_winding(params: ModelParams) -> int:
    """Count roots of the zero linearisation with positive real part.

    Such roots satisfy ``|lambda + rho| <= 2 rho``, so the rectangle
    ``[0, rho+1] x [-(2rho+1), 2rho+1]`` contains them all.
    """
    rho = params.rho
    return count_roots(AT_ZERO, params, Rectangle(0.0, rho + 1.0, -(2 * rho + 1), 2 * rho + 1))


def c_curve(j: int, nu):
    """Point(s) ``(alpha, beta)`` on the curve C_j^- at parameter ``nu``."""
    nu = np.asarray(nu, dtype=float)
    lo, hi = (2 * j - 1) * math.pi, 2 * j * math.pi
    if np.any((nu <= lo) | (nu >= hi)):
        raise InvalidInputError(f"nu must lie strictly inside ({lo}, {hi})")
    s = np.sin(nu)
    if np.any(np.abs(s) < 1e-300):
        raise InvalidInputError("sin(nu) vanishes")
    alpha = nu * np.cos(nu) / s
    beta = -nu / s
    return (float(alpha), float(beta)) if nu.ndim == 0 else (alpha, beta)


@dataclass(frozen=True, eq=False)
class StabilityChart:
    j: int
    nu_samples: np.ndarray
    alpha_beta: np.ndarray = field(repr=False)
    rho_crit: float


def stability_chart(j: int, n_samples: int = 200, trim: float = 1e-3) -> StabilityChart:
    lo, hi = (2 * j - 1) * math.pi, 2 * j * math.pi
    nu = np.linspace(lo + trim, hi - trim, n_samples)
    alpha, beta = c_curve(j, nu)
    return StabilityChart(j, nu, np.column_stack((alpha, beta)), rho_crit(j))


# ------------------------------------------------------------ large rho

@dataclass(frozen=True, eq=False)
class SpectralScan:
    rhos: np.ndarray
    roots: list
    distances: np.ndarray  # (len(rhos), n_pairs): |lambda_j - 2 j pi i|

    def monotone(self, slack: float = 1e-6) -> bool:
        d = self.distances
        return bool(np.all(np.diff(d, axis=0) <= slack))


def upper_pairs(roots) -> list[complex]:
    """Complex roots with positive imaginary part, ordered by imaginary part."""
    return sorted((r.lam for r in roots if r.lam.imag > 0), key=lambda z: z.imag)


def leading_pair(which: str, params: ModelParams, rect: Rectangle | None = None) -> complex:
    """Upper member of the complex pair with largest real part."""
    roots = find_roots(which, params, rect)
    cplx = [r.lam for r in roots if r.lam.imag > 0]
    if not cplx:
        raise SubdivisionError("no complex roots in the search rectangle")
    return max(cplx, key=lambda z: z.real)


def spectral_limit_scan(rho_list, rect: Rectangle | None = None, n_pairs: int = 3) -> SpectralScan:
    rhos = np.asarray(rho_list, dtype=float)
    if np.any(np.diff(rhos) <= 0):
        raise InvalidInputError("rho_list must be strictly ascending")
    rect = default_rect(n_pairs) if rect is None else rect
    all_roots = []
    dist = np.full((rhos.size, n_pairs), np.nan)
    for i, rho in enumerate(rhos):
        roots = find_roots(AT_STAR, ModelParams(rho), rect)
        all_roots.append(roots)
        pairs = upper_pairs(roots)
        for k in range(1, n_pairs + 1):
            target = complex(0.0, 2 * math.pi * k)
            if pairs:
                dist[i, k - 1] = min(abs(z - target) for z in pairs)
    return SpectralScan(rhos, all_roots, dist)
