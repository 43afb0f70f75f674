"""Fixed-step method-of-steps integrator.

Both the non-dimensional equation and the dimensional mean-field system
share the structure

    u'(t) = -a u(t) + a u(t-d) (2 - b v(t) - c u(t))
    v'(t) = g (u(t) - u(t-d))

where ``v`` is the running integral (``I`` in the scaled model, the
proliferative density ``p`` in the mean-field model).  The step is
``h = d / N`` so every integer multiple of the delay is a grid node, and
delayed values between nodes come from cubic Hermite interpolation on
stored (value, derivative) pairs.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import HistoryFunction, InvalidInputError, ModelParams, in_omega

GROWTH_EPS = 1e-6


class InvarianceViolation(RuntimeError):
    """The solution left the feasible band although it started in Omega."""


@dataclass(frozen=True)
class IntegratorConfig:
    steps_per_delay: int = 200
    t_end: float = 50.0
    record_diagnostics: bool = True

    def __post_init__(self):
        n = self.steps_per_delay
        if int(n) != n or n < 16 or n % 2:
            raise InvalidInputError(f"steps_per_delay must be an even integer >= 16, got {n}")
        if not self.t_end > 0:
            raise InvalidInputError("t_end must be positive")

    @property
    def h(self) -> float:
        return 1.0 / self.steps_per_delay

    def n_steps(self, delay: float = 1.0) -> int:
        steps = self.t_end / delay * self.steps_per_delay
        n = int(round(steps))
        if abs(steps - n) > 1e-9 * max(1.0, steps):
            raise InvalidInputError("t_end must be a multiple of the step size")
        return n


@njit(cache=True, nogil=True)
def _field(u, v, ud, a, b, c, g):
    return -a * u + a * ud * (2.0 - b * v - c * u), g * (u - ud)


@njit(cache=True, nogil=True)
def _rk4_kernel(hist_lo, hist_mid, hist_hi, u0, v0, a, b, c, g, h, n_steps, lo, hi):
    """Integrate ``n_steps`` RK4 steps.

    Returns node values ``us, vs``, right-limit derivatives ``fr`` and
    left-limit derivatives ``fl`` (of u), and the first step index whose
    value left ``[lo, hi]`` (``-1`` if none).
    """
    nd = hist_lo.size
    us = np.empty(n_steps + 1)
    vs = np.empty(n_steps + 1)
    fr = np.empty(n_steps + 1)
    fl = np.empty(n_steps + 1)
    us[0] = u0
    vs[0] = v0
    bad = -1
    for n in range(n_steps):
        if n < nd:
            d0 = hist_lo[n]
            dm = hist_mid[n]
            d1 = hist_hi[n]
        else:
            j = n - nd
            d0 = us[j]
            d1 = us[j + 1]
            dm = 0.5 * (d0 + d1) + h * (fr[j] - fl[j + 1]) / 8.0
        u = us[n]
        v = vs[n]
        k1u, k1v = _field(u, v, d0, a, b, c, g)
        fr[n] = k1u
        k2u, k2v = _field(u + 0.5 * h * k1u, v + 0.5 * h * k1v, dm, a, b, c, g)
        k3u, k3v = _field(u + 0.5 * h * k2u, v + 0.5 * h * k2v, dm, a, b, c, g)
        k4u, k4v = _field(u + h * k3u, v + h * k3v, d1, a, b, c, g)
        un = u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        vn = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        us[n + 1] = un
        vs[n + 1] = vn
        fl[n + 1] = _field(un, vn, d1, a, b, c, g)[0]
        if bad < 0 and (un < lo or un > hi or un != un):
            bad = n + 1
            return us[:n + 2], vs[:n + 2], fr[:n + 2], fl[:n + 2], bad
    # right-limit derivative at the final node
    n = n_steps
    if n < nd:
        d0 = hist_lo[n]
    else:
        d0 = us[n - nd]
    fr[n] = _field(us[n], vs[n], d0, a, b, c, g)[0]
    fl[0] = fr[0]
    return us, vs, fr, fl, bad


def _history_cells(phi: HistoryFunction, n: int):
    """Values at the left end, midpoint and right end of each history cell."""
    phi = phi.resample(n)
    s = phi.grid
    branch = phi.branch_samples
    lo = branch[:-1].copy()
    hi = branch[1:].copy()
    mid = phi._spline(0.5 * (s[:-1] + s[1:]))
    return phi, lo, mid, hi


def _hermite(t, t0, h, y0, y1, f0, f1):
    s = (t - t0) / h
    s2 = s * s
    s3 = s2 * s
    return ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0
            + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * f1)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Dense numerical solution on [-1, t_end].

    ``values``, ``derivs`` (right limits) and ``derivs_left`` are stored at
    the solution nodes ``t_start + k h`` for ``t >= 0``; the segment on
    [-1, 0) is evaluated through ``history``.
    """

    t_start: float
    h: float
    values: np.ndarray
    derivs: np.ndarray
    derivs_left: np.ndarray
    params: ModelParams
    history: HistoryFunction
    feasible_start: bool = True

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.h * np.arange(self.values.size)

    @property
    def t_end(self) -> float:
        return self.t_start + self.h * (self.values.size - 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.empty_like(t)
        past = t < self.t_start
        if past.any():
            out[past] = self.history(t[past] - self.t_start)
        now = ~past
        if now.any():
            tt = t[now]
            if np.any(tt > self.t_end + 1e-12):
                raise InvalidInputError("evaluation beyond t_end")
            k = np.clip(((tt - self.t_start) / self.h).astype(int), 0, self.values.size - 2)
            t0 = self.t_start + k * self.h
            out[now] = _hermite(tt, t0, self.h, self.values[k], self.values[k + 1],
                                self.derivs[k], self.derivs_left[k + 1])
        return out[0] if scalar else out

    def delayed(self, t):
        return self(np.asarray(t, dtype=float) - 1.0)

    def cell_integrals(self) -> np.ndarray:
        """Integral of the Hermite interpolant over each solution step."""
        y, h = self.values, self.h
        return 0.5 * h * (y[:-1] + y[1:]) + h * h / 12.0 * (self.derivs[:-1] - self.derivs_left[1:])

    def cumulative_integral(self) -> np.ndarray:
        """``int_{t_start}^{t_k} x`` at every solution node."""
        return np.concatenate(([0.0], np.cumsum(self.cell_integrals())))

    def window(self, t_a: float, t_b: float):
        """Node times and values within [t_a, t_b]."""
        t = self.times
        mask = (t >= t_a - 1e-12) & (t <= t_b + 1e-12)
        return t[mask], self.values[mask]


@dataclass(frozen=True, eq=False)
class DiagnosticsSeries:
    times: np.ndarray
    theta: np.ndarray
    w: np.ndarray
    running_integral: np.ndarray


def integrate(params: ModelParams, phi: HistoryFunction, config: IntegratorConfig):
    """RK4 method-of-steps solution of the scaled equation.

    Returns ``(trajectory, diagnostics)``; ``diagnostics`` is ``None`` when
    ``config.record_diagnostics`` is false.  Starting outside Omega only
    warns, and the result carries ``feasible_start=False``.
    """
    n = config.steps_per_delay
    phi, lo_v, mid_v, hi_v = _history_cells(phi, n)
    rho = params.rho
    feasible = in_omega(phi, params)
    if feasible:
        lo, hi = -GROWTH_EPS, 1.0 + GROWTH_EPS
    else:
        warnings.warn("initial history is outside Omega; integrating anyway", RuntimeWarning)
        lo, hi = -np.inf, np.inf
    x0 = float(phi.samples[-1])
    i0 = phi.integral()
    n_steps = config.n_steps()
    xs, ins, fr, fl, bad = _rk4_kernel(lo_v, mid_v, hi_v, x0, i0, rho, rho, 1.0, 1.0,
                                       config.h, n_steps, lo, hi)
    if bad >= 0:
        raise InvarianceViolation(
            f"x(t={bad * config.h:.6g}) = {xs[bad]:.6g} left [0, 1]; "
            f"steps_per_delay={n} may be too coarse for rho={rho}")
    traj = Trajectory(0.0, config.h, xs, fr, fl, params, phi, feasible)
    if not config.record_diagnostics:
        return traj, None
    th = xs + rho * ins
    diag = DiagnosticsSeries(traj.times, th, 1.0 - th, ins)
    return traj, diag


def w_crosscheck(traj: Trajectory, diag: DiagnosticsSeries) -> float:
    """Sup-norm defect of ``w(t) = w(0) exp(-rho int_0^t x(s-1) ds)``.

    The right side is built from trajectory quadrature alone, so it is
    independent of the running integral carried by the integrator.
    """
    rho = traj.params.rho
    n = int(round(1.0 / traj.h))
    hist = traj.history
    s = hist.grid
    hist_part = np.concatenate(([0.0], np.cumsum(
        [hist.segment_integral(s[i], s[i + 1]) for i in range(n)])))
    sol_part = traj.cumulative_integral()
    m = diag.times.size
    # int_{-1}^{t_k - 1} x: history up to node k (k <= n), then solution nodes
    delayed = np.empty(m)
    k_hist = min(m, n + 1)
    delayed[:k_hist] = hist_part[:k_hist]
    if m > n + 1:
        delayed[n + 1:] = hist_part[-1] + sol_part[1:m - n]
    predicted = diag.w[0] * np.exp(-rho * delayed)
    return float(np.max(np.abs(diag.w - predicted)))


@dataclass(frozen=True)
class MeanFieldParams:
    """Dimensional mean-field parameters (motile history zero on [-tau, 0))."""

    r: float
    tau: float
    K: float
    m0: float

    def __post_init__(self):
        if not (self.r > 0 and self.tau > 0 and self.K > 0):
            raise InvalidInputError("r, tau and K must be positive")
        if not 0 <= self.m0 <= self.K:
            raise InvalidInputError("m0 must lie in [0, K]")

    @property
    def rho(self) -> float:
        return self.r * self.tau


@dataclass(frozen=True, eq=False)
class MeanFieldSeries:
    t: np.ndarray
    m: np.ndarray
    p: np.ndarray
    p_check: np.ndarray
    params: MeanFieldParams

    @property
    def total_density(self) -> np.ndarray:
        return (self.m + self.p) / self.params.K


def mean_field_integrate(mf: MeanFieldParams, config: IntegratorConfig) -> MeanFieldSeries:
    """Integrate the dimensional motile/proliferative system.

    ``config.t_end`` is in dimensional time and ``steps_per_delay`` steps
    span one ``tau``.  ``p_check`` is ``r * int_{t-tau}^t m`` evaluated by
    Hermite quadrature of the computed ``m``.
    """
    n = config.steps_per_delay
    h = mf.tau / n
    n_steps = config.n_steps(mf.tau)
    zeros = np.zeros(n)
    K = mf.K
    ms, ps, fr, fl, bad = _rk4_kernel(zeros, zeros, zeros, float(mf.m0), 0.0,
                                      mf.r, 1.0 / K, 1.0 / K, mf.r, h, n_steps,
                                      -GROWTH_EPS * K, (1.0 + GROWTH_EPS) * K)
    if bad >= 0:
        raise InvarianceViolation(f"m(t={bad * h:.6g}) = {ms[bad]:.6g} left [0, K]")
    cells = 0.5 * h * (ms[:-1] + ms[1:]) + h * h / 12.0 * (fr[:-1] - fl[1:])
    cum = np.concatenate(([0.0], np.cumsum(cells)))
    lagged = np.concatenate((np.zeros(n), cum[:-n]))[:cum.size]
    p_check = mf.r * (cum - lagged)
    t = h * np.arange(ms.size)
    return MeanFieldSeries(t, ms, ps, p_check, mf)


def persistence_floor(params: ModelParams, phi_set, config: IntegratorConfig) -> float:
    """Smallest value of x over [t_end/2, t_end] across the given histories."""
    floor = np.inf
    for phi in phi_set:
        if not phi.samples[-1] > 0:
            raise InvalidInputError("persistence needs phi(0) > 0")
        traj, _ = integrate(params, phi, IntegratorConfig(config.steps_per_delay,
                                                          config.t_end, False))
        _, x = traj.window(config.t_end / 2, config.t_end)
        floor = min(floor, float(x.min()))
    return floor
