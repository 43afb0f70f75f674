"""Numerical experiments built on the integrator and the spectral tools.

* ``heteroclinic`` launches along the unstable eigenfunction at zero and
  follows the connecting orbit to the positive equilibrium.
* ``transient_diagnostics`` measures period and envelope of the long
  oscillatory transients seen at large rho.
* ``shape_gallery`` batches a set of initial functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import correlate, find_peaks

from .dde import IntegratorConfig, Trajectory, integrate
from .model import HistoryFunction, InvalidInputError, ModelParams
from .spectral import AT_STAR, leading_pair, leading_real_root_at_zero

PROMINENCE = 1e-9
CONVERGENCE_TOL = 1e-6


class InsufficientOscillationError(ValueError):
    """Fewer than three peaks were found in the requested window."""


def cosine_history(a: float = 10.0, power: float = 1.0, scale: float = 0.005,
                   grid_count: int = 200) -> HistoryFunction:
    """``scale * (cos(a * t**power) + 1)`` on [-1, 0]."""
    return HistoryFunction.from_callable(lambda t: scale * (np.cos(a * t ** power) + 1.0), grid_count)


# ------------------------------------------------------------ heteroclinic

@dataclass(frozen=True, eq=False)
class HeteroclinicResult:
    rho: float
    c: float
    lambda0: float
    trajectory: Trajectory
    fitted_growth: float
    terminal_gap: float
    converged_at: float | None

    def to_dict(self) -> dict:
        return {"rho": self.rho, "c": self.c, "lambda0": self.lambda0,
                "fitted_growth": self.fitted_growth, "terminal_gap": self.terminal_gap}


def c_max(params: ModelParams) -> float:
    return 1.0 / (2.0 * (1.0 + params.rho))


def _tail_gap(traj: Trajectory, x_star: float, t: float) -> float:
    tt, x = traj.window(max(traj.t_start, t - 1.0), t)
    return float(np.max(np.abs(x - x_star)))


def heteroclinic(params: ModelParams, c: float, config: IntegratorConfig,
                 tol: float = CONVERGENCE_TOL) -> HeteroclinicResult:
    """Follow the orbit launched from ``c * exp(lambda0 s)``.

    The growth rate is fitted on ``log x`` over the initial stretch where
    ``x < x*/10``.  ``terminal_gap`` is the largest ``|x - x*|`` over the
    last delay interval, so a single crossing of ``x*`` never counts as
    convergence; ``converged_at`` is the first integer time at which that
    gap drops below ``tol``.
    """
    if not 0.0 < c < c_max(params):
        raise InvalidInputError(f"c must lie in (0, {c_max(params):.6g})")
    lam0 = leading_real_root_at_zero(params)
    phi = HistoryFunction.from_callable(lambda s: c * np.exp(lam0 * s), config.steps_per_delay)
    traj, _ = integrate(params, phi, IntegratorConfig(config.steps_per_delay, config.t_end, False))
    x_star = params.x_star
    t, x = traj.times, traj.values
    above = np.flatnonzero(x >= x_star / 10.0)
    stop = above[0] if above.size else x.size
    if stop < 3:
        raise InvalidInputError("c too large: no early exponential window")
    slope = np.polyfit(t[:stop], np.log(x[:stop]), 1)[0]
    converged = None
    for k in range(1, int(math.floor(traj.t_end)) + 1):
        if _tail_gap(traj, x_star, float(k)) < tol:
            converged = float(k)
            break
    return HeteroclinicResult(params.rho, c, lam0, traj, float(slope),
                              _tail_gap(traj, x_star, traj.t_end), converged)


def crossing_time(traj: Trajectory, level: float) -> float:
    """First time ``x`` reaches ``level``, by Hermite-consistent bisection."""
    idx = np.flatnonzero(traj.values >= level)
    if idx.size == 0 or idx[0] == 0:
        raise InvalidInputError("level is never crossed from below")
    lo = traj.times[idx[0] - 1]
    hi = traj.times[idx[0]]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if traj(mid) < level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ----------------------------------------------------------- transients

@dataclass(frozen=True, eq=False)
class TransientDiagnostics:
    peak_times: np.ndarray
    peak_values: np.ndarray
    dominant_period: float
    envelope_rate: float
    envelope_amplitude: float
    leading_pair: complex | None

    @property
    def angular_frequency(self) -> float:
        return 2 * math.pi / self.dominant_period


def _refine_peaks(t, x, idx):
    """Vertex of the parabola through each peak and its two neighbours."""
    y0, y1, y2 = x[idx - 1], x[idx], x[idx + 1]
    denom = y0 - 2 * y1 + y2
    shift = np.where(denom != 0, 0.5 * (y0 - y2) / np.where(denom != 0, denom, 1.0), 0.0)
    h = t[1] - t[0]
    return t[idx] + shift * h, y1 - 0.25 * (y0 - y2) * shift


def _autocorr_period(t, x, min_lag: float = 0.25) -> float:
    """Shortest lag whose autocorrelation is within 10% of the best one."""
    y = x - x.mean()
    h = t[1] - t[0]
    n = y.size
    max_k = n // 2
    min_k = max(1, int(round(min_lag / h)))
    if max_k <= min_k:
        return math.nan
    denom = float(y @ y)
    if denom == 0:
        return math.nan
    full = correlate(y, y, mode="full", method="fft")[n - 1:]
    k = np.arange(min_k, max_k)
    ac = full[k] / denom * n / (n - k)
    # only local maxima of the autocorrelation are candidate periods
    cand = [i for i in range(1, ac.size - 1) if ac[i] >= ac[i - 1] and ac[i] >= ac[i + 1]]
    if not cand:
        return math.nan
    best = max(ac[i] for i in cand)
    if best <= 0:
        return math.nan
    first = next(i for i in cand if ac[i] >= 0.9 * best)
    return (first + min_k) * h


def transient_diagnostics(traj: Trajectory, window, params: ModelParams | None = None,
                          with_spectrum: bool = True) -> TransientDiagnostics:
    """Peak-based period and envelope of ``x`` on ``window = (t_a, t_b)``.

    Peaks are strict local maxima of the node values with prominence above
    1e-9, refined by parabolic interpolation.  Waveforms may carry several
    peaks per cycle, so each peak is paired with the peak nearest to one
    autocorrelation period later; ``dominant_period`` is the median of
    those gaps.  ``envelope_rate`` is the least-squares slope of
    ``log|peak - x*|`` over the peaks of the dominant family.
    """
    params = params or traj.params
    t_a, t_b = window
    if t_a < traj.t_start or t_b > traj.t_end + 1e-9:
        raise InvalidInputError("window exceeds the trajectory")
    if t_b - t_a < 5.0:
        raise InvalidInputError("window must span at least five delay units")
    t, x = traj.window(t_a, t_b)
    idx, _ = find_peaks(x, prominence=PROMINENCE)
    idx = idx[(idx > 0) & (idx < x.size - 1)]
    if idx.size < 3:
        raise InsufficientOscillationError(f"only {idx.size} peaks in {window}")
    pt, pv = _refine_peaks(t, x, idx)
    guess = _autocorr_period(t, x)
    if not np.isfinite(guess):
        guess = float(np.median(np.diff(pt)))
    gaps = []
    for ti in pt:
        j = np.argmin(np.abs(pt - (ti + guess)))
        if abs(pt[j] - ti - guess) < 0.25 * guess:
            gaps.append(pt[j] - ti)
    period = float(np.median(gaps)) if gaps else float(np.median(np.diff(pt)))

    x_star = params.x_star
    # dominant family: the highest peak of each cycle
    fam_t, fam_v = [], []
    start = pt[0]
    while start <= pt[-1]:
        sel = (pt >= start) & (pt < start + period)
        if sel.any():
            k = np.argmax(np.where(sel, pv, -np.inf))
            fam_t.append(pt[k])
            fam_v.append(pv[k])
        start += period
    fam_t = np.array(fam_t)
    amp = np.abs(np.array(fam_v) - x_star)
    ok = amp > 0
    rate = (float(np.polyfit(fam_t[ok], np.log(amp[ok]), 1)[0])
            if ok.sum() >= 2 else math.nan)
    lead = leading_pair(AT_STAR, params) if with_spectrum else None
    return TransientDiagnostics(pt, pv, period, rate, float(np.max(np.abs(x - x_star))), lead)


# --------------------------------------------------------------- gallery

DEFAULT_GALLERY = {
    "cos10": dict(a=10.0, power=1.0),
    "cos20": dict(a=20.0, power=1.0),
    "cos10t4": dict(a=10.0, power=4.0),
}


@dataclass(frozen=True, eq=False)
class GalleryEntry:
    name: str
    trajectory: Trajectory
    diagnostics: TransientDiagnostics | None


def shape_gallery(params: ModelParams, phi_list=None, config: IntegratorConfig | None = None,
                  window=(40.0, 60.0)) -> list[GalleryEntry]:
    """Integrate the three default cosine histories plus any extra ones.

    ``phi_list`` may be a mapping name -> HistoryFunction or a sequence of
    histories.  Diagnostics are ``None`` when the window shows no sustained
    oscillation.
    """
    config = config or IntegratorConfig(200, 60.0, False)
    n = config.steps_per_delay
    phis = {name: cosine_history(grid_count=n, **kw) for name, kw in DEFAULT_GALLERY.items()}
    if phi_list:
        items = phi_list.items() if isinstance(phi_list, dict) else (
            (f"user{i}", p) for i, p in enumerate(phi_list))
        phis.update(items)
    out = []
    for name, phi in phis.items():
        traj, _ = integrate(params, phi, IntegratorConfig(n, config.t_end, False))
        try:
            diag = transient_diagnostics(traj, window, params, with_spectrum=False)
        except InsufficientOscillationError:
            diag = None
        out.append(GalleryEntry(name, traj, diag))
    return out


def peak_amplitudes(traj: Trajectory, t_a: float, t_b: float) -> tuple[np.ndarray, np.ndarray]:
    """Times and ``|peak - x*|`` of all strict peaks in [t_a, t_b]."""
    t, x = traj.window(t_a, t_b)
    idx, _ = find_peaks(x, prominence=PROMINENCE)
    return t[idx], np.abs(x[idx] - traj.params.x_star)
