"""Acceptance checks, runnable from pytest and from ``gogrow accept``.

Each check returns a :class:`CriterionResult`; its runtime is measured
after the numba kernels have been compiled (see :func:`warmup`).
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass

import numpy as np

from . import abm, analysis, spectral
from .dde import IntegratorConfig, MeanFieldParams, integrate, mean_field_integrate, w_crosscheck
from .model import HistoryFunction, ModelParams, in_omega, rhs, theta

DEFAULT_SEED = 20240607


def master_seed() -> int:
    return int(os.environ.get("GOGROW_SEED", DEFAULT_SEED))


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    runtime: float = 0.0
    budget: float = math.inf

    @property
    def ok(self) -> bool:
        return self.passed and self.runtime < self.budget

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (f"[{status}] {self.number:2d}. {self.name:<38s} "
                f"{self.runtime:7.2f}s/{self.budget:g}s  {self.detail}")


def random_omega_history(rng: np.random.Generator, rho: float, grid_count: int = 200) -> HistoryFunction:
    """Random smooth history in Omega with ``phi(0) > 0``.

    A random trigonometric polynomial is shifted to a positive minimum and
    scaled to a random total density in (0, 1].
    """
    s = np.linspace(-1.0, 0.0, grid_count + 1)
    n_modes = rng.integers(1, 8)
    k = rng.integers(1, 25, size=n_modes)
    amp = rng.normal(size=n_modes) / k
    phase = rng.uniform(0, 2 * np.pi, size=n_modes)
    y = (amp[:, None] * np.cos(np.pi * k[:, None] * s + phase[:, None])).sum(axis=0)
    y = y - y.min() + rng.uniform(1e-3, 1.0) * (np.ptp(y) + 1e-12)
    target = 10.0 ** rng.uniform(-4, 0)
    phi = HistoryFunction(y)
    return HistoryFunction(y * target / theta(phi, ModelParams(rho)))


def warmup() -> None:
    """Compile the numba kernels once so timings exclude JIT cost."""
    p = ModelParams(1.0)
    integrate(p, HistoryFunction.constant(0.1, 16), IntegratorConfig(16, 1.0))
    mean_field_integrate(MeanFieldParams(1, 1, 1, 0.1), IntegratorConfig(16, 1.0, False))
    abm.simulate(abm.LatticeParams(side=4, seeding=0.5), 0, 1.0, 0.5)


def _timed(budget):
    def deco(fn):
        def run():
            t0 = time.perf_counter()
            res = fn()
            res.runtime = time.perf_counter() - t0
            res.budget = budget
            return res
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return deco


@_timed(1.0)
def c01_equilibria():
    worst_rhs = 0.0
    worst_drift = 0.0
    for rho in (0.5, 1, 3, 10, 20, 100):
        p = ModelParams(rho)
        for value in (0.0, p.x_star):
            worst_rhs = max(worst_rhs, abs(rhs(HistoryFunction.constant(value, 200), p)))
        traj, _ = integrate(p, HistoryFunction.constant(p.x_star, 200), IntegratorConfig(200, 50.0))
        worst_drift = max(worst_drift, float(np.max(np.abs(traj.values - p.x_star))))
    ok = worst_rhs < 1e-12 and worst_drift < 1e-12
    return CriterionResult(1, "equilibria", ok, f"max|f|={worst_rhs:.2e} drift={worst_drift:.2e}")


@_timed(1.0)
def c02_factorization():
    rng = np.random.default_rng(master_seed())
    worst = 0.0
    for rho in (1, 10, 100):
        p = ModelParams(rho)
        lam = rng.uniform(-10, 10, 10_000) + 1j * rng.uniform(-10, 10, 10_000)
        # |exp(-lam)| reaches 2e4, so double rounding alone exceeds the bound;
        # both sides are evaluated in extended precision
        lam = lam.astype(np.clongdouble)
        r = np.longdouble(rho)
        lhs = spectral.char_star(lam, p)
        fac = (lam + r / (r + 1)) * (lam + r - r * np.exp(-lam))
        worst = max(worst, float(np.max(np.abs(lhs - fac) / (1 + np.abs(lam) ** 2))))
    return CriterionResult(2, "characteristic factorization", worst <= 1e-12,
                           f"max scaled defect={worst:.2e}")


@_timed(5.0)
def c03_eigenvalues_rho20():
    p = ModelParams(20)
    roots = spectral.find_roots(spectral.AT_ZERO, p, spectral.Rectangle(-1, 2, -1, 1))
    real = [r.lam.real for r in roots if r.lam.imag == 0]
    lam0 = max(real) if real else math.nan
    pair = spectral.leading_pair(spectral.AT_STAR, p)
    ok = (0.64 <= lam0 <= 0.68 and abs(pair.real + 0.04) <= 0.02 and abs(pair.imag - 6) <= 0.5)
    return CriterionResult(3, "eigenvalues at rho=20", ok, f"lambda0={lam0:.4f} pair={pair:.4f}")


@_timed(10.0)
def c04_thresholds():
    r1, r2 = spectral.rho_crit(1), spectral.rho_crit(2)
    ok = abs(r1 - 3.0230) <= 1e-4 and abs(r2 - 6.6505) <= 1e-4
    counts = [spectral.unstable_count_winding(ModelParams(r + d))
              for r in (r1, r2) for d in (-0.05, 0.05)]
    ok = ok and counts == [1, 3, 3, 5]
    return CriterionResult(4, "stability thresholds", ok,
                           f"rho1={r1:.5f} rho2={r2:.5f} counts={counts}")


@_timed(10.0)
def c05_spectral_limit():
    dist = []
    for rho in (1, 10, 100):
        pair = spectral.leading_pair(spectral.AT_STAR, ModelParams(rho))
        dist.append(abs(pair - 2j * math.pi))
    ok = dist[0] > dist[1] > dist[2]
    return CriterionResult(5, "spectral limit", ok, "dist=" + ", ".join(f"{d:.4f}" for d in dist))


@_timed(60.0)
def c06_invariance():
    rng = np.random.default_rng([master_seed(), 6])
    lo, hi, worst_dtheta, worst_end = math.inf, -math.inf, math.inf, 0.0
    for rho in (1, 10, 100):
        p = ModelParams(rho)
        for _ in range(100):
            phi = random_omega_history(rng, rho)
            traj, diag = integrate(p, phi, IntegratorConfig(200, 80.0))
            lo = min(lo, float(traj.values.min()))
            hi = max(hi, float(traj.values.max()))
            worst_dtheta = min(worst_dtheta, float(np.diff(diag.theta).min()))
            worst_end = max(worst_end, abs(diag.theta[-1] - 1))
    ok = lo >= -1e-9 and hi <= 1 + 1e-9 and worst_dtheta >= -1e-10 and worst_end < 1e-6
    return CriterionResult(6, "Omega invariance and theta -> 1", ok,
                           f"x in [{lo:.2e}, {hi:.3f}] min dtheta={worst_dtheta:.1e} "
                           f"|theta-1|={worst_end:.1e}")


@_timed(10.0)
def c07_w_crosscheck():
    p = ModelParams(10)
    defects = []
    for n in (200, 400):
        traj, diag = integrate(p, analysis.cosine_history(grid_count=n), IntegratorConfig(n, 10.0))
        defects.append(w_crosscheck(traj, diag))
    order = math.log2(defects[0] / defects[1]) if defects[1] > 0 else math.inf
    ok = defects[0] < 1e-6 and defects[1] < 1e-7 and order >= 3
    return CriterionResult(7, "w-formula cross-check", ok,
                           f"defect N=200 {defects[0]:.2e}, N=400 {defects[1]:.2e}, order {order:.2f}")


@_timed(300.0)
def c08_global_convergence():
    rng = np.random.default_rng([master_seed(), 8])
    worst_gap, floor = 0.0, math.inf
    for rho, t_end in ((10, 200.0), (100, 4000.0)):
        p = ModelParams(rho)
        for _ in range(20):
            traj, _ = integrate(p, random_omega_history(rng, rho), IntegratorConfig(200, t_end, False))
            worst_gap = max(worst_gap, abs(traj.values[-1] - p.x_star))
            _, x = traj.window(t_end / 2, t_end)
            floor = min(floor, float(x.min()))
    ok = worst_gap < 1e-4 and floor > 0
    return CriterionResult(8, "global convergence and persistence", ok,
                           f"max gap={worst_gap:.2e} floor={floor:.3e}")


@_timed(120.0)
def c09_metastability():
    p = ModelParams(100)
    traj, _ = integrate(p, analysis.cosine_history(), IntegratorConfig(200, 2000.0, False))
    early = analysis.transient_diagnostics(traj, (40, 60), p)
    late = analysis.transient_diagnostics(traj, (400, 420), p, with_spectrum=False)
    long = analysis.transient_diagnostics(traj, (200, 2000), p, with_spectrum=False)
    re = abs(early.leading_pair.real)
    ratio = abs(long.envelope_rate) / re
    ok = (abs(early.dominant_period - 1) <= 0.1 and late.envelope_amplitude < early.envelope_amplitude
          and 0.5 <= ratio <= 2.0)
    return CriterionResult(9, "metastability at rho=100", ok,
                           f"period={early.dominant_period:.4f} env {early.envelope_amplitude:.2e}"
                           f"->{late.envelope_amplitude:.2e} rate/|Re|={ratio:.3f}")


@_timed(60.0)
def c10_heteroclinic():
    p = ModelParams(20)
    cfg = IntegratorConfig(200, 300.0)
    a = analysis.heteroclinic(p, 1e-5, cfg)
    b = analysis.heteroclinic(p, 5e-6, cfg)
    level = p.x_star / 2
    shift = analysis.crossing_time(b.trajectory, level) - analysis.crossing_time(a.trajectory, level)
    expect = math.log(2) / a.lambda0
    growth_err = abs(a.fitted_growth / a.lambda0 - 1)
    shift_err = abs(shift / expect - 1)
    ok = growth_err < 0.02 and a.terminal_gap < 1e-6 and shift_err < 0.05
    return CriterionResult(10, "heteroclinic orbit at rho=20", ok,
                           f"growth err={growth_err:.2%} gap={a.terminal_gap:.1e} "
                           f"shift err={shift_err:.2%}")


@_timed(300.0)
def c11_abm_mean_field():
    lp = abm.LatticeParams(n_dims=2, side=100, seeding=0.05, switch_rate=1.0,
                           cycle_delay=1.0, motility_rate=10.0)
    ens = abm.ensemble(lp, abm.spawn_seeds(master_seed(), 20), 10.0, 0.5)
    mf = abm.mean_field_density(lp, 10.0)
    errs = []
    for t in (2.0, 5.0, 10.0):
        i = int(round(t / 0.5))
        k = int(round(t * 200))
        errs.append(abs(ens.mean["total_density"][i] / mf.total_density[k] - 1))
    full = abm.simulate(abm.LatticeParams(side=100, seeding=1.0), master_seed(), 10.0, 0.5)
    full_ok = bool(np.all(full.total_density == 1.0))
    ok = max(errs) < 0.10 and full_ok
    return CriterionResult(11, "ABM vs mean-field", ok,
                           "rel err " + ", ".join(f"{e:.2%}" for e in errs)
                           + f"; full lattice constant={full_ok}")


@_timed(10.0)
def c12_rescaling():
    worst = 0.0
    for r, tau, K, m0 in ((1.0, 1.0, 1.0, 0.05), (2.0, 0.5, 1e4, 500.0), (0.25, 8.0, 400.0, 3.0)):
        mf = MeanFieldParams(r, tau, K, m0)
        series = mean_field_integrate(mf, IntegratorConfig(200, 40.0 * tau, False))
        traj, _ = integrate(ModelParams(r * tau), HistoryFunction.jump(m0 / K, 200),
                            IntegratorConfig(200, 40.0, False))
        worst = max(worst, float(np.max(np.abs(series.m / K - traj(series.t / tau)))))
    return CriterionResult(12, "mean-field rescaling equivalence", worst < 2e-3,
                           f"sup|m/K - x(t/tau)|={worst:.2e}")


CRITERIA = [c01_equilibria, c02_factorization, c03_eigenvalues_rho20, c04_thresholds,
            c05_spectral_limit, c06_invariance, c07_w_crosscheck, c08_global_convergence,
            c09_metastability, c10_heteroclinic, c11_abm_mean_field, c12_rescaling]


def run_all(only=None, echo=print) -> list[CriterionResult]:
    warmup()
    results = []
    for i, crit in enumerate(CRITERIA, 1):
        if only and i not in only:
            continue
        res = crit()
        results.append(res)
        if echo:
            echo(res.line())
    return results
