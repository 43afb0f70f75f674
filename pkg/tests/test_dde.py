import warnings

import numpy as np
import pytest

from gogrow.acceptance import random_omega_history
from gogrow.analysis import cosine_history
from gogrow.dde import (IntegratorConfig, InvarianceViolation, MeanFieldParams, integrate,
                        mean_field_integrate, persistence_floor, w_crosscheck)
from gogrow.model import HistoryFunction, InvalidInputError, ModelParams


def smooth_history(n):
    return HistoryFunction.from_callable(lambda s: 0.1 * (1 + 0.5 * np.sin(3 * s)), n)


def test_equilibrium_is_fixed_point():
    p = ModelParams(7)
    traj, diag = integrate(p, HistoryFunction.constant(1 / 8, 200), IntegratorConfig(200, 50.0))
    assert np.max(np.abs(traj.values - 1 / 8)) < 1e-12
    assert np.max(np.abs(diag.w)) < 1e-12


def test_zero_stays_zero():
    traj, _ = integrate(ModelParams(3), HistoryFunction.constant(0.0, 50), IntegratorConfig(50, 10.0))
    assert np.all(traj.values == 0.0)


def test_convergence_rho10():
    traj, _ = integrate(ModelParams(10), cosine_history(), IntegratorConfig(200, 60.0))
    assert abs(traj.values[-1] - 1 / 11) < 1e-3


def test_delayed_lookup_hits_nodes():
    traj, _ = integrate(ModelParams(2), smooth_history(40), IntegratorConfig(40, 5.0))
    t = traj.times[40:]
    np.testing.assert_allclose(traj.delayed(t), traj.values[:-40], rtol=0, atol=1e-14)
    assert traj.delayed(0.5) == pytest.approx(traj.history(-0.5))


def test_order_four():
    p = ModelParams(2)
    ts = np.linspace(0, 5, 11)
    x = [integrate(p, smooth_history(n), IntegratorConfig(n, 5.0, False))[0](ts)
         for n in (32, 64, 128)]
    ratio = np.max(np.abs(x[0] - x[1])) / np.max(np.abs(x[1] - x[2]))
    assert 12 <= ratio <= 20


def test_theta_monotone_and_bounded():
    rng = np.random.default_rng(3)
    for rho in (1, 10, 100):
        p = ModelParams(rho)
        for _ in range(10):
            traj, diag = integrate(p, random_omega_history(rng, rho), IntegratorConfig(200, 30.0))
            assert traj.values.min() >= -1e-9 and traj.values.max() <= 1 + 1e-9
            assert np.diff(diag.theta).min() >= -1e-10
            assert diag.theta.max() <= 1 + 1e-9


def test_theta_derivative_law():
    # theta' = rho x(t-1) (1 - theta)
    p = ModelParams(4)
    traj, diag = integrate(p, smooth_history(200), IntegratorConfig(200, 6.0))
    h = traj.h
    k = np.arange(300, diag.theta.size - 2)
    dtheta = np.gradient(diag.theta, h)[k]
    law = p.rho * traj.values[k - 200] * (1 - diag.theta[k])
    assert np.max(np.abs(dtheta - law)) < 1e-4


def test_w_crosscheck_equilibrium_and_cosine():
    p = ModelParams(10)
    traj, diag = integrate(p, HistoryFunction.constant(1 / 11, 200), IntegratorConfig(200, 10.0))
    assert w_crosscheck(traj, diag) < 1e-14
    d = []
    for n in (200, 400):
        traj, diag = integrate(p, cosine_history(grid_count=n), IntegratorConfig(n, 10.0))
        d.append(w_crosscheck(traj, diag))
    assert d[0] < 1e-6
    assert d[0] / d[1] > 8


def test_out_of_omega_warns_and_flags():
    with pytest.warns(RuntimeWarning):
        traj, _ = integrate(ModelParams(1), HistoryFunction.constant(0.9, 20), IntegratorConfig(20, 2.0))
    assert not traj.feasible_start


def test_coarse_grid_raises_invariance():
    # rho = 400 with 16 steps per delay is far too coarse
    phi = cosine_history(scale=0.001, grid_count=16)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(InvarianceViolation):
            integrate(ModelParams(400), phi, IntegratorConfig(16, 30.0))


def test_config_validation():
    with pytest.raises(InvalidInputError):
        IntegratorConfig(15, 1.0)
    with pytest.raises(InvalidInputError):
        IntegratorConfig(200, -1.0)


def test_meanfield_zero_and_pcheck():
    s = mean_field_integrate(MeanFieldParams(1, 1, 1, 0.0), IntegratorConfig(200, 10.0, False))
    assert np.all(s.m == 0) and np.all(s.p == 0)
    for mf in (MeanFieldParams(1, 1, 1, 0.05), MeanFieldParams(3, 0.5, 100, 20)):
        s = mean_field_integrate(mf, IntegratorConfig(200, 20.0, False))
        assert np.max(np.abs(s.p - s.p_check)) < 1e-8 * max(1.0, mf.K)


def test_meanfield_matches_rescaled():
    mf = MeanFieldParams(1, 1, 1, 0.05)
    s = mean_field_integrate(mf, IntegratorConfig(200, 40.0, False))
    traj, _ = integrate(ModelParams(1), HistoryFunction.jump(0.05, 200), IntegratorConfig(200, 40.0, False))
    assert np.max(np.abs(s.m - traj(s.t))) < 2e-3


def test_persistence_floor():
    p = ModelParams(10)
    assert persistence_floor(p, [HistoryFunction.constant(1 / 11, 200)],
                             IntegratorConfig(200, 20.0)) == pytest.approx(1 / 11, abs=1e-12)
    rng = np.random.default_rng(11)
    phis = [random_omega_history(rng, 10) for _ in range(20)]
    assert abs(persistence_floor(p, phis, IntegratorConfig(200, 200.0)) - 1 / 11) < 0.1 / 11
    phis = [random_omega_history(rng, 100) for _ in range(20)]
    assert persistence_floor(ModelParams(100), phis, IntegratorConfig(200, 100.0)) > 0
