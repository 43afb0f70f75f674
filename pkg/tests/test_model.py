import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gogrow.model import (HistoryFunction, InvalidInputError, ModelParams, equilibria,
                          equilibrium_history, in_omega, lipschitz_bound, rhs, theta)

RHO_GRID = [0.1, 0.5, 1, 2, 3.7, 10, 20, 50, 100, 200]


def const(v, n=200):
    return HistoryFunction.constant(v, n)


def scalar_f(c, rho):
    # f on constants reduces to rho c (1 - (1 + rho) c)
    return rho * c * (1 - (1 + rho) * c)


@pytest.mark.parametrize("rho", RHO_GRID)
def test_rhs_vanishes_at_equilibria(rho):
    p = ModelParams(rho)
    assert rhs(const(0.0), p) == 0.0
    assert abs(rhs(equilibrium_history(p), p)) < 1e-15


def test_rhs_constant_values():
    assert rhs(const(0.1), ModelParams(2)) == pytest.approx(0.14, abs=1e-15)
    assert rhs(const(0.5), ModelParams(1)) == pytest.approx(0.0, abs=1e-15)
    for c in (0.01, 0.2, 0.7):
        for rho in (0.3, 4.0):
            assert rhs(const(c), ModelParams(rho)) == pytest.approx(scalar_f(c, rho), rel=1e-13)


def test_rhs_uses_endpoints_and_integral():
    # phi(s) = s + 1: phi(0)=1, phi(-1)=0, integral 1/2
    phi = HistoryFunction.from_callable(lambda s: s + 1.0, 16)
    assert rhs(phi, ModelParams(1.0)) == pytest.approx(-1.0)
    phi = HistoryFunction.from_callable(lambda s: -s, 16)
    # phi(0)=0, phi(-1)=1, integral 1/2 -> rho (2 - rho/2)
    assert rhs(phi, ModelParams(2.0)) == pytest.approx(2.0)


def test_theta_values():
    assert theta(const(0.25), ModelParams(1)) == pytest.approx(0.5)
    assert theta(const(0.0), ModelParams(3)) == 0.0
    for rho in RHO_GRID:
        p = ModelParams(rho)
        assert theta(equilibrium_history(p), p) == pytest.approx(1.0, abs=1e-14)


def test_simpson_exact_for_cubics():
    phi = HistoryFunction.from_callable(lambda s: 1 + 2 * s - s ** 2 + 4 * s ** 3, 16)
    # int_{-1}^0 = 1 - 1 - 1/3 - 1
    assert phi.integral() == pytest.approx(-4.0 / 3.0, abs=1e-14)


def test_in_omega_cases():
    p1 = ModelParams(1)
    assert in_omega(const(0.5), p1)
    assert not in_omega(const(1.0), p1)
    s = np.full(201, 0.1)
    s[37] = -1e-300
    assert not in_omega(HistoryFunction(s), p1)
    for rho in RHO_GRID:
        p = ModelParams(rho)
        assert in_omega(equilibrium_history(p), p)


def test_in_omega_refinement():
    rng = np.random.default_rng(1)
    for _ in range(50):
        rho = 10 ** rng.uniform(-1, 2)
        k, a = rng.integers(1, 6), rng.uniform(0, 1)
        level = rng.uniform(0.2, 1.8) / (1 + rho)
        def f(s):
            return level * (1 + a * np.cos(np.pi * k * s))
        coarse = HistoryFunction.from_callable(f, 200)
        fine = HistoryFunction.from_callable(f, 400)
        p = ModelParams(rho)
        if abs(theta(fine, p) - 1) > 1e-8:
            assert in_omega(coarse, p) == in_omega(fine, p)


def test_equilibria():
    assert equilibria(ModelParams(1)) == (0.0, 0.5)
    assert equilibria(ModelParams(3)) == (0.0, 0.25)
    assert equilibria(ModelParams(20))[1] == pytest.approx(1 / 21)


def test_lipschitz_values():
    assert lipschitz_bound(1, ModelParams(1)) == 7
    assert lipschitz_bound(2, ModelParams(1)) == 11
    assert lipschitz_bound(1, ModelParams(2)) == 18


def test_lipschitz_property():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        rho = 10 ** rng.uniform(-1, 2)
        M = rng.uniform(0.1, 3)
        a = rng.uniform(-M, M, 17)
        b = rng.uniform(-M, M, 17)
        phi, psi = HistoryFunction(a), HistoryFunction(b)
        p = ModelParams(rho)
        gap = abs(rhs(phi, p) - rhs(psi, p))
        assert gap <= lipschitz_bound(M, p) * np.max(np.abs(a - b)) * (1 + 1e-12)


samples = st.lists(st.floats(-10, 10), min_size=17, max_size=17)


@settings(max_examples=200, deadline=None)
@given(samples, samples, st.floats(-5, 5), st.floats(-5, 5), st.floats(0.01, 100))
def test_theta_linear(u, v, a, b, rho):
    p = ModelParams(rho)
    u, v = np.array(u), np.array(v)
    lhs = theta(HistoryFunction(a * u + b * v), p)
    rhs_ = a * theta(HistoryFunction(u), p) + b * theta(HistoryFunction(v), p)
    scale = (abs(a) * np.abs(u).max() + abs(b) * np.abs(v).max() + 1) * (1 + rho)
    assert abs(lhs - rhs_) <= 1e-13 * scale


@pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
def test_rho_rejected(bad):
    with pytest.raises(InvalidInputError):
        ModelParams(bad)


def test_history_validation():
    with pytest.raises(InvalidInputError):
        HistoryFunction(np.zeros(15))          # odd grid
    with pytest.raises(InvalidInputError):
        HistoryFunction(np.zeros(9))           # too coarse
    s = np.zeros(17)
    s[3] = np.nan
    with pytest.raises(InvalidInputError):
        HistoryFunction(s)
    with pytest.raises(InvalidInputError):
        const(0.1)(0.5)


def test_jump_history():
    phi = HistoryFunction.jump(0.3, 16)
    assert phi(0.0) == 0.3
    assert phi(-1e-9) == pytest.approx(0.0, abs=1e-12)
    assert phi.integral() == 0.0
    assert not phi.is_continuous


def test_resample_preserves_smooth_history():
    phi = HistoryFunction.from_callable(np.cos, 32)
    fine = phi.resample(128)
    assert np.max(np.abs(fine.samples - np.cos(fine.grid))) < 1e-6
