"""Model definitions for the go-or-grow delayed logistic equation.

The non-dimensional equation is

    x'(t) = -rho x(t) + rho x(t-1) (2 - rho * int_{t-1}^t x(s) ds - x(t))

with a single parameter ``rho = r * tau``.  Histories are sampled on a
uniform grid over [-1, 0] and evaluated with a cubic spline.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

# theta <= 1 test slack, so boundary states with theta == 1 are accepted
OMEGA_TOL = 1e-12
MIN_GRID = 16


class InvalidInputError(ValueError):
    """Raised for non-finite or otherwise malformed model inputs."""


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameter ``rho = r * tau``."""

    rho: float

    def __post_init__(self):
        rho = float(self.rho)
        if not np.isfinite(rho) or rho <= 0:
            raise InvalidInputError(f"rho must be finite and positive, got {self.rho!r}")
        object.__setattr__(self, "rho", rho)

    @property
    def x_star(self) -> float:
        return 1.0 / (self.rho + 1.0)


def _simpson(samples: np.ndarray, h: float) -> float:
    # composite Simpson, len(samples) - 1 must be even
    return h / 3.0 * (samples[0] + samples[-1]
                      + 4.0 * samples[1:-1:2].sum()
                      + 2.0 * samples[2:-1:2].sum())


@dataclass(frozen=True, eq=False)
class HistoryFunction:
    """Initial segment ``phi`` on [-1, 0] sampled at ``s_i = -1 + i/N``.

    Parameters
    ----------
    samples : array_like
        ``N + 1`` values at the uniform grid, the last one being ``phi(0)``.
    left_limit : float, optional
        Value approached as ``s -> 0-``.  Only needed for histories that
        jump at zero, such as the mean-field start (zero on [-1, 0) and
        positive at 0).  When given, the spline on [-1, 0) passes through
        ``left_limit`` at ``s = 0`` while ``phi(0)`` remains ``samples[-1]``.
    """

    samples: np.ndarray
    left_limit: float | None = None
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1:
            raise InvalidInputError("history samples must be one-dimensional")
        n = samples.size - 1
        if n < MIN_GRID or n % 2:
            raise InvalidInputError(f"grid_count must be even and >= {MIN_GRID}, got {n}")
        if not np.all(np.isfinite(samples)):
            raise InvalidInputError("history samples must be finite")
        if self.left_limit is not None and not np.isfinite(self.left_limit):
            raise InvalidInputError("left_limit must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        knots = np.linspace(-1.0, 0.0, n + 1)
        object.__setattr__(self, "_spline", CubicSpline(knots, self.branch_samples))

    @classmethod
    def from_callable(cls, func: Callable[[np.ndarray], np.ndarray], grid_count: int = 200):
        s = np.linspace(-1.0, 0.0, grid_count + 1)
        return cls(np.broadcast_to(np.asarray(func(s), dtype=float), s.shape))

    @classmethod
    def constant(cls, value: float, grid_count: int = 200):
        return cls(np.full(grid_count + 1, float(value)))

    @classmethod
    def jump(cls, value: float, grid_count: int = 200, before: float = 0.0):
        """History equal to ``before`` on [-1, 0) and ``value`` at 0."""
        samples = np.full(grid_count + 1, float(before))
        samples[-1] = value
        return cls(samples, left_limit=float(before))

    @property
    def grid_count(self) -> int:
        return self.samples.size - 1

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(-1.0, 0.0, self.grid_count + 1)

    @property
    def branch_samples(self) -> np.ndarray:
        """Samples of the continuous branch on [-1, 0) (left limit at 0)."""
        if self.left_limit is None:
            return self.samples
        out = self.samples.copy()
        out[-1] = self.left_limit
        return out

    @property
    def is_continuous(self) -> bool:
        return self.left_limit is None or self.left_limit == self.samples[-1]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if np.any((s < -1.0 - 1e-12) | (s > 1e-12)):
            raise InvalidInputError("history evaluated outside [-1, 0]")
        out = self._spline(s)
        if self.left_limit is not None:
            out = np.where(s >= 0.0, self.samples[-1], out)
        return out[()] if out.ndim == 0 else out

    def derivative(self, s):
        return self._spline(np.asarray(s, dtype=float), 1)

    def integral(self) -> float:
        """Simpson quadrature of phi over [-1, 0]."""
        return _simpson(self.branch_samples, 1.0 / self.grid_count)

    def segment_integral(self, a: float, b: float) -> float:
        """Exact integral of the spline branch over [a, b] within [-1, 0]."""
        return float(self._spline.integrate(a, b))

    def resample(self, grid_count: int) -> "HistoryFunction":
        if grid_count == self.grid_count:
            return self
        s = np.linspace(-1.0, 0.0, grid_count + 1)
        samples = self._spline(s)
        samples[-1] = self.samples[-1]
        return HistoryFunction(samples, left_limit=None if self.left_limit is None
                               else float(self._spline(0.0)))


def _as_history(phi) -> HistoryFunction:
    if isinstance(phi, HistoryFunction):
        return phi
    raise InvalidInputError(f"expected HistoryFunction, got {type(phi).__name__}")


def rhs(phi: HistoryFunction, params: ModelParams) -> float:
    """Right-hand side ``f(phi)`` of the delayed logistic equation."""
    phi = _as_history(phi)
    rho = params.rho
    x0 = phi.samples[-1]
    x1 = phi.samples[0]
    return -rho * x0 + rho * x1 * (2.0 - rho * phi.integral() - x0)


def theta(phi: HistoryFunction, params: ModelParams) -> float:
    """Total cell density ``phi(0) + rho * int phi``."""
    phi = _as_history(phi)
    return phi.samples[-1] + params.rho * phi.integral()


def in_omega(phi: HistoryFunction, params: ModelParams, tol: float = OMEGA_TOL) -> bool:
    """Feasible-set membership: nonnegative samples and ``theta <= 1``."""
    phi = _as_history(phi)
    if np.any(phi.samples < 0) or (phi.left_limit is not None and phi.left_limit < 0):
        return False
    return bool(theta(phi, params) <= 1.0 + tol)


def equilibria(params: ModelParams) -> tuple[float, float]:
    return 0.0, params.x_star


def equilibrium_history(params: ModelParams, which: str = "star", grid_count: int = 200):
    value = params.x_star if which == "star" else 0.0
    return HistoryFunction.constant(value, grid_count)


def lipschitz_bound(M: float, params: ModelParams) -> float:
    """Lipschitz constant of ``f`` on the sup-norm ball of radius ``M``."""
    if not M > 0:
        raise InvalidInputError("M must be positive")
    rho = params.rho
    return 3.0 * rho + M * (2.0 * rho ** 2 + 2.0 * rho)
