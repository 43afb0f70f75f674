"""Simulation and analysis tools for the go-or-grow delayed logistic equation."""
from .model import (HistoryFunction, InvalidInputError, ModelParams, equilibria,
                    in_omega, lipschitz_bound, rhs, theta)
from .dde import (DiagnosticsSeries, IntegratorConfig, InvarianceViolation,
                  MeanFieldParams, Trajectory, integrate, mean_field_integrate,
                  persistence_floor, w_crosscheck)

__version__ = "0.1.0"
