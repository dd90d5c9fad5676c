"""Time integration, equilibria, eigenvalues and periodic orbits."""

from .equilibria import EquilibriumResult, SingularJacobianError, find_equilibrium
from .integrate import IntegrationError, IntegratorConfig, Trajectory, integrate, section_crossings
from .linalg import EigenvalueError, eigenpair_residuals, eigenvalues
from .orbits import (
    NotPeriodicError,
    OrbitError,
    PeriodicOrbit,
    find_periodic_orbit,
    floquet_multipliers,
    nontrivial_multipliers,
    stability_verdict,
)
from .simulate import convert_trajectory, simulate

__all__ = [
    "EigenvalueError",
    "EquilibriumResult",
    "IntegrationError",
    "IntegratorConfig",
    "NotPeriodicError",
    "OrbitError",
    "PeriodicOrbit",
    "SingularJacobianError",
    "Trajectory",
    "convert_trajectory",
    "eigenpair_residuals",
    "eigenvalues",
    "find_equilibrium",
    "find_periodic_orbit",
    "floquet_multipliers",
    "integrate",
    "nontrivial_multipliers",
    "section_crossings",
    "simulate",
    "stability_verdict",
]
