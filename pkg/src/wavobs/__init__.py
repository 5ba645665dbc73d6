"""Boundary observability and HUM controls for spectral semi-discretizations
of the 1-D wave equation on (-1, 1)."""

from .assembly import Formulation, FormulationKind, SemiDiscreteSystem, assemble, energy
from .basis import BasisKind, QuadratureRule, basis_eval, gauss_legendre, legendre_eval, project
from .filters import Filter, FilterKind, filtered_observation_row, sigma
from .hum import ControlProblem, ControlResult, exact_example, solve_control
from .observability import (
    GramianResult,
    SpectrumReport,
    constants,
    gramian_chen,
    gramian_quadrature,
    spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "BasisKind",
    "ControlProblem",
    "ControlResult",
    "Filter",
    "FilterKind",
    "Formulation",
    "FormulationKind",
    "GramianResult",
    "QuadratureRule",
    "SemiDiscreteSystem",
    "SpectrumReport",
    "assemble",
    "basis_eval",
    "constants",
    "energy",
    "exact_example",
    "filtered_observation_row",
    "gauss_legendre",
    "gramian_chen",
    "gramian_quadrature",
    "legendre_eval",
    "project",
    "sigma",
    "solve_control",
    "spectrum",
]
