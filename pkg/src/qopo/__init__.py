"""Steady states, Wigner functions and non-Gaussianity of a degenerate parametric oscillator.

The oscillator has a two-photon pump ``h``, one-photon loss ``g``, two-photon
loss ``beta`` and an optional additive field ``F``; its Lindblad master
equation is solved in a truncated Fock basis.
"""

from .classical import ClassicalFixedPoint, fixed_points, integrate_meanfield, meanfield_rhs, saddle_node_field
from .gaussian import GaussianRef, MomentData, fit_gaussian, gaussian_state_matrix, moments, reference_state_matrix
from .liouvillian import LiouvillianMatrix, apply_liouvillian, build_liouvillian
from .metrics import MetricsRecord, compute_metrics
from .model import ModelParams, displacement_matrix, squeezing_matrix, validate_params
from .steady import DensityMatrix, SolverOptions, evolve_rk4, steady_state, tail_mass
from .wigner import WignerGrid, find_lobes, wigner_grid, wigner_point

__version__ = "0.1.0"

__all__ = [
    "ClassicalFixedPoint",
    "DensityMatrix",
    "GaussianRef",
    "LiouvillianMatrix",
    "MetricsRecord",
    "ModelParams",
    "MomentData",
    "SolverOptions",
    "WignerGrid",
    "apply_liouvillian",
    "build_liouvillian",
    "compute_metrics",
    "displacement_matrix",
    "evolve_rk4",
    "find_lobes",
    "fit_gaussian",
    "fixed_points",
    "gaussian_state_matrix",
    "integrate_meanfield",
    "meanfield_rhs",
    "moments",
    "reference_state_matrix",
    "saddle_node_field",
    "squeezing_matrix",
    "steady_state",
    "tail_mass",
    "validate_params",
    "wigner_grid",
    "wigner_point",
]
