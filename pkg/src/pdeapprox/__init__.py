"""Parabolic PDE approximations of large tridiagonal master equations.

A birth-death generator ``A_N`` is read as the discretisation of a PDE on
[0, 1], either with dynamic (Wentzell) boundary conditions or in divergence
form with Robin conditions.  The package assembles and solves both PDEs, the
ODE itself, and a Fourier solution for the symmetric voter model.
"""
from ._backend import BACKEND
from .coeffs import CoefficientField, TridiagonalSystem, build_matrix, check_column_sums
from .grid import GridFunction
from .models import ModelSpec, SisParams, VoterParams, delta_initial, sis_field, smooth_initial, voter_field
from .ode import StateVector, expm_oracle, gillespie, integrate
from .pde_dynamic import assemble_dynamic, solve_dynamic, truncation_residual
from .pde_robin import alpha_beta, assemble_robin, discrete_robin_system, solve_robin
from .spectral import find_eigenfrequencies, solve_spectral

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CoefficientField", "TridiagonalSystem", "build_matrix", "check_column_sums",
    "GridFunction", "ModelSpec", "SisParams", "VoterParams", "delta_initial", "sis_field",
    "smooth_initial", "voter_field", "StateVector", "expm_oracle", "gillespie", "integrate",
    "assemble_dynamic", "solve_dynamic", "truncation_residual", "alpha_beta", "assemble_robin",
    "discrete_robin_system", "solve_robin", "find_eigenfrequencies", "solve_spectral",
]
