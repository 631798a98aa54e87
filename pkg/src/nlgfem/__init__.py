"""Nonlocal diffusion solver with Gaussian kernels on unions of axis-aligned boxes."""

__version__ = "0.1.0"

from .analytic import KernelParams, double_gauss_poly, int_gauss_poly, phi
from .assembly import (assemble_load, assemble_stiffness, assemble_system,
                       interaction_stencil)
from .mesh import BoxDomain, build_mesh, named_domain
from .metrics import (ErrorReport, ManufacturedSolution, fit_rates, h1_error,
                      l2_error, manufactured_solution, recovery_errors)
from .poly1d import Poly1D, lagrange_factors
from .recovery import RecoveredField
from .sparse import CGResult, SparseSymMatrix, cg_solve

__all__ = [
    "BoxDomain", "CGResult", "ErrorReport", "KernelParams",
    "ManufacturedSolution", "Poly1D", "RecoveredField", "SparseSymMatrix",
    "__version__", "assemble_load", "assemble_stiffness", "assemble_system",
    "build_mesh", "cg_solve", "double_gauss_poly", "fit_rates", "h1_error",
    "int_gauss_poly", "interaction_stencil", "l2_error", "lagrange_factors",
    "manufactured_solution", "named_domain", "phi", "recovery_errors",
]
