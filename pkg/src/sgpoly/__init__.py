"""Exact and extended-precision calculus for the symmetric self-similar
Laplacians on the Sierpinski gasket: monomial tables, polynomial
evaluation on refined meshes and the Neumann spectrum."""

from __future__ import annotations

from .errors import (
    ConvergenceError,
    DegeneracyError,
    DepthError,
    DomainError,
    MissingValueError,
    PrecisionError,
    RootNotFoundError,
    SGError,
)
from .geometry import Junction, LevelIndex, level_index
from .laplacian import (
    LaplacianParams,
    VertexMesh,
    derive_params,
    graph_laplacian,
    harmonic_extension,
    tilde_laplacian,
)
from .monomials import MonomialTable, build_table
from .polynomial import CoeffVector, child_coeffs, refine, refine_cells, rotate_coeffs, scale_coeffs
from .recurrence import fit_coefficients, recurrence_oracle
from .scalar import EXACT_BACKEND, Backend, parse_rational
from .spectrum import (
    branch_limits,
    decimate_down,
    decimation_map,
    level1_eigenvalues,
    level1_spectrum,
    neumann_eigenvalue,
    target_ratio,
)
from .analysis import RatioReport, SweepConfig, verify

__version__ = "0.1.0"

__all__ = [
    "Backend", "CoeffVector", "ConvergenceError", "DegeneracyError", "DepthError", "DomainError",
    "EXACT_BACKEND", "Junction", "LaplacianParams", "LevelIndex", "MissingValueError", "MonomialTable",
    "PrecisionError", "RatioReport", "RootNotFoundError", "SGError", "SweepConfig", "VertexMesh",
    "branch_limits", "build_table", "child_coeffs", "decimate_down", "decimation_map", "derive_params",
    "fit_coefficients", "graph_laplacian", "harmonic_extension", "level1_eigenvalues", "level1_spectrum",
    "level_index", "neumann_eigenvalue", "parse_rational", "recurrence_oracle", "refine", "refine_cells",
    "rotate_coeffs", "scale_coeffs", "target_ratio", "tilde_laplacian", "verify",
]
