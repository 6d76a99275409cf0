"""Spectral verification of the geometric-momentum operator algebra on the 2-sphere."""
from .grid import (
    GridFunction,
    ResolutionError,
    SpectralCoeffs,
    SphericalGrid,
    build_grid,
    default_grid,
    inner_product,
    sh_analyze,
    sh_synthesize,
    ylm,
)
from .matrices import OperatorMatrix, commutator, interior, matrix_exp, matrix_of
from .operators import (
    GmParams,
    SeparableFunction,
    SurfaceOperator,
    angular_momentum,
    apply,
    canonical_phi,
    canonical_theta,
    commutator_apply,
    geometric_momentum,
    hamiltonian_apply,
    make_operator,
    position,
)
from .results import CheckResult

__all__ = [
    "CheckResult",
    "GmParams",
    "GridFunction",
    "OperatorMatrix",
    "ResolutionError",
    "SeparableFunction",
    "SpectralCoeffs",
    "SphericalGrid",
    "SurfaceOperator",
    "angular_momentum",
    "apply",
    "build_grid",
    "canonical_phi",
    "canonical_theta",
    "commutator",
    "commutator_apply",
    "default_grid",
    "geometric_momentum",
    "hamiltonian_apply",
    "inner_product",
    "interior",
    "make_operator",
    "matrix_exp",
    "matrix_of",
    "position",
    "sh_analyze",
    "sh_synthesize",
    "ylm",
]

__version__ = "0.1.0"
