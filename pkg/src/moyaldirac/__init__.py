"""Exact extended-phase-space algebra: brackets, Hamiltonian lifts, the Dirac
constraint algorithm for hbar-dependent constraints, and Wigner-grid checks."""

from .algebra import (
    AlgebraError,
    ContextMismatchError,
    GradedPolynomial,
    RationalFunction,
    SymplecticContext,
    Variable,
    VarKind,
    format_canonical,
)
from .parsing import ParseError, parse
from .scalar import Scalar

__version__ = "0.1.0"

__all__ = [
    "AlgebraError",
    "ContextMismatchError",
    "GradedPolynomial",
    "ParseError",
    "RationalFunction",
    "Scalar",
    "SymplecticContext",
    "Variable",
    "VarKind",
    "format_canonical",
    "parse",
]
