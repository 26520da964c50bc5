"""Q-operator kernels for C_n and D_n Toda chains: exact identities and wave-function numerics."""

from .laurent import (GaussianRational, LaurentPoly, PolyMatrix, RationalExpr,
                      cofactor_determinant, determinant, substitute, var)
from .reports import IdentityReport

__version__ = "0.1.0"

__all__ = [
    "GaussianRational",
    "LaurentPoly",
    "PolyMatrix",
    "RationalExpr",
    "IdentityReport",
    "cofactor_determinant",
    "determinant",
    "substitute",
    "var",
]
