"""Core numerics: Schatten norms, vector-valued elements, Schur symbols and experiments."""

from .errors import SchurLabError
from .hilbert import VectorFamily
from .schur import SchurSymbol, apply_multiplier
from .vector_valued import VectorValuedElement, rc_norm

__all__ = [
    "SchurLabError",
    "SchurSymbol",
    "VectorFamily",
    "VectorValuedElement",
    "apply_multiplier",
    "rc_norm",
]
