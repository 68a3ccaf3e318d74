"""Exact arithmetic backbone: rationals, sparse polynomials, rational
functions and series expansion of closed-form expressions."""

from .poly import Ring, Polynomial, poly_gcd
from .ratfun import RationalFunction, Divergent, DIVERGENT

__all__ = [
    "Ring",
    "Polynomial",
    "poly_gcd",
    "RationalFunction",
    "Divergent",
    "DIVERGENT",
]
