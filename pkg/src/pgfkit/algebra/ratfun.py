"""Reduced rational functions over the polynomial ring.

Canonical form: gcd(num, den) is a unit, and the denominator is scaled to be
integer-primitive with a positive coefficient on its grlex-lowest monomial
(the leading term of its power-series reading).  With that scaling the pair
(num, den) is unique, so structural equality coincides with mathematical
equality, and PGF denominators keep their natural shape (``2 - C`` rather
than ``C - 2``).

Evaluation at the all-ones point substitutes the chosen indeterminates one at
a time in ring order.  ``Divergent`` is an ordinary value, not an error: a
vanishing denominator with a nonvanishing numerator reports divergence.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from ..errors import DivisionByZero, SubstitutionPole
from .poly import (
    Polynomial,
    Ring,
    exact_div,
    normalize_primitive,
    poly_gcd,
    rational_content,
)


class Divergent:
    """Singleton marker for an evaluation that leaves every finite value."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Divergent"

    def __str__(self):
        return "Divergent"


DIVERGENT = Divergent()


class RationalFunction:
    """Quotient of two polynomials in reduced canonical form."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Polynomial, den: Polynomial, *, _canonical: bool = False):
        if den.is_zero():
            raise DivisionByZero("zero denominator")
        if not _canonical:
            num, den = _reduce(num, den)
        self.num = num
        self.den = den
        self._hash = None

    @property
    def ring(self) -> Ring:
        return self.num.ring

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_polynomial(p: Polynomial) -> "RationalFunction":
        return RationalFunction(p, Polynomial.one(p.ring), _canonical=True)

    @staticmethod
    def const(ring: Ring, value) -> "RationalFunction":
        return RationalFunction.from_polynomial(Polynomial.const(ring, value))

    @staticmethod
    def symbol(ring: Ring, name: str, power: int = 1) -> "RationalFunction":
        return RationalFunction.from_polynomial(Polynomial.symbol(ring, name, power))

    @staticmethod
    def zero(ring: Ring) -> "RationalFunction":
        return RationalFunction.const(ring, 0)

    @staticmethod
    def one(ring: Ring) -> "RationalFunction":
        return RationalFunction.const(ring, 1)

    # -- queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self == RationalFunction.one(self.ring)

    def is_polynomial(self) -> bool:
        return self.den == Polynomial.one(self.ring)

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def uses_only(self, allowed: Iterable[int]) -> bool:
        allowed = set(allowed)
        return self.num.uses_only(allowed) and self.den.uses_only(allowed)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den, _canonical=True)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        if other.is_zero():
            raise DivisionByZero("division by the zero function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def scale(self, value) -> "RationalFunction":
        return RationalFunction(self.num.scale(value), self.den, _canonical=Fraction(value) != 0)

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            if self.is_zero():
                raise DivisionByZero("negative power of zero")
            return RationalFunction(self.den ** (-n), self.num ** (-n))
        return RationalFunction(self.num ** n, self.den ** n)

    # -- calculus and substitution --------------------------------------

    def derivative(self, name: str, k: int = 1) -> "RationalFunction":
        """Exact k-th partial derivative with respect to a symbol."""
        if k < 0:
            raise ValueError("derivative order must be >= 0")
        i = self.ring.index(name)
        f = self
        for _ in range(k):
            num = f.num.derivative(i) * f.den - f.num * f.den.derivative(i)
            den = f.den * f.den
            f = RationalFunction(num, den)
        return f

    def substitute(self, bindings: Mapping[str, "RationalFunction"]) -> "RationalFunction":
        """Exact composition ``self(name := value, ...)`` applied at once."""
        if not bindings:
            return self
        ring = self.ring
        table = {ring.index(name): value for name, value in bindings.items()}
        num = _poly_substitute(self.num, table)
        den = _poly_substitute(self.den, table)
        if den.is_zero():
            raise SubstitutionPole("denominator vanished under substitution")
        return num / den

    def substitute_values(self, values: Mapping[str, Fraction]):
        """Evaluate symbols at rational points; Divergent when only the
        denominator vanishes.  A common zero raises SubstitutionPole since
        no finite reading exists without a limit direction."""
        ring = self.ring
        table = {ring.index(n): Fraction(v) for n, v in values.items()}
        num = self.num.substitute_values(table)
        den = self.den.substitute_values(table)
        if den.is_zero():
            if num.is_zero():
                raise SubstitutionPole("indeterminate 0/0 at the given point")
            return DIVERGENT
        return RationalFunction(num, den)

    def eval_at_one(self, names: Iterable[str]):
        """Substitute 1 for each named indeterminate, in ring order.

        Removable singularities are handled by factoring ``(x - 1)`` out of
        numerator and denominator; in reduced form at most one of the two can
        carry that factor, so a genuine 0/0 cannot survive reduction.
        """
        ring = self.ring
        targets = sorted(ring.index(n) for n in names)
        f = self
        for i in targets:
            f = _eval_one_symbol(f, i)
            if f is DIVERGENT:
                return DIVERGENT
        return f

    # -- structure -----------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RationalFunction)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __str__(self) -> str:
        return render_ratfun(self)

    def __repr__(self) -> str:
        return f"RationalFunction({self})"


def _reduce(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    if num.is_zero():
        return num, Polynomial.one(den.ring)
    g = poly_gcd(num, den)
    if not g.is_constant():
        num_q = exact_div(num, g)
        den_q = exact_div(den, g)
        assert num_q is not None and den_q is not None
        num, den = num_q, den_q
    # scale so the denominator is integer-primitive with positive lowest term
    content = rational_content(den)
    _, low = den.lowest_term()
    if low < 0:
        content = -content
    return num.scale(1 / content), den.scale(1 / content)


def _poly_substitute(p: Polynomial, table: Mapping[int, RationalFunction]) -> RationalFunction:
    ring = p.ring
    result = RationalFunction.zero(ring)
    for exps, coeff in p.sorted_terms():
        term = RationalFunction.const(ring, coeff)
        for i, e in enumerate(exps):
            if e == 0:
                continue
            if i in table:
                base = table[i]
            else:
                base = RationalFunction.symbol(ring, ring.symbols[i])
            term = term * (base ** e)
        result = result + term
    return result


def _eval_one_symbol(f: RationalFunction, i: int):
    ring = f.ring
    name = ring.symbols[i]
    factor = Polynomial.symbol(ring, name) - Polynomial.one(ring)
    num, den = f.num, f.den
    while True:
        num1 = num.substitute_values({i: Fraction(1)})
        den1 = den.substitute_values({i: Fraction(1)})
        if not den1.is_zero():
            return RationalFunction(num1, den1)
        if not num1.is_zero():
            return DIVERGENT
        # 0/0: remove one (x - 1) factor from each and retry
        num_q = exact_div(num, factor)
        den_q = exact_div(den, factor)
        if num_q is None or den_q is None:  # pragma: no cover - defensive
            return DIVERGENT
        num, den = num_q, den_q


# ---------------------------------------------------------------------------
# rendering


def _needs_parens(p: Polynomial) -> bool:
    if len(p.terms) != 1:
        return True
    _, coeff = p.lowest_term()
    return coeff < 0


def render_ratfun(f: RationalFunction) -> str:
    from .poly import render_poly

    num_s = render_poly(f.num)
    if f.is_polynomial():
        return num_s
    if _needs_parens(f.num):
        num_s = f"({num_s})"
    den_s = render_poly(f.den)
    lead_exps, lead_coeff = f.den.lowest_term()
    simple = len(f.den.terms) == 1 and lead_coeff == 1 and sum(lead_exps) <= 1
    if not simple:
        den_s = f"({den_s})"
    return f"{num_s} / {den_s}"
