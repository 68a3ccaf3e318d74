"""Truncated formal power series: the finite, exact value space of the
semantics engine.

A series stores coefficients for program-variable monomials inside a
per-variable bound box.  Coefficients are rational functions in the
parameter symbols only; exponents of program variables live in the monomial
key.  Mass that an operation pushes beyond the box is accumulated in
``lost`` instead of being dropped, so mass accounting survives truncation:
for ground inputs, true mass <= stored mass + lost mass.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .algebra.poly import Polynomial, Ring, grlex_key
from .algebra.ratfun import RationalFunction
from .errors import BoundsMismatch, SymbolicIncomparable

VarExps = tuple[int, ...]


class TruncatedSeries:
    """Sparse map from program-variable exponent tuples to coefficients."""

    __slots__ = ("ring", "bounds", "coeffs", "lost")

    def __init__(
        self,
        ring: Ring,
        bounds: tuple[int, ...],
        coeffs: Mapping[VarExps, RationalFunction] | None = None,
        lost: RationalFunction | None = None,
    ):
        if len(bounds) != ring.nvars:
            raise ValueError("bounds vector must match the program variables")
        self.ring = ring
        self.bounds = tuple(bounds)
        cleaned: dict[VarExps, RationalFunction] = {}
        if coeffs:
            for exps, c in coeffs.items():
                if c.is_zero():
                    continue
                if any(e > b for e, b in zip(exps, self.bounds)):
                    raise ValueError(f"monomial {exps} outside bounds {self.bounds}")
                cleaned[tuple(exps)] = c
        self.coeffs = cleaned
        self.lost = lost if lost is not None else RationalFunction.zero(ring)

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(ring: Ring, bounds: tuple[int, ...]) -> "TruncatedSeries":
        return TruncatedSeries(ring, bounds)

    @staticmethod
    def monomial(
        ring: Ring, bounds: tuple[int, ...], exps: VarExps, coeff=1
    ) -> "TruncatedSeries":
        c = coeff if isinstance(coeff, RationalFunction) else RationalFunction.const(ring, coeff)
        return TruncatedSeries(ring, bounds, {tuple(exps): c})

    @staticmethod
    def from_polynomial(p: Polynomial, bounds: tuple[int, ...]) -> "TruncatedSeries":
        """Split a polynomial into variable monomials and parameter
        coefficients; raises if a term exceeds the bounds."""
        ring = p.ring
        nv = ring.nvars
        coeffs: dict[VarExps, RationalFunction] = {}
        for exps, c in p.terms.items():
            var_part = exps[:nv]
            par_part = (0,) * nv + exps[nv:]
            coeff = RationalFunction.from_polynomial(Polynomial.monomial(ring, par_part, c))
            prev = coeffs.get(var_part)
            coeffs[var_part] = coeff if prev is None else prev + coeff
        return TruncatedSeries(ring, bounds, coeffs)

    # -- queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, exps: VarExps) -> RationalFunction:
        return self.coeffs.get(tuple(exps), RationalFunction.zero(self.ring))

    def sorted_terms(self) -> list[tuple[VarExps, RationalFunction]]:
        return sorted(self.coeffs.items(), key=lambda t: grlex_key(t[0]))

    def mass(self) -> RationalFunction:
        """Sum of stored coefficients; excludes lost mass (reported apart)."""
        total = RationalFunction.zero(self.ring)
        for c in self.coeffs.values():
            total = total + c
        return total

    def to_polynomial(self) -> Polynomial:
        """Exact polynomial view (coefficients must be polynomial)."""
        ring = self.ring
        result = Polynomial.zero(ring)
        for exps, c in self.coeffs.items():
            if not c.is_polynomial():
                raise ValueError("coefficient is not polynomial")
            mono = Polynomial.monomial(ring, exps + (0,) * len(ring.parameters))
            result = result + mono * c.num
        return result

    def _check_compatible(self, other: "TruncatedSeries") -> None:
        if self.ring != other.ring:
            raise BoundsMismatch("series over different rings")
        if self.bounds != other.bounds:
            raise BoundsMismatch(f"bounds differ: {self.bounds} vs {other.bounds}")

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_compatible(other)
        coeffs = dict(self.coeffs)
        for exps, c in other.coeffs.items():
            prev = coeffs.get(exps)
            s = c if prev is None else prev + c
            if s.is_zero():
                coeffs.pop(exps, None)
            else:
                coeffs[exps] = s
        return TruncatedSeries(self.ring, self.bounds, coeffs, self.lost + other.lost)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + other.scale_rf(RationalFunction.const(self.ring, -1))

    def scale_rf(self, r: RationalFunction) -> "TruncatedSeries":
        if r.is_zero():
            return TruncatedSeries.zero(self.ring, self.bounds)
        return TruncatedSeries(
            self.ring,
            self.bounds,
            {e: c * r for e, c in self.coeffs.items()},
            self.lost * r,
        )

    def scale(self, value) -> "TruncatedSeries":
        return self.scale_rf(RationalFunction.const(self.ring, value))

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        """Cauchy product; overflowing products feed the lost accumulator."""
        self._check_compatible(other)
        ring = self.ring
        coeffs: dict[VarExps, RationalFunction] = {}
        overflow = RationalFunction.zero(ring)
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                prod = ca * cb
                if any(x > b for x, b in zip(e, self.bounds)):
                    overflow = overflow + prod
                    continue
                prev = coeffs.get(e)
                s = prod if prev is None else prev + prod
                if s.is_zero():
                    coeffs.pop(e, None)
                else:
                    coeffs[e] = s
        lost = overflow + self.lost * (other.mass() + other.lost) + self.mass() * other.lost
        return TruncatedSeries(ring, self.bounds, coeffs, lost)

    def restrict(self, keep: Callable[[VarExps], bool]) -> "TruncatedSeries":
        """Keep the coefficients whose state satisfies the predicate.

        The lost accumulator is carried over unchanged, matching the
        contract that restriction touches stored coefficients only.
        """
        coeffs = {e: c for e, c in self.coeffs.items() if keep(e)}
        return TruncatedSeries(self.ring, self.bounds, coeffs, self.lost)

    def drop_lost(self) -> "TruncatedSeries":
        return TruncatedSeries(self.ring, self.bounds, self.coeffs, None)

    def with_bounds(self, bounds: tuple[int, ...]) -> "TruncatedSeries":
        """Re-box the series; every stored monomial must fit the new box."""
        return TruncatedSeries(self.ring, bounds, self.coeffs, self.lost)

    # -- comparison ---------------------------------------------------------

    def series_le(
        self, other: "TruncatedSeries", valuation: Mapping[str, Fraction] | None = None
    ):
        """Coefficient-wise <= over the shared box.

        Returns ``(True, None)`` or ``(False, witness_monomial)``.  Symbolic
        coefficients need a parameter valuation to become comparable.
        """
        self._check_compatible(other)
        keys = sorted(set(self.coeffs) | set(other.coeffs), key=grlex_key)
        for exps in keys:
            a = _ground(self.coefficient(exps), valuation)
            b = _ground(other.coefficient(exps), valuation)
            if a > b:
                return False, exps
        return True, None

    # -- structure ------------------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TruncatedSeries)
            and self.ring == other.ring
            and self.bounds == other.bounds
            and self.coeffs == other.coeffs
            and self.lost == other.lost
        )

    def __hash__(self):
        return hash((self.ring, self.bounds, tuple(self.sorted_terms()), self.lost))

    def __str__(self) -> str:
        return render_series(self)

    def __repr__(self) -> str:
        return f"TruncatedSeries({self})"

    def to_json(self) -> dict:
        terms = []
        for exps, c in self.sorted_terms():
            sparse = {
                self.ring.variables[i].lower(): e
                for i, e in enumerate(exps)
                if e > 0
            }
            terms.append({"exps": sparse, "coeff": str(c)})
        return {"terms": terms, "lost_mass": str(self.lost)}


def _ground(c: RationalFunction, valuation: Mapping[str, Fraction] | None) -> Fraction:
    if valuation:
        c = c.substitute_values({k: Fraction(v) for k, v in valuation.items()})
        if isinstance(c, RationalFunction) and not c.is_constant():
            raise SymbolicIncomparable("valuation does not pin all parameters")
    if not isinstance(c, RationalFunction) or not c.is_constant():
        raise SymbolicIncomparable(
            "coefficients contain parameters; supply a valuation to compare"
        )
    return c.constant_value()


def render_series(f: TruncatedSeries) -> str:
    if f.is_zero():
        return "0"
    ring = f.ring
    pieces = []
    for exps, c in f.sorted_terms():
        factors = [
            ring.variables[i] if e == 1 else f"{ring.variables[i]}^{e}"
            for i, e in enumerate(exps)
            if e > 0
        ]
        mono = "*".join(factors)
        if not mono:
            pieces.append(str(c))
        elif c.is_one():
            pieces.append(mono)
        else:
            cs = str(c)
            if " " in cs:
                cs = f"({cs})"
            pieces.append(f"{cs}*{mono}")
    return " + ".join(pieces)
