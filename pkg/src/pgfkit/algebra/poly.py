"""Sparse multivariate polynomials over the rationals.

Conventions used throughout the package:

* A ``Ring`` fixes the symbol universe once: program indeterminates first
  (in declaration order, rendered uppercase), then parameter symbols.  The
  position in that list is the global indeterminate numbering.
* A monomial is a dense exponent tuple aligned with ``ring.symbols``;
  the sparse "no zero exponents" view only appears in renderings and JSON.
* The monomial order is graded lexicographic on that numbering.  "Lowest"
  and "highest" below always refer to this order.  Sign normalisation of
  canonical forms uses the *lowest* monomial, which is the leading term of
  the power-series reading of a polynomial (so ``2 - C`` stays ``2 - C``).

Coefficients are ``fractions.Fraction`` values: exact, arbitrary precision,
already canonical, so there is nothing to re-implement for the scalar layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

Exponents = tuple[int, ...]

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class Ring:
    """Symbol universe: program indeterminates plus parameter symbols."""

    variables: tuple[str, ...]
    parameters: tuple[str, ...] = ()

    def __post_init__(self):
        names = self.variables + self.parameters
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol in ring: {names}")

    @property
    def symbols(self) -> tuple[str, ...]:
        return self.variables + self.parameters

    @property
    def nsyms(self) -> int:
        return len(self.variables) + len(self.parameters)

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        try:
            return self.symbols.index(name)
        except ValueError:
            raise KeyError(f"unknown symbol {name!r} in ring {self.symbols}")

    def is_parameter_index(self, i: int) -> bool:
        return i >= self.nvars

    def zero_exps(self) -> Exponents:
        return (0,) * self.nsyms


def grlex_key(exps: Exponents) -> tuple[int, Exponents]:
    """Sort key of the graded monomial order used everywhere.

    Ascending order is: total degree first, then within a degree the
    lexicographically larger exponent vector first (so ``a*C`` sorts before
    ``b*C`` when ``a`` has the smaller symbol index).  The key's minimum is
    the series-leading (lowest) term; its maximum drives exact division.
    """
    return (sum(exps), tuple(-e for e in exps))


def mono_mul(a: Exponents, b: Exponents) -> Exponents:
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a: Exponents, b: Exponents) -> bool:
    """True iff monomial ``a`` divides ``b`` (componentwise <=)."""
    return all(x <= y for x, y in zip(a, b))


def mono_div(b: Exponents, a: Exponents) -> Exponents:
    return tuple(y - x for x, y in zip(a, b))


class Polynomial:
    """Immutable sparse polynomial with Fraction coefficients.

    ``terms`` maps exponent tuples to nonzero coefficients; the zero
    polynomial has no terms.  Equality is structural, which coincides with
    mathematical equality because the representation is canonical.
    """

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms: Mapping[Exponents, Fraction]):
        self.ring = ring
        self.terms = {e: c for e, c in terms.items() if c != 0}
        self._hash = None

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(ring: Ring) -> "Polynomial":
        return Polynomial(ring, {})

    @staticmethod
    def const(ring: Ring, value) -> "Polynomial":
        c = Fraction(value)
        if c == 0:
            return Polynomial.zero(ring)
        return Polynomial(ring, {ring.zero_exps(): c})

    @staticmethod
    def one(ring: Ring) -> "Polynomial":
        return Polynomial.const(ring, 1)

    @staticmethod
    def symbol(ring: Ring, name: str, power: int = 1) -> "Polynomial":
        exps = [0] * ring.nsyms
        exps[ring.index(name)] = power
        return Polynomial(ring, {tuple(exps): _ONE})

    @staticmethod
    def monomial(ring: Ring, exps: Exponents, coeff=1) -> "Polynomial":
        c = Fraction(coeff)
        if c == 0:
            return Polynomial.zero(ring)
        return Polynomial(ring, {tuple(exps): c})

    # -- basic queries -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exps) for exps in self.terms)

    def constant_value(self) -> Fraction:
        if self.is_zero():
            return _ZERO
        if not self.is_constant():
            raise ValueError(f"not a constant polynomial: {self}")
        return next(iter(self.terms.values()))

    def coefficient(self, exps: Exponents) -> Fraction:
        return self.terms.get(tuple(exps), _ZERO)

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=0)

    def used_symbols(self) -> set[int]:
        used: set[int] = set()
        for exps in self.terms:
            used.update(i for i, e in enumerate(exps) if e > 0)
        return used

    def uses_only(self, allowed: Iterable[int]) -> bool:
        return self.used_symbols() <= set(allowed)

    def sorted_terms(self) -> list[tuple[Exponents, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]))

    def lowest_term(self) -> tuple[Exponents, Fraction]:
        exps = min(self.terms, key=grlex_key)
        return exps, self.terms[exps]

    def highest_term(self) -> tuple[Exponents, Fraction]:
        exps = max(self.terms, key=grlex_key)
        return exps, self.terms[exps]

    # -- arithmetic ----------------------------------------------------

    def _check_ring(self, other: "Polynomial") -> None:
        if self.ring != other.ring:
            raise ValueError("polynomials from different rings")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check_ring(other)
        terms = dict(self.terms)
        for exps, c in other.terms.items():
            s = terms.get(exps, _ZERO) + c
            if s == 0:
                terms.pop(exps, None)
            else:
                terms[exps] = s
        return Polynomial(self.ring, terms)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        self._check_ring(other)
        terms: dict[Exponents, Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = mono_mul(ea, eb)
                s = terms.get(e, _ZERO) + ca * cb
                if s == 0:
                    terms.pop(e, None)
                else:
                    terms[e] = s
        return Polynomial(self.ring, terms)

    def scale(self, value) -> "Polynomial":
        c = Fraction(value)
        if c == 0:
            return Polynomial.zero(self.ring)
        return Polynomial(self.ring, {e: k * c for e, k in self.terms.items()})

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial.one(self.ring)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self, i: int) -> "Polynomial":
        terms: dict[Exponents, Fraction] = {}
        for exps, c in self.terms.items():
            e = exps[i]
            if e == 0:
                continue
            new = list(exps)
            new[i] = e - 1
            key = tuple(new)
            s = terms.get(key, _ZERO) + c * e
            if s == 0:
                terms.pop(key, None)
            else:
                terms[key] = s
        return Polynomial(self.ring, terms)

    def substitute_values(self, values: Mapping[int, Fraction]) -> "Polynomial":
        """Substitute rational values for the given symbol indices."""
        terms: dict[Exponents, Fraction] = {}
        for exps, c in self.terms.items():
            coeff = c
            new = list(exps)
            for i, v in values.items():
                e = exps[i]
                if e:
                    coeff *= Fraction(v) ** e
                    new[i] = 0
            if coeff == 0:
                continue
            key = tuple(new)
            s = terms.get(key, _ZERO) + coeff
            if s == 0:
                terms.pop(key, None)
            else:
                terms[key] = s
        return Polynomial(self.ring, terms)

    def shift_down(self, exps: Exponents) -> "Polynomial":
        """Exact division by the monomial ``exps``; requires divisibility."""
        terms: dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            if not mono_divides(exps, e):
                raise ValueError("monomial does not divide every term")
            terms[mono_div(e, exps)] = c
        return Polynomial(self.ring, terms)

    # -- structure -----------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.ring == other.ring
            and self.terms == other.terms
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring, tuple(self.sorted_terms())))
        return self._hash

    def __str__(self) -> str:
        return render_poly(self)

    def __repr__(self) -> str:
        return f"Polynomial({self})"


# ---------------------------------------------------------------------------
# rendering


def _render_monomial(ring: Ring, exps: Exponents) -> str:
    factors = []
    order = sorted(range(ring.nsyms), key=lambda i: ring.symbols[i].lower())
    for i in order:
        e = exps[i]
        if e == 0:
            continue
        name = ring.symbols[i]
        factors.append(name if e == 1 else f"{name}^{e}")
    return "*".join(factors)


def render_poly(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    pieces: list[str] = []
    for exps, coeff in p.sorted_terms():
        mono = _render_monomial(p.ring, exps)
        mag = abs(coeff)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if not pieces:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
    return " ".join(pieces)


# ---------------------------------------------------------------------------
# exact division and gcd


def exact_div(a: Polynomial, b: Polynomial) -> Polynomial | None:
    """Exact multivariate division ``a / b``; None when not divisible."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero():
        return a
    ring = a.ring
    lead_e, lead_c = b.highest_term()
    rem = dict(a.terms)
    quo: dict[Exponents, Fraction] = {}
    while rem:
        e = max(rem, key=grlex_key)
        c = rem[e]
        if not mono_divides(lead_e, e):
            return None
        qe = mono_div(e, lead_e)
        qc = c / lead_c
        quo[qe] = qc
        for be, bc in b.terms.items():
            key = mono_mul(qe, be)
            s = rem.get(key, _ZERO) - qc * bc
            if s == 0:
                rem.pop(key, None)
            else:
                rem[key] = s
    return Polynomial(ring, quo)


def rational_content(p: Polynomial) -> Fraction:
    """Positive rational c with p/c integer-coefficient and coprime."""
    if p.is_zero():
        return _ONE
    num_gcd = 0
    den_lcm = 1
    for c in p.terms.values():
        num_gcd = math.gcd(num_gcd, abs(c.numerator))
        den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
    return Fraction(num_gcd, den_lcm)


def normalize_primitive(p: Polynomial) -> Polynomial:
    """Scale to integer-primitive form with positive lowest coefficient."""
    if p.is_zero():
        return p
    content = rational_content(p)
    _, low = p.lowest_term()
    if low < 0:
        content = -content
    return p.scale(1 / content)


def _coeffs_in(p: Polynomial, main: int) -> dict[int, Polynomial]:
    """View ``p`` as a polynomial in symbol ``main``; coefficients keep the
    full ring with a zero exponent on ``main``."""
    buckets: dict[int, dict[Exponents, Fraction]] = {}
    for exps, c in p.terms.items():
        d = exps[main]
        rest = list(exps)
        rest[main] = 0
        buckets.setdefault(d, {})[tuple(rest)] = c
    return {d: Polynomial(p.ring, t) for d, t in buckets.items()}


def _from_coeffs(ring: Ring, main: int, coeffs: Mapping[int, Polynomial]) -> Polynomial:
    terms: dict[Exponents, Fraction] = {}
    for d, poly in coeffs.items():
        for exps, c in poly.terms.items():
            e = list(exps)
            e[main] += d
            terms[tuple(e)] = c
    return Polynomial(ring, terms)


def _pseudo_rem(a: dict[int, Polynomial], b: dict[int, Polynomial], ring: Ring) -> dict[int, Polynomial]:
    """Pseudo-remainder of dense-in-main coefficient maps (degrees as keys)."""
    da = max(a) if a else -1
    db = max(b)
    lb = b[db]
    rem = dict(a)
    k = da - db + 1
    while rem and max(rem) >= db:
        dr = max(rem)
        lr = rem[dr]
        # rem = lb*rem - lr*b*x^(dr-db)
        new: dict[int, Polynomial] = {}
        for d, c in rem.items():
            new[d] = c * lb
        for d, c in b.items():
            shifted = d + dr - db
            prev = new.get(shifted, Polynomial.zero(ring))
            val = prev - lr * c
            if val.is_zero():
                new.pop(shifted, None)
            else:
                new[shifted] = val
        new.pop(dr, None)
        rem = {d: c for d, c in new.items() if not c.is_zero()}
        k -= 1
    # normalise the pseudo factor so that the result equals lb^(da-db+1) * a mod b
    for _ in range(max(k, 0)):
        rem = {d: c * lb for d, c in rem.items()}
    return rem


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """GCD, primitive with positive lowest coefficient; gcd(0, b) = |b|."""
    if a.is_zero():
        return normalize_primitive(b)
    if b.is_zero():
        return normalize_primitive(a)
    if a.is_constant() or b.is_constant():
        return Polynomial.one(a.ring)

    ring = a.ring
    used = a.used_symbols() | b.used_symbols()
    main = min(used)

    if a.degree_in(main) == 0 or b.degree_in(main) == 0:
        # main occurs in only one argument: it cannot appear in the gcd
        small, big = (a, b) if a.degree_in(main) == 0 else (b, a)
        g = small
        for coeff in _coeffs_in(big, main).values():
            g = poly_gcd(g, coeff)
            if g.is_constant():
                return Polynomial.one(ring)
        return normalize_primitive(g)

    ca = _coeffs_in(a, main)
    cb = _coeffs_in(b, main)

    def content_of(cs: dict[int, Polynomial]) -> Polynomial:
        g = Polynomial.zero(ring)
        for c in cs.values():
            g = poly_gcd(g, c)
            if g.is_constant() and not g.is_zero():
                return Polynomial.one(ring)
        return g

    cont_a = content_of(ca)
    cont_b = content_of(cb)
    cont = poly_gcd(cont_a, cont_b)

    def divided(cs: dict[int, Polynomial], d: Polynomial) -> dict[int, Polynomial]:
        out = {}
        for k, c in cs.items():
            q = exact_div(c, d)
            assert q is not None, "content division must be exact"
            out[k] = q
        return out

    A = divided(ca, cont_a)
    B = divided(cb, cont_b)
    if max(A) < max(B):
        A, B = B, A

    # subresultant polynomial remainder sequence on the primitive parts
    g = Polynomial.one(ring)
    h = Polynomial.one(ring)
    while True:
        delta = max(A) - max(B)
        R = _pseudo_rem(A, B, ring)
        if not R:
            pp = _from_coeffs(ring, main, B)
            break
        if max(R) == 0:
            pp = Polynomial.one(ring)
            break
        divisor = g * (h ** delta)
        A = B
        B = divided(R, divisor)
        g = A[max(A)]
        if delta == 0:
            pass  # h unchanged
        elif delta == 1:
            h = g
        else:
            num = g ** delta
            q = exact_div(num, h ** (delta - 1))
            assert q is not None
            h = q
    if pp.is_constant():
        result = cont
    else:
        # strip remaining content of the PRS survivor
        pp_coeffs = _coeffs_in(pp, main)
        c = content_of(pp_coeffs)
        pp_primitive = _from_coeffs(ring, main, divided(pp_coeffs, c))
        result = cont * pp_primitive
    return normalize_primitive(result)
