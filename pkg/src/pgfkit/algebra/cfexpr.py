"""Closed-form expression trees and their exact truncated-series expansion.

A tree combines rational-function leaves with +, -, *, /, integer powers and
square roots.  Constructors fold: any subtree free of square roots collapses
to a single rational-function leaf, so ``to_rational`` is just a leaf test.

Expansion computes the exact Taylor coefficients (with respect to the
program indeterminates; parameters stay symbolic inside coefficients) up to
a per-variable bound box.  Divisions whose denominator vanishes at the
origin are supported when the denominator is a polynomial times a monomial
and the numerator's series is divisible by that monomial, which is what
quotients such as ``(1 - sqrt(1 - C^2))/C`` need.  Square roots expand by
Newton iteration; the result is verified by squaring before it is returned.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping

from ..errors import (
    DivisionByZero,
    ExpansionPole,
    NegativeLeadingTerm,
    NonSquareConstantTerm,
)
from ..fps import TruncatedSeries, VarExps
from .poly import Polynomial, Ring, grlex_key
from .ratfun import RationalFunction


class ClosedForm:
    """Base class; see the folding constructors below."""

    __slots__ = ()

    def is_rational(self) -> bool:
        return isinstance(self, CFRational)

    def to_rational(self) -> RationalFunction | None:
        return self.rf if isinstance(self, CFRational) else None


class CFRational(ClosedForm):
    __slots__ = ("rf",)

    def __init__(self, rf: RationalFunction):
        self.rf = rf

    def __repr__(self):
        return f"CFRational({self.rf})"


class CFBinary(ClosedForm):
    __slots__ = ("op", "left", "right")

    def __init__(self, op: str, left: ClosedForm, right: ClosedForm):
        self.op = op
        self.left = left
        self.right = right

    def __repr__(self):
        return f"({self.left!r} {self.op} {self.right!r})"


class CFPower(ClosedForm):
    __slots__ = ("base", "exponent")

    def __init__(self, base: ClosedForm, exponent: int):
        self.base = base
        self.exponent = exponent

    def __repr__(self):
        return f"({self.base!r})^{self.exponent}"


class CFSqrt(ClosedForm):
    __slots__ = ("arg",)

    def __init__(self, arg: ClosedForm):
        self.arg = arg

    def __repr__(self):
        return f"sqrt({self.arg!r})"


# -- folding constructors ----------------------------------------------------


def cf_rational(rf: RationalFunction) -> ClosedForm:
    return CFRational(rf)


def cf_const(ring: Ring, value) -> ClosedForm:
    return CFRational(RationalFunction.const(ring, value))


def cf_add(a: ClosedForm, b: ClosedForm) -> ClosedForm:
    if isinstance(a, CFRational) and isinstance(b, CFRational):
        return CFRational(a.rf + b.rf)
    return CFBinary("+", a, b)


def cf_sub(a: ClosedForm, b: ClosedForm) -> ClosedForm:
    if isinstance(a, CFRational) and isinstance(b, CFRational):
        return CFRational(a.rf - b.rf)
    return CFBinary("-", a, b)


def cf_mul(a: ClosedForm, b: ClosedForm) -> ClosedForm:
    if isinstance(a, CFRational) and isinstance(b, CFRational):
        return CFRational(a.rf * b.rf)
    return CFBinary("*", a, b)


def cf_div(a: ClosedForm, b: ClosedForm) -> ClosedForm:
    if isinstance(a, CFRational) and isinstance(b, CFRational):
        return CFRational(a.rf / b.rf)
    return CFBinary("/", a, b)


def cf_pow(base: ClosedForm, exponent: int) -> ClosedForm:
    if isinstance(base, CFRational):
        return CFRational(base.rf ** exponent)
    return CFPower(base, exponent)


def cf_sqrt(arg: ClosedForm) -> ClosedForm:
    return CFSqrt(arg)


def cf_render(cf: ClosedForm) -> str:
    if isinstance(cf, CFRational):
        return str(cf.rf)
    if isinstance(cf, CFBinary):
        return f"({cf_render(cf.left)} {cf.op} {cf_render(cf.right)})"
    if isinstance(cf, CFPower):
        return f"({cf_render(cf.base)})^{cf.exponent}"
    if isinstance(cf, CFSqrt):
        return f"sqrt({cf_render(cf.arg)})"
    raise TypeError(cf)


def cf_eval_point(cf: ClosedForm, values: Mapping[str, Fraction]):
    """Evaluate at a rational point.  Square roots must come out rational;
    the return value is Divergent when only a denominator vanishes."""
    from .ratfun import DIVERGENT

    if isinstance(cf, CFRational):
        return cf.rf.substitute_values(values)
    if isinstance(cf, CFBinary):
        a = cf_eval_point(cf.left, values)
        b = cf_eval_point(cf.right, values)
        if a is DIVERGENT or b is DIVERGENT:
            return DIVERGENT
        if cf.op == "+":
            return a + b
        if cf.op == "-":
            return a - b
        if cf.op == "*":
            return a * b
        if b.is_zero():
            return DIVERGENT if not a.is_zero() else DIVERGENT
        return a / b
    if isinstance(cf, CFPower):
        base = cf_eval_point(cf.base, values)
        if base is DIVERGENT:
            return DIVERGENT
        if cf.exponent < 0 and base.is_zero():
            return DIVERGENT
        return base ** cf.exponent
    if isinstance(cf, CFSqrt):
        arg = cf_eval_point(cf.arg, values)
        if arg is DIVERGENT:
            return DIVERGENT
        if not arg.is_constant():
            raise NonSquareConstantTerm("symbolic square root value")
        v = arg.constant_value()
        if v < 0:
            raise NegativeLeadingTerm("square root of a negative value")
        root = _rational_sqrt(v)
        if root is None:
            raise NonSquareConstantTerm(f"square root of {v} is irrational")
        return RationalFunction.const(arg.ring, root)
    raise TypeError(cf)


# ---------------------------------------------------------------------------
# expansion


def series_expand(cf: ClosedForm, ring: Ring, bounds: tuple[int, ...]) -> TruncatedSeries:
    """Exact multivariate Taylor coefficients of ``cf`` up to ``bounds``.

    The result's lost accumulator is zero: truncation at the box boundary is
    part of the contract here, not program mass loss.
    """
    result = _expand(cf, ring, tuple(bounds))
    return result.drop_lost()


def _expand(cf: ClosedForm, ring: Ring, bounds: tuple[int, ...]) -> TruncatedSeries:
    if isinstance(cf, CFRational):
        return _expand_ratfun(cf.rf, ring, bounds)
    if isinstance(cf, CFBinary):
        if cf.op == "+":
            return (_expand(cf.left, ring, bounds) + _expand(cf.right, ring, bounds)).drop_lost()
        if cf.op == "-":
            return (_expand(cf.left, ring, bounds) - _expand(cf.right, ring, bounds)).drop_lost()
        if cf.op == "*":
            return (_expand(cf.left, ring, bounds) * _expand(cf.right, ring, bounds)).drop_lost()
        return _expand_div(cf.left, cf.right, ring, bounds)
    if isinstance(cf, CFPower):
        n = cf.exponent
        if n < 0:
            one = cf_const(ring, 1)
            return _expand_div(one, CFPower(cf.base, -n), ring, bounds)
        result = _series_const(ring, bounds, Fraction(1))
        base = _expand(cf.base, ring, bounds)
        while n:
            if n & 1:
                result = (result * base).drop_lost()
            n >>= 1
            if n:
                base = (base * base).drop_lost()
        return result
    if isinstance(cf, CFSqrt):
        return _expand_sqrt(cf.arg, ring, bounds)
    raise TypeError(cf)


def _series_const(ring: Ring, bounds: tuple[int, ...], value: Fraction) -> TruncatedSeries:
    if value == 0:
        return TruncatedSeries.zero(ring, bounds)
    return TruncatedSeries.monomial(ring, bounds, (0,) * ring.nvars, value)


def _poly_series_clip(p: Polynomial, bounds: tuple[int, ...]) -> TruncatedSeries:
    """Polynomial to series, silently clipping terms beyond the box."""
    ring = p.ring
    nv = ring.nvars
    keep = {
        exps: c
        for exps, c in p.terms.items()
        if all(e <= b for e, b in zip(exps[:nv], bounds))
    }
    return TruncatedSeries.from_polynomial(Polynomial(ring, keep), bounds)


def _box_monomials(bounds: tuple[int, ...]) -> list[VarExps]:
    out: list[VarExps] = [()]
    for b in bounds:
        out = [e + (k,) for e in out for k in range(b + 1)]
    return sorted(out, key=grlex_key)


def _complete_division(
    num: TruncatedSeries, divisor_terms: dict[VarExps, RationalFunction], ring: Ring, bounds: tuple[int, ...]
) -> TruncatedSeries:
    """Solve divisor * q = num coefficient by coefficient in grlex order."""
    c0 = divisor_terms.get((0,) * ring.nvars)
    if c0 is None or c0.is_zero():
        raise ExpansionPole("denominator has no constant term at the origin")
    rest = {e: c for e, c in divisor_terms.items() if any(e)}
    quo: dict[VarExps, RationalFunction] = {}
    zero = RationalFunction.zero(ring)
    for sigma in _box_monomials(bounds):
        acc = num.coeffs.get(sigma, zero)
        for tau, c in rest.items():
            prev_key = tuple(s - t for s, t in zip(sigma, tau))
            if any(x < 0 for x in prev_key):
                continue
            q_prev = quo.get(prev_key)
            if q_prev is not None:
                acc = acc - c * q_prev
        if not acc.is_zero():
            quo[sigma] = acc / c0
    return TruncatedSeries(ring, bounds, quo)


def _expand_ratfun(rf: RationalFunction, ring: Ring, bounds: tuple[int, ...]) -> TruncatedSeries:
    num = _poly_series_clip(rf.num, bounds)
    if rf.is_polynomial():
        return num
    den = _poly_series_clip(rf.den, bounds)
    return _complete_division(num, den.coeffs, ring, bounds)


def _expand_div(
    num_cf: ClosedForm, den_cf: ClosedForm, ring: Ring, bounds: tuple[int, ...]
) -> TruncatedSeries:
    den_rf = den_cf.to_rational()
    if den_rf is not None:
        if den_rf.is_zero():
            raise DivisionByZero("division by the zero function")
        # a / (p/q) = (a*q) / p with polynomial p, q
        num_cf = cf_mul(num_cf, cf_rational(RationalFunction.from_polynomial(den_rf.den)))
        return _divide_by_polynomial(num_cf, den_rf.num, ring, bounds)
    # compound denominator: requires an invertible constant term
    den = _expand(den_cf, ring, bounds)
    num = _expand(num_cf, ring, bounds)
    return _complete_division(num, den.coeffs, ring, bounds)


def _divide_by_polynomial(
    num_cf: ClosedForm, p: Polynomial, ring: Ring, bounds: tuple[int, ...]
) -> TruncatedSeries:
    """Divide a closed form by polynomial ``p``; supports ``p`` that is a
    monomial shift of an origin-invertible polynomial."""
    if p.is_zero():
        raise DivisionByZero("division by the zero polynomial")
    nv = ring.nvars
    alpha = tuple(min(exps[i] for exps in p.terms) for i in range(nv))
    if any(alpha):
        shift_full = alpha + (0,) * len(ring.parameters)
        p = p.shift_down(shift_full)
    extended = tuple(b + a for b, a in zip(bounds, alpha))
    num = _expand(num_cf, ring, extended)
    if any(alpha):
        shifted: dict[VarExps, RationalFunction] = {}
        for exps, c in num.coeffs.items():
            if any(e < a for e, a in zip(exps, alpha)):
                raise ExpansionPole(
                    "numerator series is not divisible by the denominator monomial"
                )
            shifted[tuple(e - a for e, a in zip(exps, alpha))] = c
        num = TruncatedSeries(ring, bounds, shifted)
    den = _poly_series_clip(p, bounds)
    return _complete_division(num, den.coeffs, ring, bounds)


def _rational_sqrt(v: Fraction) -> Fraction | None:
    if v < 0:
        return None
    rn = math.isqrt(v.numerator)
    rd = math.isqrt(v.denominator)
    if rn * rn != v.numerator or rd * rd != v.denominator:
        return None
    return Fraction(rn, rd)


def _expand_sqrt(arg_cf: ClosedForm, ring: Ring, bounds: tuple[int, ...]) -> TruncatedSeries:
    u = _expand(arg_cf, ring, bounds)
    origin = (0,) * ring.nvars
    c0 = u.coeffs.get(origin)
    if c0 is None:
        raise NegativeLeadingTerm("square-root argument vanishes at the origin")
    if not c0.is_constant():
        raise NonSquareConstantTerm("square-root constant term is symbolic")
    v = c0.constant_value()
    if v <= 0:
        raise NegativeLeadingTerm(f"square-root constant term {v} is not positive")
    root = _rational_sqrt(v)
    if root is None:
        raise NonSquareConstantTerm(f"square root of {v} is irrational")
    y = _series_const(ring, bounds, root)
    # Newton steps double the correct order; the final square-back check is
    # the authoritative stop condition.
    max_steps = max(sum(bounds).bit_length() + 2, 4)
    for _ in range(max_steps):
        square = (y * y).drop_lost()
        if square == u:
            return y
        quotient = _complete_division(u, y.coeffs, ring, bounds)
        y = (y + quotient).scale(Fraction(1, 2))
    square = (y * y).drop_lost()
    if square != u:  # pragma: no cover - defensive
        raise NonSquareConstantTerm("Newton iteration failed to converge")
    return y
