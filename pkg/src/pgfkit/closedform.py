"""Guard filters and assignment transformers evaluated directly on
closed-form PGFs, without expanding into series.

The constructions are:

* affine assignment  ``x := c0 + sum(a_j v_j)``: multiply by X^c0, then
  substitute ``V -> V * X^a_j`` for the other variables and ``X -> X^a_x``
  for the target itself (``X -> 1`` when the target does not occur);
* truncated subtraction ``x := x - c``: keep the low slices where the
  result clamps to zero, shift the rest down by an exact rational-function
  division;
* value filters: the ``x = d`` slice of G is ``(1/d!) d^d G/dX^d |_{X=0}``
  times ``X^d``; ``x <= c`` sums slices, everything else goes through
  complements;
* residue filters ``x % m = c``: a roots-of-unity average computed in the
  quotient ring modulo the m-th cyclotomic polynomial, with an explicit
  check that the root terms cancel.

Every operation is validated elsewhere against the truncated engine; the
agreement suite in the tests is the authoritative oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .algebra.poly import Polynomial, Ring
from .algebra.ratfun import RationalFunction
from .errors import DivisionInexact, ExpansionPole, ResidueNotRational
from .lang.ast import (
    Atom,
    BoolLit,
    Declarations,
    Expr,
    Guard,
    GuardAnd,
    GuardNot,
    GuardOr,
    ModAtom,
)


@dataclass(frozen=True)
class ClosedPGF:
    """A PGF candidate in closed form: a rational function whose Taylor
    coefficients around the origin exist (denominator nonzero at 0)."""

    rf: RationalFunction
    decls: Declarations

    def __post_init__(self):
        ring = self.rf.ring
        at_zero = self.rf.den.substitute_values(
            {i: Fraction(0) for i in range(ring.nvars)}
        )
        if at_zero.is_zero():
            raise ExpansionPole("denominator vanishes at the origin")

    @property
    def ring(self) -> Ring:
        return self.rf.ring

    def indeterminate(self, var: str) -> str:
        return self.decls.indeterminates[self.decls.var_index(var)]

    def replace(self, rf: RationalFunction) -> "ClosedPGF":
        return ClosedPGF(rf, self.decls)

    def __str__(self):
        return str(self.rf)


# -- assignments ---------------------------------------------------------------


def assign_affine(g: ClosedPGF, target: str, expr: Expr) -> ClosedPGF:
    """Closed-form transformer of ``target := expr`` for affine expr."""
    if expr.monus:
        raise ValueError("affine assignment must be monus-free")
    ring = g.ring
    tname = g.indeterminate(target)
    target_sym = RationalFunction.symbol(ring, tname)
    coeffs = dict(expr.coeffs)
    a_target = coeffs.pop(target, 0)
    bindings: dict[str, RationalFunction] = {}
    for var, a in coeffs.items():
        if a == 0:
            continue
        vname = g.indeterminate(var)
        bindings[vname] = RationalFunction.symbol(ring, vname) * (target_sym ** a)
    bindings[tname] = (
        target_sym ** a_target if a_target else RationalFunction.one(ring)
    )
    result = g.rf.substitute(bindings)
    if expr.const:
        result = result * (target_sym ** expr.const)
    return g.replace(result)


def assign_monus(g: ClosedPGF, target: str, expr: Expr) -> ClosedPGF:
    """Closed-form transformer of ``target := affine - c`` (clamped at 0).

    The affine part is applied first; the truncated subtraction then shifts
    the target's own indeterminate down by ``c``, clamping the low slices.
    """
    staged = assign_affine(g, target, expr.affine_part())
    return _monus_shift(staged, target, expr.monus)


def _monus_shift(g: ClosedPGF, target: str, c: int) -> ClosedPGF:
    if c == 0:
        return g
    ring = g.ring
    tname = g.indeterminate(target)
    clamped = RationalFunction.zero(ring)
    kept = g.rf
    for d in range(c):
        slice_d = _slice(g.rf, ring, tname, d)
        kept = kept - slice_d
        clamped = clamped + slice_d.substitute_values({tname: Fraction(1)})
    if not isinstance(clamped, RationalFunction):  # pragma: no cover - defensive
        raise DivisionInexact("clamped slice failed to evaluate")
    shifted = kept / RationalFunction.symbol(ring, tname, c)
    at_zero = shifted.den.substitute_values({ring.index(tname): Fraction(0)})
    if at_zero.is_zero():
        raise DivisionInexact(
            f"remaining mass has {tname}-order below {c}; shift is inexact"
        )
    return g.replace(clamped + shifted)


# -- filters -------------------------------------------------------------------


def _slice(rf: RationalFunction, ring: Ring, name: str, d: int) -> RationalFunction:
    """The exact ``name = d`` slice: coefficient function times name^d."""
    i = ring.index(name)
    deriv = rf.derivative(name, d)
    num0 = deriv.num.substitute_values({i: Fraction(0)})
    den0 = deriv.den.substitute_values({i: Fraction(0)})
    coeff = RationalFunction(num0, den0).scale(Fraction(1, math.factorial(d)))
    return coeff * RationalFunction.symbol(ring, name, d) if d else coeff


def filter_eq(g: ClosedPGF, var: str, value: int) -> ClosedPGF:
    return g.replace(_slice(g.rf, g.ring, g.indeterminate(var), value))


def filter_le(g: ClosedPGF, var: str, bound: int) -> ClosedPGF:
    ring = g.ring
    name = g.indeterminate(var)
    total = RationalFunction.zero(ring)
    for d in range(bound + 1):
        total = total + _slice(g.rf, ring, name, d)
    return g.replace(total)


def filter_mod(g: ClosedPGF, var: str, modulus: int, residue: int) -> ClosedPGF:
    """Keep the terms with ``var % modulus = residue`` via a roots-of-unity
    average in the cyclotomic quotient ring."""
    if modulus < 1 or not (0 <= residue < modulus):
        raise ValueError("bad residue filter")
    if modulus == 1:
        return g
    ring = g.ring
    ctx = CyclotomicContext(modulus, ring)
    i = ring.index(g.indeterminate(var))
    rotations_num = [ctx.rotate(g.rf.num, i, j) for j in range(modulus)]
    rotations_den = [ctx.rotate(g.rf.den, i, j) for j in range(modulus)]
    denominator = ctx.one()
    for q in rotations_den:
        denominator = ctx.mul(denominator, q)
    numerator = ctx.zero()
    for j in range(modulus):
        term = ctx.root_power(-j * residue)
        term = ctx.mul(term, rotations_num[j])
        for k in range(modulus):
            if k != j:
                term = ctx.mul(term, rotations_den[k])
        numerator = ctx.add(numerator, term)
    num_poly = ctx.extract_rational(numerator)
    den_poly = ctx.extract_rational(denominator)
    result = RationalFunction(num_poly, den_poly).scale(Fraction(1, modulus))
    return g.replace(result)


def filter_atom(g: ClosedPGF, atom: Atom | ModAtom) -> ClosedPGF:
    if isinstance(atom, ModAtom):
        return filter_mod(g, atom.var, atom.modulus, atom.residue)
    op, c = atom.op, atom.const
    if op == "<=":
        return filter_le(g, atom.var, c)
    if op == "<":
        if c == 0:
            return g.replace(RationalFunction.zero(g.ring))
        return filter_le(g, atom.var, c - 1)
    if op == "=":
        return filter_eq(g, atom.var, c)
    if op == "!=":
        return g.replace(g.rf - filter_eq(g, atom.var, c).rf)
    if op == ">=":
        if c == 0:
            return g
        return g.replace(g.rf - filter_le(g, atom.var, c - 1).rf)
    if op == ">":
        return g.replace(g.rf - filter_le(g, atom.var, c).rf)
    raise ValueError(f"unknown comparison {op!r}")


def filter_guard(g: ClosedPGF, guard: Guard) -> ClosedPGF:
    """Boolean closure: conjunction by sequential filtering, disjunction by
    inclusion-exclusion, negation by complement."""
    if isinstance(guard, BoolLit):
        return g if guard.value else g.replace(RationalFunction.zero(g.ring))
    if isinstance(guard, (Atom, ModAtom)):
        return filter_atom(g, guard)
    if isinstance(guard, GuardNot):
        return g.replace(g.rf - filter_guard(g, guard.arg).rf)
    if isinstance(guard, GuardAnd):
        return filter_guard(filter_guard(g, guard.left), guard.right)
    if isinstance(guard, GuardOr):
        left = filter_guard(g, guard.left)
        right = filter_guard(g, guard.right)
        both = filter_guard(left, guard.right)
        return g.replace(left.rf + right.rf - both.rf)
    raise TypeError(guard)


# -- cyclotomic quotient ring -----------------------------------------------------


def cyclotomic_polynomial(m: int) -> list[int]:
    """Integer coefficients of the m-th cyclotomic polynomial, low to high."""

    def poly_div_exact(a: list[int], b: list[int]) -> list[int]:
        a = list(a)
        out = [0] * (len(a) - len(b) + 1)
        while len(a) >= len(b) and any(a):
            shift = len(a) - len(b)
            factor = a[-1] // b[-1]
            out[shift] = factor
            for i, coeff in enumerate(b):
                a[shift + i] -= factor * coeff
            while a and a[-1] == 0:
                a.pop()
        assert not any(a), "inexact cyclotomic division"
        return out

    result = [-1] + [0] * (m - 1) + [1]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            result = poly_div_exact(result, cyclotomic_polynomial(d))
    return result


class CyclotomicContext:
    """Arithmetic in Q(params)[vars][w] / (Phi_m(w)).

    Elements are coefficient lists in the root-of-unity power w^k for
    k < deg(Phi_m), with Polynomial entries.  Only ring operations are
    needed; the final results must reduce to root-free values.
    """

    def __init__(self, m: int, ring: Ring):
        self.m = m
        self.ring = ring
        self.phi = cyclotomic_polynomial(m)
        self.degree = len(self.phi) - 1
        # w^k for all k < m, reduced modulo Phi_m
        self._powers: list[list[Polynomial]] = []
        current = self.one()
        for _ in range(m):
            self._powers.append(current)
            current = self._mul_by_root(current)

    def zero(self) -> list[Polynomial]:
        return [Polynomial.zero(self.ring) for _ in range(self.degree)]

    def one(self) -> list[Polynomial]:
        el = self.zero()
        el[0] = Polynomial.one(self.ring)
        return el

    def root_power(self, k: int) -> list[Polynomial]:
        return list(self._powers[k % self.m])

    def add(self, a: list[Polynomial], b: list[Polynomial]) -> list[Polynomial]:
        return [x + y for x, y in zip(a, b)]

    def _mul_by_root(self, a: list[Polynomial]) -> list[Polynomial]:
        shifted = [Polynomial.zero(self.ring)] + list(a)
        return self._reduce(shifted)

    def _reduce(self, coeffs: list[Polynomial]) -> list[Polynomial]:
        coeffs = list(coeffs)
        while len(coeffs) > self.degree:
            top = coeffs.pop()
            if top.is_zero():
                continue
            # subtract top * w^(len) == top * (-(Phi - lead)) shifted
            offset = len(coeffs) - self.degree
            for i in range(self.degree):
                coeffs[offset + i] = coeffs[offset + i] - top.scale(self.phi[i])
        while len(coeffs) < self.degree:
            coeffs.append(Polynomial.zero(self.ring))
        return coeffs

    def mul(self, a: list[Polynomial], b: list[Polynomial]) -> list[Polynomial]:
        size = 2 * self.degree - 1
        prod = [Polynomial.zero(self.ring) for _ in range(max(size, self.degree))]
        for i, x in enumerate(a):
            if x.is_zero():
                continue
            for j, y in enumerate(b):
                if y.is_zero():
                    continue
                prod[i + j] = prod[i + j] + x * y
        return self._reduce(prod)

    def rotate(self, p: Polynomial, sym_index: int, j: int) -> list[Polynomial]:
        """Substitute ``X -> w^j X`` for the symbol at ``sym_index``."""
        out = self.zero()
        for exps, c in p.terms.items():
            power = (j * exps[sym_index]) % self.m
            mono = Polynomial.monomial(self.ring, exps, c)
            root = self._powers[power]
            for k in range(self.degree):
                if not root[k].is_zero():
                    out[k] = out[k] + mono * root[k]
        return out

    def extract_rational(self, a: list[Polynomial]) -> Polynomial:
        if any(not c.is_zero() for c in a[1:]):
            raise ResidueNotRational(
                "root-of-unity terms failed to cancel in a residue filter"
            )
        return a[0]
