"""Superinvariant checking for loops via candidate invariantlets.

An invariantlet defines a candidate loop overapproximation on monomials:
ordered rules guarded by conditions on the exponent vector, with closed-form
templates (exponent symbols may appear in powers, finite sums and
factorials).  Checking applies one loop unfolding to the candidate at every
exponent vector of a finite grid and compares, per point,

    <monomial>_{not guard}  +  sum of body-output coefficients
                               weighted through the candidate

against the candidate's own value at that point.  Rational sides are
compared exactly; square-root templates are compared coefficient-wise up to
a configurable series order.  The verdict names the grid: nothing beyond the
inspected exponent vectors is claimed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

from .algebra.cfexpr import (
    ClosedForm,
    cf_add,
    cf_const,
    cf_eval_point,
    cf_mul,
    cf_rational,
    cf_render,
    series_expand,
)
from .algebra.exprparse import eval_closed_form, eval_integer, parse_expression
from .algebra.poly import Polynomial, Ring, grlex_key
from .algebra.ratfun import DIVERGENT, RationalFunction
from .errors import NoRuleMatches, ParseError, SymbolicIncomparable
from .fps import TruncatedSeries
from .lang.ast import Declarations, While, make_ring
from .lang.guards import sat
from .semantics import EngineConfig, reach_bounds, transform

# -- candidate definition ------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    condition: object | None  # parsed condition; None is the catch-all
    condition_text: str
    template: object  # parsed expression AST
    template_text: str


@dataclass(frozen=True)
class Invariantlet:
    """Piecewise exponent-indexed definition of a candidate on monomials."""

    bindings: tuple[tuple[str, str], ...]  # (exponent symbol, program variable)
    rules: tuple[Rule, ...]
    decls: Declarations

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.bindings)

    def env_of_state(self, state: tuple[int, ...]) -> dict[str, int]:
        return {
            sym: state[self.decls.var_index(var)] for sym, var in self.bindings
        }

    def at(self, ring: Ring, env: Mapping[str, int]) -> ClosedForm:
        """Value on the monomial with the given exponents; first match wins."""
        for rule in self.rules:
            if rule.condition is None or _condition_holds(rule.condition, env):
                return eval_closed_form(rule.template, ring, env)
        raise NoRuleMatches(f"no rule covers exponents {dict(env)}")


# condition := 'true' | atom ('&' atom)* ;
# atom := linexpr cmp linexpr | symbol '%' nat '=' nat
_MOD_ATOM = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*%\s*(\d+)\s*=\s*(\d+)\s*$")
_CMP_SPLIT = re.compile(r"(<=|>=|!=|<|>|=)")


def _parse_condition(text: str):
    text = text.strip()
    if text == "true":
        return None
    atoms = []
    for piece in text.split("&"):
        m = _MOD_ATOM.match(piece)
        if m:
            sym, mod, res = m.group(1), int(m.group(2)), int(m.group(3))
            if mod < 1 or not (0 <= res < mod):
                raise ParseError(f"bad residue condition {piece.strip()!r}")
            atoms.append(("mod", sym, mod, res))
            continue
        parts = _CMP_SPLIT.split(piece)
        if len(parts) != 3:
            raise ParseError(f"bad rule condition {piece.strip()!r}")
        left, op, right = parts
        atoms.append(("cmp", parse_expression(left), op, parse_expression(right)))
    return tuple(atoms)


def _condition_holds(atoms, env: Mapping[str, int]) -> bool:
    for atom in atoms:
        if atom[0] == "mod":
            _, sym, mod, res = atom
            if sym not in env:
                raise ParseError(f"unknown exponent symbol {sym!r} in condition")
            if env[sym] % mod != res:
                return False
        else:
            _, left, op, right = atom
            a = eval_integer(left, env)
            b = eval_integer(right, env)
            ok = {
                "<": a < b,
                "<=": a <= b,
                "=": a == b,
                "!=": a != b,
                ">=": a >= b,
                ">": a > b,
            }[op]
            if not ok:
                return False
    return True


def parse_invariantlet(source: str, decls: Declarations) -> Invariantlet:
    """Parse the invariant-spec text format:

        exponents i -> x, j -> c;
        when i = 1 : C^(j+1) / (2 - C);
        when true  : X^i * C^j;

    Comment lines start with '#'.  Rules are ordered; conditions must cover
    every grid point that is ever evaluated.
    """
    body = "\n".join(
        line for line in source.splitlines() if not line.strip().startswith("#")
    )
    statements = [s.strip() for s in body.split(";") if s.strip()]
    if not statements or not statements[0].startswith("exponents"):
        raise ParseError("invariant spec must start with an 'exponents' line")
    bind_text = statements[0][len("exponents") :]
    bindings: list[tuple[str, str]] = []
    for piece in bind_text.split(","):
        m = re.match(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*->\s*([A-Za-z_][A-Za-z_0-9]*)\s*$", piece)
        if not m:
            raise ParseError(f"bad exponent binding {piece.strip()!r}")
        sym, var = m.group(1), m.group(2)
        if var not in decls.variables:
            raise ParseError(f"exponent binding names undeclared variable {var!r}")
        bindings.append((sym, var))
    bound_vars = {v for _, v in bindings}
    missing = [v for v in decls.variables if v not in bound_vars]
    if missing:
        raise ParseError(f"variables without exponent symbols: {missing}")
    rules: list[Rule] = []
    for stmt in statements[1:]:
        if not stmt.startswith("when"):
            raise ParseError(f"expected a 'when' rule, found {stmt[:30]!r}")
        rest = stmt[len("when") :]
        if ":" not in rest:
            raise ParseError(f"rule is missing ':' separator: {stmt[:40]!r}")
        cond_text, template_text = rest.split(":", 1)
        rules.append(
            Rule(
                condition=_parse_condition(cond_text),
                condition_text=cond_text.strip(),
                template=parse_expression(template_text.strip()),
                template_text=template_text.strip(),
            )
        )
    if not rules:
        raise ParseError("invariant spec has no rules")
    return Invariantlet(tuple(bindings), tuple(rules), decls)


# -- one-step unfolding ------------------------------------------------------------


def unfold_step(
    loop: While, inv: Invariantlet, state: tuple[int, ...], decls: Declarations, ring: Ring
) -> ClosedForm:
    """One loop unfolding applied to the candidate at a point-mass input.

    Outside the guard the monomial passes through unchanged; inside, the
    loop-free body maps the monomial to a polynomial and the candidate's
    linear extension weighs each output monomial by its coefficient.
    """
    if not sat(loop.guard, state, decls):
        mono = Polynomial.monomial(ring, state + (0,) * len(ring.parameters))
        return cf_rational(RationalFunction.from_polynomial(mono))
    hi = reach_bounds(loop.body, {v: (state[i], state[i]) for i, v in enumerate(decls.variables)}, decls)
    bounds = tuple(hi[v] for v in decls.variables)
    point = TruncatedSeries.monomial(ring, bounds, state, 1)
    stepped = transform(loop.body, point, decls, EngineConfig())
    assert stepped.lost.is_zero(), "one-step reach bounds must hold"
    total = cf_const(ring, 0)
    for exps, coeff in stepped.sorted_terms():
        value = inv.at(ring, inv.env_of_state(exps))
        total = cf_add(total, cf_mul(cf_rational(coeff), value))
    return total


# -- sign reasoning on coefficients ---------------------------------------------------


def poly_sign(p: Polynomial) -> int | None:
    """Sign of a polynomial for positive symbol values, when the coefficient
    signs decide it; None when indefinite."""
    if p.is_zero():
        return 0
    signs = {1 if c > 0 else -1 for c in p.terms.values()}
    if signs == {1}:
        return 1
    if signs == {-1}:
        return -1
    return None


def rf_sign(f: RationalFunction) -> int | None:
    if f.is_zero():
        return 0
    sn = poly_sign(f.num)
    sd = poly_sign(f.den)
    if sn is None or sd is None:
        return None
    return sn * sd


# -- verdicts ----------------------------------------------------------------------


@dataclass
class PointVerdict:
    state: tuple[int, ...]
    status: str  # equal | strictly-below | holds-to-order | violated
    order: int | None = None
    equal_to_order: bool | None = None
    witness: dict | None = None
    mass: str = "unknown"
    mass_kind: str = "unknown"  # one | below-one | divergent | unknown

    def to_json(self) -> dict:
        out = {
            "state": list(self.state),
            "status": self.status,
            "mass": self.mass,
            "mass_kind": self.mass_kind,
        }
        if self.order is not None:
            out["order"] = self.order
            out["equal_to_order"] = bool(self.equal_to_order)
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class CheckVerdict:
    aggregate: str  # superinvariant-on-grid | violated
    points: list[PointVerdict]
    grid: dict[str, int]
    order: int
    conclusion: str

    def to_json(self) -> dict:
        return {
            "aggregate": self.aggregate,
            "grid": dict(sorted(self.grid.items())),
            "order": self.order,
            "conclusion": self.conclusion,
            "points": [p.to_json() for p in self.points],
        }


def check_superinvariant(
    loop: While,
    inv: Invariantlet,
    grid: Mapping[str, int],
    order: int,
    decls: Declarations,
    valuation: Mapping[str, Fraction] | None = None,
) -> CheckVerdict:
    """Decide the superinvariant inequality pointwise on the exponent grid."""
    ring = make_ring(decls)
    missing = [s for s in inv.symbols if s not in grid]
    if missing:
        raise ParseError(f"grid does not bound exponent symbols {missing}")
    axes = [range(grid[s] + 1) for s in inv.symbols]
    points: list[PointVerdict] = []
    for combo in product(*axes):
        env = dict(zip(inv.symbols, combo))
        state = [0] * len(decls.variables)
        for (sym, var), value in zip(inv.bindings, combo):
            state[decls.var_index(var)] = value
        state = tuple(state)
        lhs = unfold_step(loop, inv, state, decls, ring)
        rhs = inv.at(ring, env)
        verdict = _compare_point(state, lhs, rhs, ring, order, valuation)
        verdict.mass, verdict.mass_kind = _mass_of(rhs, ring, valuation)
        points.append(verdict)
    violated = [p for p in points if p.status == "violated"]
    aggregate = "violated" if violated else "superinvariant-on-grid"
    conclusion = _conclusion(aggregate, points, grid)
    return CheckVerdict(aggregate, points, dict(grid), order, conclusion)


def _pin(rf: RationalFunction, valuation: Mapping[str, Fraction] | None):
    if not valuation:
        return rf
    result = rf.substitute_values({k: Fraction(v) for k, v in valuation.items()})
    return result


def _compare_point(
    state: tuple[int, ...],
    lhs: ClosedForm,
    rhs: ClosedForm,
    ring: Ring,
    order: int,
    valuation: Mapping[str, Fraction] | None,
) -> PointVerdict:
    lhs_rf = lhs.to_rational()
    rhs_rf = rhs.to_rational()
    if lhs_rf is not None and rhs_rf is not None:
        lhs_rf = _pin(lhs_rf, valuation)
        rhs_rf = _pin(rhs_rf, valuation)
        if lhs_rf is DIVERGENT or rhs_rf is DIVERGENT:
            raise SymbolicIncomparable("valuation hits a pole of the candidate")
        diff = rhs_rf - lhs_rf
        if diff.is_zero():
            return PointVerdict(state, "equal")
        bounds = (order,) * ring.nvars
        series = series_expand(cf_rational(diff), ring, bounds)
        negative = _find_negative(series)
        if negative is not None:
            exps, coeff = negative
            return PointVerdict(
                state,
                "violated",
                witness={"monomial": list(exps), "shortfall": str(coeff)},
            )
        if _any_indefinite(series):
            raise SymbolicIncomparable(
                "parameter coefficients are sign-indefinite; pin them with a valuation"
            )
        if diff.is_polynomial() and poly_sign(diff.num) == 1:
            return PointVerdict(state, "strictly-below")
        return PointVerdict(state, "holds-to-order", order=order, equal_to_order=False)
    # series comparison (square roots present)
    bounds = (order,) * ring.nvars
    lseries = series_expand(lhs, ring, bounds)
    rseries = series_expand(rhs, ring, bounds)
    diff_series = rseries - lseries
    if valuation:
        pinned = {}
        for exps, c in diff_series.coeffs.items():
            value = _pin(c, valuation)
            if value is DIVERGENT:
                raise SymbolicIncomparable("valuation hits a pole of a coefficient")
            if not value.is_zero():
                pinned[exps] = value
        diff_series = TruncatedSeries(ring, bounds, pinned)
    if diff_series.is_zero():
        return PointVerdict(state, "holds-to-order", order=order, equal_to_order=True)
    negative = _find_negative(diff_series)
    if negative is not None:
        exps, coeff = negative
        return PointVerdict(
            state,
            "violated",
            witness={"monomial": list(exps), "shortfall": str(coeff)},
        )
    if _any_indefinite(diff_series):
        raise SymbolicIncomparable(
            "parameter coefficients are sign-indefinite; pin them with a valuation"
        )
    return PointVerdict(state, "holds-to-order", order=order, equal_to_order=False)


def _find_negative(series: TruncatedSeries):
    for exps, c in sorted(series.coeffs.items(), key=lambda t: grlex_key(t[0])):
        if rf_sign(c) == -1:
            return exps, c
    return None


def _any_indefinite(series: TruncatedSeries) -> bool:
    return any(rf_sign(c) is None for c in series.coeffs.values())


def _mass_of(rhs: ClosedForm, ring: Ring, valuation: Mapping[str, Fraction] | None):
    """Mass of the candidate value: its evaluation at the all-ones point."""
    rf = rhs.to_rational()
    try:
        if rf is not None:
            value = rf.eval_at_one(list(ring.variables))
        else:
            value = cf_eval_point(rhs, {v: Fraction(1) for v in ring.variables})
    except Exception:
        return "unknown", "unknown"
    if value is DIVERGENT:
        return "Divergent", "divergent"
    if valuation:
        pinned = _pin(value, valuation)
        if pinned is DIVERGENT:
            return "Divergent", "divergent"
        value = pinned
    one = RationalFunction.one(ring)
    if value == one:
        return str(value), "one"
    gap_sign = rf_sign(value - one)
    if gap_sign == -1:
        return str(value), "below-one"
    return str(value), "unknown"


def _conclusion(aggregate: str, points: list[PointVerdict], grid) -> str:
    if aggregate == "violated":
        return "candidate is not a superinvariant: some unfolded value exceeds it"
    all_equal = all(p.status == "equal" for p in points)
    all_equal_to_order = all(
        p.status == "equal" or (p.status == "holds-to-order" and p.equal_to_order)
        for p in points
    )
    masses_one = all(p.mass_kind == "one" for p in points)
    below = [p for p in points if p.mass_kind == "below-one"]
    divergent = [p for p in points if p.mass_kind == "divergent"]
    if all_equal and masses_one:
        return (
            "superinvariant on the grid; all points equal with mass 1: the "
            "candidate is exactly the loop semantics provided the loop "
            "terminates almost surely"
        )
    if all_equal_to_order and masses_one:
        return (
            "superinvariant on the grid; equal to the compared order with "
            "mass 1: the candidate matches the loop semantics to that order "
            "under almost-sure termination"
        )
    if below:
        worst = below[0]
        return (
            "superinvariant on the grid with mass below one at state "
            f"{list(worst.state)} (mass {worst.mass}): if the candidate is a "
            "superinvariant beyond the grid, the loop does not terminate "
            "almost surely from that state"
        )
    if divergent:
        return (
            "superinvariant on the grid; the candidate has divergent mass at "
            f"state {list(divergent[0].state)}, so it is a proper "
            "overapproximation (not a PGF there)"
        )
    return "superinvariant on the grid"
