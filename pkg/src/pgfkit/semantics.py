"""Forward transformer semantics on truncated series.

``transform`` pushes a series through a program statement by statement:
assignments remap monomial exponents, probabilistic choice splits mass
(state-dependent probabilities are applied monomial by monomial),
conditionals partition by the guard, and loops run Kleene iteration of the
loop unfolding.

A loop run produces a ``LoopReport``: the settled prefix (mass that has left
the loop), the live remainder (mass still inside the guard) and the total
mass shifted beyond the bound box.  After ``n`` body applications the
settled prefix equals the ``(n+1)``-fold unfolding of the zero transformer
applied to the input, restricted to the box, and is therefore an exact
coefficient-wise lower bound of the loop semantics there.  Convergence is
declared only when the live part is exactly zero; anything else stays an
honest lower bound, never an extrapolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra.ratfun import RationalFunction
from .errors import ProbabilityOutOfRange
from .fps import TruncatedSeries
from .lang.ast import (
    Assign,
    Choice,
    Declarations,
    Expr,
    Ite,
    ProbConst,
    ProbParam,
    ProbRecip,
    Seq,
    Skip,
    Stmt,
    While,
)
from .lang.guards import sat


@dataclass(frozen=True)
class EngineConfig:
    max_unroll: int = 64


@dataclass
class LoopReport:
    iterations: int
    converged: bool
    settled: TruncatedSeries
    live: TruncatedSeries
    lost: RationalFunction

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "converged": self.converged,
            "settled_mass": str(self.settled.mass()),
            "live_mass": str(self.live.mass()),
            "lost_mass": str(self.lost),
        }


def transform(
    stmt: Stmt,
    series: TruncatedSeries,
    decls: Declarations,
    cfg: EngineConfig = EngineConfig(),
    reports: list[LoopReport] | None = None,
) -> TruncatedSeries:
    """Apply the program transformer to a series; loop reports are appended
    to ``reports`` in textual order when a list is supplied."""
    if isinstance(stmt, Skip):
        return series
    if isinstance(stmt, Assign):
        return assign(stmt.var, stmt.expr, series, decls)
    if isinstance(stmt, Seq):
        for part in stmt.parts:
            series = transform(part, series, decls, cfg, reports)
        return series
    if isinstance(stmt, Choice):
        base = series.drop_lost()
        left_in = scale_by_prob(base, stmt.prob, decls, complement=False)
        right_in = scale_by_prob(base, stmt.prob, decls, complement=True)
        left = transform(stmt.left, left_in, decls, cfg, reports)
        right = transform(stmt.right, right_in, decls, cfg, reports)
        result = left + right
        return TruncatedSeries(result.ring, result.bounds, result.coeffs, result.lost + series.lost)
    if isinstance(stmt, Ite):
        inside = series.restrict(lambda s: sat(stmt.guard, s, decls)).drop_lost()
        outside = series.restrict(lambda s: not sat(stmt.guard, s, decls)).drop_lost()
        then = transform(stmt.then, inside, decls, cfg, reports)
        other = transform(stmt.other, outside, decls, cfg, reports)
        result = then + other
        return TruncatedSeries(result.ring, result.bounds, result.coeffs, result.lost + series.lost)
    if isinstance(stmt, While):
        report = loop_iterate(stmt.guard, stmt.body, series, decls, cfg, reports)
        if reports is not None:
            reports.append(report)
        return TruncatedSeries(
            report.settled.ring, report.settled.bounds, report.settled.coeffs, report.lost
        )
    raise TypeError(stmt)


def assign(var: str, expr: Expr, series: TruncatedSeries, decls: Declarations) -> TruncatedSeries:
    """Exact per-monomial exponent remap; overflow feeds the lost mass."""
    ring = series.ring
    i = decls.var_index(var)
    bound = series.bounds[i]
    coeffs: dict[tuple[int, ...], RationalFunction] = {}
    lost = series.lost
    for exps, c in series.coeffs.items():
        value = expr.evaluate(exps, decls)
        if value > bound:
            lost = lost + c
            continue
        new = list(exps)
        new[i] = value
        key = tuple(new)
        prev = coeffs.get(key)
        s = c if prev is None else prev + c
        if s.is_zero():
            coeffs.pop(key, None)
        else:
            coeffs[key] = s
    return TruncatedSeries(ring, series.bounds, coeffs, lost)


def scale_by_prob(
    series: TruncatedSeries, prob, decls: Declarations, complement: bool
) -> TruncatedSeries:
    """Multiply coefficients by p (or 1-p); 1/v probabilities are evaluated
    per monomial and must land in [0, 1] on every supported state."""
    ring = series.ring
    if isinstance(prob, ProbConst):
        p = prob.value if not complement else 1 - prob.value
        return series.scale(p)
    if isinstance(prob, ProbParam):
        p = RationalFunction.symbol(ring, prob.name)
        if complement:
            p = RationalFunction.one(ring) - p
        return series.scale_rf(p)
    if isinstance(prob, ProbRecip):
        i = decls.var_index(prob.var)
        coeffs: dict[tuple[int, ...], RationalFunction] = {}
        for exps, c in series.coeffs.items():
            value = exps[i]
            if value == 0:
                raise ProbabilityOutOfRange(
                    f"probability 1/{prob.var} evaluated at {prob.var} = 0"
                )
            weight = Fraction(1, value)
            if complement:
                weight = 1 - weight
            scaled = c.scale(weight)
            if not scaled.is_zero():
                coeffs[exps] = scaled
        # the per-state weight never exceeds one, so no mass is created
        return TruncatedSeries(ring, series.bounds, coeffs, series.lost)
    raise TypeError(prob)


def loop_iterate(
    guard,
    body: Stmt,
    series: TruncatedSeries,
    decls: Declarations,
    cfg: EngineConfig = EngineConfig(),
    reports: list[LoopReport] | None = None,
) -> LoopReport:
    """Kleene iteration of the loop unfolding.

    Each pass extracts the guard-violating part into the settled prefix and
    pushes the rest through the body.  ``iterations`` counts body
    applications; the loop stops early exactly when the live part is zero.
    """
    ring = series.ring
    settled = TruncatedSeries.zero(ring, series.bounds)
    total_lost = series.lost
    current = series.drop_lost()
    iterations = 0
    converged = False
    while True:
        outside = current.restrict(lambda s: not sat(guard, s, decls))
        settled = settled + outside
        current = current.restrict(lambda s: sat(guard, s, decls))
        if current.is_zero():
            converged = True
            break
        if iterations >= cfg.max_unroll:
            break
        stepped = transform(body, current, decls, cfg, reports)
        total_lost = total_lost + stepped.lost
        current = stepped.drop_lost()
        iterations += 1
    return LoopReport(
        iterations=iterations,
        converged=converged,
        settled=settled,
        live=current,
        lost=total_lost,
    )


# ---------------------------------------------------------------------------
# static one-step reach bounds


def reach_bounds(stmt: Stmt, start: dict[str, tuple[int, int]], decls: Declarations) -> dict[str, int]:
    """Upper bounds on every value a variable can hold at any point while a
    loop-free statement runs from per-variable value intervals.

    Affine expressions have natural coefficients, hence are monotone, so
    evaluating at interval endpoints is exact; branches join componentwise.
    Intermediate assignment results count: the bound box of a truncated run
    must hold them even when a later assignment shrinks the value again.
    """
    seen_hi = {v: start[v][1] for v in decls.variables}

    def eval_interval(expr: Expr, env_: dict[str, tuple[int, int]]) -> tuple[int, int]:
        lo = expr.const
        hi = expr.const
        for name, k in expr.coeffs:
            vlo, vhi = env_[name]
            lo += k * vlo
            hi += k * vhi
        return (max(lo - expr.monus, 0), max(hi - expr.monus, 0))

    def go(s: Stmt, env_: dict[str, tuple[int, int]]) -> dict[str, tuple[int, int]]:
        if isinstance(s, Skip):
            return env_
        if isinstance(s, Assign):
            out = dict(env_)
            interval = eval_interval(s.expr, env_)
            out[s.var] = interval
            seen_hi[s.var] = max(seen_hi[s.var], interval[1])
            return out
        if isinstance(s, Seq):
            for part in s.parts:
                env_ = go(part, env_)
            return env_
        if isinstance(s, (Choice, Ite)):
            first = go(s.left if isinstance(s, Choice) else s.then, env_)
            second = go(s.right if isinstance(s, Choice) else s.other, env_)
            return {
                v: (min(first[v][0], second[v][0]), max(first[v][1], second[v][1]))
                for v in env_
            }
        if isinstance(s, While):
            raise ValueError("reach bounds are defined for loop-free code only")
        raise TypeError(s)

    go(stmt, dict(start))
    return seen_hi
