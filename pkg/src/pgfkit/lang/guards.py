"""Guard evaluation and per-variable satisfying-value analysis.

``guard_states`` projects a guard onto one variable: it returns the exact
finite set of values that variable can take inside the guard, or the
``UNBOUNDED`` marker.  The analysis goes through disjunctive normal form;
the variable is bounded exactly when every satisfiable disjunct imposes an
upper bound on it (an atom ``v < c``, ``v <= c`` or ``v = c`` in positive
position).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .ast import (
    Atom,
    BoolLit,
    Declarations,
    Guard,
    GuardAnd,
    GuardNot,
    GuardOr,
    ModAtom,
    State,
)


class _Unbounded:
    def __repr__(self):
        return "UNBOUNDED"


UNBOUNDED = _Unbounded()


def sat(guard: Guard, state: State, decls: Declarations) -> bool:
    """Standard boolean evaluation of a guard in a program state."""
    if isinstance(guard, BoolLit):
        return guard.value
    if isinstance(guard, Atom):
        return guard.holds(state[decls.var_index(guard.var)])
    if isinstance(guard, ModAtom):
        return guard.holds(state[decls.var_index(guard.var)])
    if isinstance(guard, GuardNot):
        return not sat(guard.arg, state, decls)
    if isinstance(guard, GuardAnd):
        return sat(guard.left, state, decls) and sat(guard.right, state, decls)
    if isinstance(guard, GuardOr):
        return sat(guard.left, state, decls) or sat(guard.right, state, decls)
    raise TypeError(guard)


# -- normal forms --------------------------------------------------------------


@dataclass
class _Literal:
    atom: Atom | ModAtom
    positive: bool


def _nnf(guard: Guard, positive: bool) -> Guard:
    if isinstance(guard, BoolLit):
        return BoolLit(guard.value == positive)
    if isinstance(guard, (Atom, ModAtom)):
        return guard if positive else GuardNot(guard)
    if isinstance(guard, GuardNot):
        return _nnf(guard.arg, not positive)
    if isinstance(guard, GuardAnd):
        l, r = _nnf(guard.left, positive), _nnf(guard.right, positive)
        return GuardAnd(l, r) if positive else GuardOr(l, r)
    if isinstance(guard, GuardOr):
        l, r = _nnf(guard.left, positive), _nnf(guard.right, positive)
        return GuardOr(l, r) if positive else GuardAnd(l, r)
    raise TypeError(guard)


def _dnf(guard: Guard) -> list[list[_Literal]]:
    """Disjuncts as literal lists; a tautology yields the empty disjunct."""
    guard = _nnf(guard, True)

    def go(g: Guard) -> list[list[_Literal]]:
        if isinstance(g, BoolLit):
            return [[]] if g.value else []
        if isinstance(g, (Atom, ModAtom)):
            return [[_Literal(g, True)]]
        if isinstance(g, GuardNot):
            assert isinstance(g.arg, (Atom, ModAtom))
            return [[_Literal(g.arg, False)]]
        if isinstance(g, GuardOr):
            return go(g.left) + go(g.right)
        if isinstance(g, GuardAnd):
            return [l + r for l in go(g.left) for r in go(g.right)]
        raise TypeError(g)

    return go(guard)


@dataclass
class _VarConstraint:
    """Conjunction of single-variable literals, in interval/residue form."""

    low: int = 0
    high: int | None = None
    excluded: set[int] = field(default_factory=set)
    residues: list[tuple[int, frozenset[int]]] = field(default_factory=list)
    has_upper_atom: bool = False

    def add(self, lit: _Literal) -> None:
        a = lit.atom
        if isinstance(a, ModAtom):
            allowed = {a.residue} if lit.positive else set(range(a.modulus)) - {a.residue}
            self.residues.append((a.modulus, frozenset(allowed)))
            return
        op, c = a.op, a.const
        if not lit.positive:
            op = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "=": "!=", "!=": "="}[op]
        if op == "<":
            self.high = c - 1 if self.high is None else min(self.high, c - 1)
            self.has_upper_atom = True
        elif op == "<=":
            self.high = c if self.high is None else min(self.high, c)
            self.has_upper_atom = True
        elif op == "=":
            self.low = max(self.low, c)
            self.high = c if self.high is None else min(self.high, c)
            self.has_upper_atom = True
        elif op == "!=":
            self.excluded.add(c)
        elif op == ">=":
            self.low = max(self.low, c)
        elif op == ">":
            self.low = max(self.low, c + 1)

    def admits(self, value: int) -> bool:
        if value < self.low:
            return False
        if self.high is not None and value > self.high:
            return False
        if value in self.excluded:
            return False
        return all(value % m in allowed for m, allowed in self.residues)

    def satisfiable(self) -> bool:
        """Nonempty over the naturals; decidable by probing one period."""
        if self.high is not None:
            return any(self.admits(v) for v in range(self.low, self.high + 1))
        period = 1
        for m, _ in self.residues:
            period = period * m // _gcd(period, m)
        probe_from = max(self.low, max(self.excluded) + 1 if self.excluded else self.low)
        return any(self.admits(probe_from + k) for k in range(period))

    def values(self) -> set[int]:
        assert self.high is not None
        return {v for v in range(self.low, self.high + 1) if self.admits(v)}


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _disjunct_constraints(literals: list[_Literal]) -> dict[str, _VarConstraint]:
    by_var: dict[str, _VarConstraint] = {}
    for lit in literals:
        by_var.setdefault(lit.atom.var, _VarConstraint()).add(lit)
    return by_var


def guard_states(guard: Guard, var: str):
    """Exact satisfying value set of ``var`` inside the guard, or UNBOUNDED.

    The variable is bounded iff every satisfiable disjunct of the DNF gives
    it an upper-bounding atom.  Values are then collected per disjunct,
    dropping disjuncts whose other variables are unsatisfiable.
    """
    disjuncts = _dnf(guard)
    values: set[int] = set()
    for literals in disjuncts:
        constraints = _disjunct_constraints(literals)
        others_ok = all(c.satisfiable() for v, c in constraints.items() if v != var)
        own = constraints.get(var, _VarConstraint())
        if not others_ok or not own.satisfiable():
            continue  # contributes no states at all
        if not own.has_upper_atom:
            return UNBOUNDED
        values |= own.values()
    return frozenset(values)


def bounded_states(guard: Guard, variables: tuple[str, ...], decls: Declarations):
    """Enumerate the satisfying assignments of the guard restricted to the
    given (bounded) variables, in lexicographic order of their values.

    All guard variables must be among ``variables``; each must be bounded.
    """
    value_sets = []
    for v in variables:
        vs = guard_states(guard, v)
        if vs is UNBOUNDED:
            raise ValueError(f"variable {v!r} is not bounded by the guard")
        value_sets.append(sorted(vs))
    result = []
    for combo in product(*value_sets):
        state = [0] * len(decls.variables)
        for v, value in zip(variables, combo):
            state[decls.var_index(v)] = value
        if sat(guard, tuple(state), decls):
            result.append(tuple(combo))
    return result
