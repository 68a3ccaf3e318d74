"""Abstract syntax for the supported probabilistic while-language.

Expressions are affine forms over the program variables with natural
coefficients, optionally followed by a truncated subtraction of a constant
(``max(affine - c, 0)``), so every expression maps states to states.
Guards are boolean combinations of single-variable comparisons with
constants and residue constraints ``v % m = c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..algebra.poly import Ring

State = tuple[int, ...]


@dataclass(frozen=True)
class Declarations:
    variables: tuple[str, ...]
    parameters: tuple[str, ...] = ()

    def var_index(self, name: str) -> int:
        return self.variables.index(name)

    @property
    def indeterminates(self) -> tuple[str, ...]:
        return tuple(v.upper() for v in self.variables)


def make_ring(decls: Declarations) -> Ring:
    """Program variables become uppercase indeterminates, in declaration
    order; parameters keep their names and come after."""
    return Ring(decls.indeterminates, decls.parameters)


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    """Affine form const + sum(coeffs[v] * v), then monus of a constant."""

    const: int = 0
    coeffs: tuple[tuple[str, int], ...] = ()
    monus: int = 0

    def evaluate(self, state: State, decls: Declarations) -> int:
        total = self.const
        for name, k in self.coeffs:
            total += k * state[decls.var_index(name)]
        return max(total - self.monus, 0)

    def variables(self) -> set[str]:
        return {name for name, k in self.coeffs if k != 0}

    def affine_part(self) -> "Expr":
        return Expr(self.const, self.coeffs, 0)


# -- probability expressions --------------------------------------------------


@dataclass(frozen=True)
class ProbConst:
    value: Fraction

    def __post_init__(self):
        if not (0 <= self.value <= 1):
            raise ValueError(f"probability literal {self.value} outside [0, 1]")


@dataclass(frozen=True)
class ProbParam:
    name: str


@dataclass(frozen=True)
class ProbRecip:
    """State-dependent probability 1/v for a program variable v."""

    var: str


Prob = ProbConst | ProbParam | ProbRecip


# -- guards --------------------------------------------------------------------

CMP_OPS = ("<", "<=", "=", "!=", ">=", ">")


@dataclass(frozen=True)
class Atom:
    var: str
    op: str
    const: int

    def holds(self, value: int) -> bool:
        return {
            "<": value < self.const,
            "<=": value <= self.const,
            "=": value == self.const,
            "!=": value != self.const,
            ">=": value >= self.const,
            ">": value > self.const,
        }[self.op]


@dataclass(frozen=True)
class ModAtom:
    var: str
    modulus: int
    residue: int

    def __post_init__(self):
        if self.modulus < 1 or not (0 <= self.residue < self.modulus):
            raise ValueError("bad residue constraint")

    def holds(self, value: int) -> bool:
        return value % self.modulus == self.residue


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class GuardAnd:
    left: "Guard"
    right: "Guard"


@dataclass(frozen=True)
class GuardOr:
    left: "Guard"
    right: "Guard"


@dataclass(frozen=True)
class GuardNot:
    arg: "Guard"


Guard = Atom | ModAtom | BoolLit | GuardAnd | GuardOr | GuardNot


def guard_variables(g: Guard) -> set[str]:
    if isinstance(g, (Atom, ModAtom)):
        return {g.var}
    if isinstance(g, BoolLit):
        return set()
    if isinstance(g, GuardNot):
        return guard_variables(g.arg)
    return guard_variables(g.left) | guard_variables(g.right)


# -- statements -----------------------------------------------------------------


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class Seq:
    parts: tuple["Stmt", ...]


@dataclass(frozen=True)
class Choice:
    prob: Prob
    left: "Stmt"
    right: "Stmt"


@dataclass(frozen=True)
class Ite:
    guard: Guard
    then: "Stmt"
    other: "Stmt"


@dataclass(frozen=True)
class While:
    guard: Guard
    body: "Stmt"


Stmt = Skip | Assign | Seq | Choice | Ite | While


@dataclass(frozen=True)
class Program:
    decls: Declarations
    body: Stmt


def contains_while(stmt: Stmt) -> bool:
    if isinstance(stmt, While):
        return True
    if isinstance(stmt, Seq):
        return any(contains_while(p) for p in stmt.parts)
    if isinstance(stmt, Choice):
        return contains_while(stmt.left) or contains_while(stmt.right)
    if isinstance(stmt, Ite):
        return contains_while(stmt.then) or contains_while(stmt.other)
    return False


def statements(stmt: Stmt):
    """Yield every statement node in the tree, preorder."""
    yield stmt
    if isinstance(stmt, Seq):
        for p in stmt.parts:
            yield from statements(p)
    elif isinstance(stmt, Choice):
        yield from statements(stmt.left)
        yield from statements(stmt.right)
    elif isinstance(stmt, Ite):
        yield from statements(stmt.then)
        yield from statements(stmt.other)
    elif isinstance(stmt, While):
        yield from statements(stmt.body)
