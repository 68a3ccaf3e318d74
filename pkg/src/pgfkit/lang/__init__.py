"""Syntax, parsing and static checks for the probabilistic while-language."""

from .ast import (
    Assign,
    Atom,
    BoolLit,
    Choice,
    Declarations,
    Expr,
    Guard,
    GuardAnd,
    GuardNot,
    GuardOr,
    Ite,
    ModAtom,
    ProbConst,
    ProbParam,
    ProbRecip,
    Program,
    Seq,
    Skip,
    Stmt,
    While,
    make_ring,
)
from .parser import parse_program, render_program, render_guard, render_stmt
from .guards import UNBOUNDED, guard_states, sat

__all__ = [
    "Assign",
    "Atom",
    "BoolLit",
    "Choice",
    "Declarations",
    "Expr",
    "Guard",
    "GuardAnd",
    "GuardNot",
    "GuardOr",
    "Ite",
    "ModAtom",
    "ProbConst",
    "ProbParam",
    "ProbRecip",
    "Program",
    "Seq",
    "Skip",
    "Stmt",
    "While",
    "make_ring",
    "parse_program",
    "render_program",
    "render_guard",
    "render_stmt",
    "UNBOUNDED",
    "guard_states",
    "sat",
]
