"""Parser for closed-form expressions.

One grammar serves both the CLI's PGF inputs and invariant-rule templates:

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | primary ('^' exponent)?
    primary := NUM | NAME | '(' expr ')'
             | 'sqrt' '(' expr ')'
             | 'sum' '(' NAME ',' expr ',' expr ',' expr ')'
             | 'fact' '(' expr ')'

Rational constants are spelled as quotients (``1/2``); there is no separate
fraction token.  Exponent positions, summation limits and ``fact`` arguments
must evaluate to integers once the exponent symbols are bound.  Parsing
happens once; evaluation against a binding of exponent symbols produces a
``ClosedForm`` and is exact throughout.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from ..errors import ParseError
from .cfexpr import (
    ClosedForm,
    cf_add,
    cf_const,
    cf_div,
    cf_mul,
    cf_pow,
    cf_sqrt,
    cf_sub,
)
from .poly import Ring
from .ratfun import RationalFunction


@dataclass(frozen=True)
class ENum:
    value: int


@dataclass(frozen=True)
class ESym:
    name: str


@dataclass(frozen=True)
class EBin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class ENeg:
    arg: object


@dataclass(frozen=True)
class EPow:
    base: object
    exponent: object


@dataclass(frozen=True)
class ESqrt:
    arg: object


@dataclass(frozen=True)
class ESum:
    index: str
    low: object
    high: object
    body: object


@dataclass(frozen=True)
class EFact:
    arg: object


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\^|\*|/|\+|-|\(|\)|,))")


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.items: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                if text[pos:].strip():
                    raise ParseError(f"unexpected character {text[pos:].strip()[0]!r} in expression", col=pos + 1)
                break
            num, name, op = m.groups()
            if num is not None:
                self.items.append(("num", num, m.start(1)))
            elif name is not None:
                self.items.append(("name", name, m.start(2)))
            else:
                self.items.append(("op", op, m.start(3)))
            pos = m.end()
        self.items.append(("eof", "", len(text)))

    def peek(self) -> tuple[str, str, int]:
        return self.items[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.items[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, value: str | None = None) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", col=tok[2] + 1)
        return tok


def parse_expression(text: str):
    """Parse into an expression AST; raises ParseError on bad syntax."""
    toks = _Tokens(text)
    node = _parse_expr(toks)
    tok = toks.peek()
    if tok[0] != "eof":
        raise ParseError(f"trailing input at {tok[1]!r}", col=tok[2] + 1)
    return node


def _parse_expr(toks: _Tokens):
    node = _parse_term(toks)
    while toks.peek()[:2] in (("op", "+"), ("op", "-")):
        op = toks.next()[1]
        rhs = _parse_term(toks)
        node = EBin(op, node, rhs)
    return node


def _parse_term(toks: _Tokens):
    node = _parse_factor(toks)
    while toks.peek()[:2] in (("op", "*"), ("op", "/")):
        op = toks.next()[1]
        rhs = _parse_factor(toks)
        node = EBin(op, node, rhs)
    return node


def _parse_factor(toks: _Tokens):
    if toks.peek()[:2] == ("op", "-"):
        toks.next()
        return ENeg(_parse_factor(toks))
    node = _parse_primary(toks)
    if toks.peek()[:2] == ("op", "^"):
        toks.next()
        exponent = _parse_exponent(toks)
        node = EPow(node, exponent)
    return node


def _parse_exponent(toks: _Tokens):
    kind, value, pos = toks.peek()
    if kind == "num":
        toks.next()
        return ENum(int(value))
    if kind == "name":
        toks.next()
        return ESym(value)
    if (kind, value) == ("op", "("):
        toks.next()
        node = _parse_expr(toks)
        toks.expect("op", ")")
        return node
    if (kind, value) == ("op", "-"):
        toks.next()
        return ENeg(_parse_exponent(toks))
    raise ParseError(f"bad exponent at {value!r}", col=pos + 1)


def _parse_primary(toks: _Tokens):
    kind, value, pos = toks.next()
    if kind == "num":
        return ENum(int(value))
    if kind == "name":
        if value in ("sqrt", "sum", "fact") and toks.peek()[:2] == ("op", "("):
            toks.next()
            if value == "sqrt":
                node = ESqrt(_parse_expr(toks))
            elif value == "fact":
                node = EFact(_parse_expr(toks))
            else:
                idx = toks.expect("name")[1]
                toks.expect("op", ",")
                low = _parse_expr(toks)
                toks.expect("op", ",")
                high = _parse_expr(toks)
                toks.expect("op", ",")
                body = _parse_expr(toks)
                node = ESum(idx, low, high, body)
            toks.expect("op", ")")
            return node
        return ESym(value)
    if (kind, value) == ("op", "("):
        node = _parse_expr(toks)
        toks.expect("op", ")")
        return node
    raise ParseError(f"unexpected token {value or 'end of input'!r}", col=pos + 1)


# ---------------------------------------------------------------------------
# evaluation


def eval_integer(node, env: Mapping[str, int]) -> int:
    """Evaluate an exponent-position expression to an integer."""
    if isinstance(node, ENum):
        return node.value
    if isinstance(node, ESym):
        if node.name not in env:
            raise ParseError(f"symbol {node.name!r} is not an exponent symbol")
        return env[node.name]
    if isinstance(node, ENeg):
        return -eval_integer(node.arg, env)
    if isinstance(node, EBin):
        a = eval_integer(node.left, env)
        b = eval_integer(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if b == 0 or a % b:
                raise ParseError("non-integer division in exponent position")
            return a // b
    raise ParseError("expression is not integral in exponent position")


def eval_closed_form(node, ring: Ring, env: Mapping[str, int] | None = None) -> ClosedForm:
    """Evaluate to a ClosedForm with exponent symbols bound by ``env``."""
    env = env or {}
    if isinstance(node, ENum):
        return cf_const(ring, node.value)
    if isinstance(node, ESym):
        name = node.name
        if name in env:
            return cf_const(ring, env[name])
        if name in ring.symbols:
            return CFRationalSymbol(ring, name)
        raise ParseError(f"unknown symbol {name!r}")
    if isinstance(node, ENeg):
        return cf_sub(cf_const(ring, 0), eval_closed_form(node.arg, ring, env))
    if isinstance(node, EBin):
        a = eval_closed_form(node.left, ring, env)
        b = eval_closed_form(node.right, ring, env)
        return {"+": cf_add, "-": cf_sub, "*": cf_mul, "/": cf_div}[node.op](a, b)
    if isinstance(node, EPow):
        base = eval_closed_form(node.base, ring, env)
        exponent = eval_integer(node.exponent, env)
        return cf_pow(base, exponent)
    if isinstance(node, ESqrt):
        return cf_sqrt(eval_closed_form(node.arg, ring, env))
    if isinstance(node, ESum):
        low = eval_integer(node.low, env)
        high = eval_integer(node.high, env)
        total = cf_const(ring, 0)
        for k in range(low, high + 1):
            inner = dict(env)
            inner[node.index] = k
            total = cf_add(total, eval_closed_form(node.body, ring, inner))
        return total
    if isinstance(node, EFact):
        k = eval_integer(node.arg, env)
        if k < 0:
            raise ParseError("factorial of a negative integer")
        return cf_const(ring, math.factorial(k))
    raise TypeError(node)


def CFRationalSymbol(ring: Ring, name: str) -> ClosedForm:
    from .cfexpr import CFRational

    return CFRational(RationalFunction.symbol(ring, name))


def parse_rational_function(text: str, ring: Ring) -> RationalFunction:
    """Parse a plain rational-function expression (no sqrt/sum/fact)."""
    node = parse_expression(text)
    cf = eval_closed_form(node, ring, {})
    rf = cf.to_rational()
    if rf is None:
        raise ParseError("expression is not a rational function (contains sqrt)")
    return rf


def free_names(node) -> set[str]:
    if isinstance(node, ENum):
        return set()
    if isinstance(node, ESym):
        return {node.name}
    if isinstance(node, ENeg):
        return free_names(node.arg)
    if isinstance(node, EBin):
        return free_names(node.left) | free_names(node.right)
    if isinstance(node, EPow):
        return free_names(node.base) | free_names(node.exponent)
    if isinstance(node, ESqrt):
        return free_names(node.arg)
    if isinstance(node, ESum):
        inner = free_names(node.body) - {node.index}
        return free_names(node.low) | free_names(node.high) | inner
    if isinstance(node, EFact):
        return free_names(node.arg)
    raise TypeError(node)
