"""Recursive-descent parser for program sources, plus the inverse renderer.

Source layout:

    vars x, c;
    params a, b;        # optional
    <program>

Programs follow the grammar documented in the README: statements are
separated by ';', probabilistic choice is written '{P} [p] {Q}', guards use
'&', '|', '!' and atoms 'v <= 3', 'v % 2 = 1', 'true', 'false'.
Diagnostics carry line/column positions.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..errors import ParseError
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
    Prob,
    ProbConst,
    ProbParam,
    ProbRecip,
    Program,
    Seq,
    Skip,
    Stmt,
    While,
)

_TOKEN = re.compile(
    r"(?P<ws>\s+|#[^\n]*)"
    r"|(?P<num>\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>:=|<=|>=|!=|&&|\|\||[-+*/%<>=!&|(){}\[\];,])"
)

KEYWORDS = {"vars", "params", "skip", "if", "else", "while", "true", "false"}


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def _tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if not m:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group(0)
        if m.lastgroup != "ws":
            kind = m.lastgroup
            if kind == "name" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            return self.next()
        return None

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            got = tok.text or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", tok.line, tok.col)
        return tok

    # -- declarations ---------------------------------------------------

    def parse_declarations(self) -> Declarations:
        tok = self.expect("kw", "vars")
        variables = self._name_list()
        self.expect("op", ";")
        parameters: tuple[str, ...] = ()
        if self.at("kw", "params"):
            self.next()
            parameters = self._name_list()
            self.expect("op", ";")
        names = list(variables) + list(parameters)
        seen: set[str] = set()
        for n in names:
            key = n.lower()
            if key in seen:
                raise ParseError(f"declaration {n!r} clashes with an earlier name", tok.line, tok.col)
            seen.add(key)
        for v in variables:
            if not v.islower():
                raise ParseError(f"variable names must be lowercase: {v!r}", tok.line, tok.col)
        for p in parameters:
            if not p.islower():
                raise ParseError(f"parameter names must be lowercase: {p!r}", tok.line, tok.col)
        return Declarations(tuple(variables), tuple(parameters))

    def _name_list(self) -> tuple[str, ...]:
        names = [self.expect("name").text]
        while self.accept("op", ","):
            names.append(self.expect("name").text)
        return tuple(names)

    # -- statements ------------------------------------------------------

    def parse_stmt_list(self, decls: Declarations) -> Stmt:
        parts = [self.parse_stmt(decls)]
        while self.accept("op", ";"):
            if self.at("op", "}") or self.at("eof"):
                break  # tolerate a trailing separator
            parts.append(self.parse_stmt(decls))
        if len(parts) == 1:
            return parts[0]
        return Seq(tuple(parts))

    def parse_block(self, decls: Declarations) -> Stmt:
        self.expect("op", "{")
        stmt = self.parse_stmt_list(decls)
        self.expect("op", "}")
        return stmt

    def parse_stmt(self, decls: Declarations) -> Stmt:
        if self.accept("kw", "skip"):
            return Skip()
        if self.at("kw", "if"):
            self.next()
            self.expect("op", "(")
            guard = self.parse_guard(decls)
            self.expect("op", ")")
            then = self.parse_block(decls)
            self.expect("kw", "else")
            other = self.parse_block(decls)
            return Ite(guard, then, other)
        if self.at("kw", "while"):
            self.next()
            self.expect("op", "(")
            guard = self.parse_guard(decls)
            self.expect("op", ")")
            body = self.parse_block(decls)
            return While(guard, body)
        if self.at("op", "{"):
            left = self.parse_block(decls)
            self.expect("op", "[")
            prob = self.parse_prob(decls)
            self.expect("op", "]")
            right = self.parse_block(decls)
            return Choice(prob, left, right)
        if self.at("name"):
            tok = self.next()
            var = tok.text
            if var not in decls.variables:
                raise ParseError(f"undeclared variable {var!r}", tok.line, tok.col)
            self.expect("op", ":=")
            expr = self.parse_expr(decls)
            return Assign(var, expr)
        tok = self.peek()
        raise ParseError(f"expected a statement, found {tok.text or 'end of input'!r}", tok.line, tok.col)

    # -- expressions -------------------------------------------------------

    def parse_expr(self, decls: Declarations) -> Expr:
        const = 0
        coeffs: dict[str, int] = {}

        def add_term():
            tok = self.peek()
            if tok.kind == "num":
                self.next()
                value = int(tok.text)
                if self.accept("op", "*"):
                    name_tok = self.expect("name")
                    self._check_var(name_tok, decls)
                    coeffs[name_tok.text] = coeffs.get(name_tok.text, 0) + value
                    return 0
                return value
            if tok.kind == "name":
                self.next()
                self._check_var(tok, decls)
                coeffs[tok.text] = coeffs.get(tok.text, 0) + 1
                return 0
            raise ParseError(f"expected a term, found {tok.text or 'end of input'!r}", tok.line, tok.col)

        const += add_term()
        monus = 0
        while True:
            if self.accept("op", "+"):
                const += add_term()
                continue
            if self.at("op", "-"):
                self.next()
                monus_tok = self.expect("num")
                monus = int(monus_tok.text)
                if self.at("op", "+") or self.at("op", "-"):
                    bad = self.peek()
                    raise ParseError("monus must be the final term of an expression", bad.line, bad.col)
            break
        items = tuple(sorted((n, k) for n, k in coeffs.items() if k != 0))
        return Expr(const, items, monus)

    def _check_var(self, tok: Token, decls: Declarations) -> None:
        if tok.text not in decls.variables:
            raise ParseError(f"undeclared variable {tok.text!r}", tok.line, tok.col)

    def parse_prob(self, decls: Declarations) -> Prob:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            num = int(tok.text)
            if self.accept("op", "/"):
                den_tok = self.next()
                if den_tok.kind == "num":
                    den = int(den_tok.text)
                    if den == 0:
                        raise ParseError("probability with zero denominator", den_tok.line, den_tok.col)
                    value = Fraction(num, den)
                elif den_tok.kind == "name" and den_tok.text in decls.variables:
                    if num != 1:
                        raise ParseError(
                            "state-dependent probabilities must have the form 1/v",
                            tok.line,
                            tok.col,
                        )
                    return ProbRecip(den_tok.text)
                else:
                    raise ParseError(
                        f"bad probability denominator {den_tok.text!r}", den_tok.line, den_tok.col
                    )
            else:
                value = Fraction(num)
            if not (0 <= value <= 1):
                raise ParseError(f"probability {value} outside [0, 1]", tok.line, tok.col)
            return ProbConst(value)
        if tok.kind == "name":
            self.next()
            if tok.text in decls.parameters:
                return ProbParam(tok.text)
            raise ParseError(f"undeclared parameter {tok.text!r}", tok.line, tok.col)
        raise ParseError(f"expected a probability, found {tok.text or 'end of input'!r}", tok.line, tok.col)

    # -- guards --------------------------------------------------------------

    def parse_guard(self, decls: Declarations) -> Guard:
        node = self.parse_guard_conj(decls)
        while self.at("op", "|") or self.at("op", "||"):
            self.next()
            rhs = self.parse_guard_conj(decls)
            node = GuardOr(node, rhs)
        return node

    def parse_guard_conj(self, decls: Declarations) -> Guard:
        node = self.parse_guard_atom(decls)
        while self.at("op", "&") or self.at("op", "&&"):
            self.next()
            rhs = self.parse_guard_atom(decls)
            node = GuardAnd(node, rhs)
        return node

    def parse_guard_atom(self, decls: Declarations) -> Guard:
        if self.accept("op", "!"):
            return GuardNot(self.parse_guard_atom(decls))
        if self.accept("op", "("):
            node = self.parse_guard(decls)
            self.expect("op", ")")
            return node
        if self.accept("kw", "true"):
            return BoolLit(True)
        if self.accept("kw", "false"):
            return BoolLit(False)
        tok = self.expect("name")
        self._check_var(tok, decls)
        if self.accept("op", "%"):
            mod_tok = self.expect("num")
            self.expect("op", "=")
            res_tok = self.expect("num")
            modulus, residue = int(mod_tok.text), int(res_tok.text)
            if modulus < 1:
                raise ParseError("modulus must be at least 1", mod_tok.line, mod_tok.col)
            if not (0 <= residue < modulus):
                raise ParseError("residue outside [0, modulus)", res_tok.line, res_tok.col)
            return ModAtom(tok.text, modulus, residue)
        op_tok = self.next()
        if op_tok.kind != "op" or op_tok.text not in ("<", "<=", "=", "!=", ">=", ">"):
            raise ParseError(f"expected a comparison, found {op_tok.text!r}", op_tok.line, op_tok.col)
        const_tok = self.expect("num")
        return Atom(tok.text, op_tok.text, int(const_tok.text))


def parse_program(source: str) -> Program:
    parser = _Parser(source)
    decls = parser.parse_declarations()
    body = parser.parse_stmt_list(decls)
    parser.expect("eof")
    return Program(decls, body)


# ---------------------------------------------------------------------------
# rendering (inverse of the parser, up to whitespace)


def render_expr(e: Expr) -> str:
    parts: list[str] = [name if k == 1 else f"{k}*{name}" for name, k in e.coeffs]
    if e.const or not parts:
        parts.append(str(e.const))
    text = " + ".join(parts)
    if e.monus:
        text += f" - {e.monus}"
    return text


def render_prob(p: Prob) -> str:
    if isinstance(p, ProbConst):
        return str(p.value)
    if isinstance(p, ProbParam):
        return p.name
    return f"1/{p.var}"


def render_guard(g: Guard, parent: str = "") -> str:
    if isinstance(g, BoolLit):
        return "true" if g.value else "false"
    if isinstance(g, Atom):
        return f"{g.var} {g.op} {g.const}"
    if isinstance(g, ModAtom):
        return f"{g.var} % {g.modulus} = {g.residue}"
    if isinstance(g, GuardNot):
        inner = render_guard(g.arg, "!")
        if isinstance(g.arg, (GuardAnd, GuardOr, Atom, ModAtom)):
            return f"!({inner})"
        return f"!{inner}"
    if isinstance(g, GuardAnd):
        left = render_guard(g.left, "&")
        right = render_guard(g.right, "&")
        if isinstance(g.left, GuardOr):
            left = f"({left})"
        if isinstance(g.right, (GuardOr, GuardAnd)):
            right = f"({right})"
        return f"{left} & {right}"
    if isinstance(g, GuardOr):
        left = render_guard(g.left, "|")
        right = render_guard(g.right, "|")
        if isinstance(g.right, GuardOr):
            right = f"({right})"
        return f"{left} | {right}"
    raise TypeError(g)


def render_stmt(s: Stmt) -> str:
    if isinstance(s, Skip):
        return "skip"
    if isinstance(s, Assign):
        return f"{s.var} := {render_expr(s.expr)}"
    if isinstance(s, Seq):
        return "; ".join(render_stmt(p) for p in s.parts)
    if isinstance(s, Choice):
        return f"{{ {render_stmt(s.left)} }} [{render_prob(s.prob)}] {{ {render_stmt(s.right)} }}"
    if isinstance(s, Ite):
        return (
            f"if ({render_guard(s.guard)}) {{ {render_stmt(s.then)} }}"
            f" else {{ {render_stmt(s.other)} }}"
        )
    if isinstance(s, While):
        return f"while ({render_guard(s.guard)}) {{ {render_stmt(s.body)} }}"
    raise TypeError(s)


def render_program(p: Program) -> str:
    lines = [f"vars {', '.join(p.decls.variables)};"]
    if p.decls.parameters:
        lines.append(f"params {', '.join(p.decls.parameters)};")
    lines.append(render_stmt(p.body))
    return "\n".join(lines)
