"""Text syntax for noncommutative polynomials.

Grammar (EBNF)::

    expr   = term { ("+" | "-") term } ;
    term   = unary [ "*" term ] ;
    unary  = "-" unary | power ;
    power  = atom [ "^" INTEGER ] ;
    atom   = NUMBER | "i" | VAR | "(" expr ")" | "adj" "(" expr ")" ;
    VAR    = "x" ( "1".."9" ) [ DIGIT ] ;            (* x1 .. x99 *)
    NUMBER = INTEGER | INTEGER "." DIGITS | INTEGER "/" INTEGER ;

Multiplication must be written out (``x1*x2``; ``x1 x2`` is an error) and
``^`` does not chain (``x1^2^3`` needs parentheses).  Decimals are read as
exact rationals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .ncpoly import NcPoly, Word
from .scalar import I, ONE, Scalar

__all__ = [
    "ParseError",
    "VariableOutOfRange",
    "Const",
    "Var",
    "Add",
    "Sub",
    "Neg",
    "Mul",
    "Pow",
    "Adj",
    "parse",
    "lower",
    "parse_poly",
    "max_variable",
    "format_poly",
    "format_tensor",
]


class ParseError(ValueError):
    def __init__(self, reason: str, offset: int):
        super().__init__(f"{reason} (at byte offset {offset})")
        self.reason = reason
        self.offset = offset


class VariableOutOfRange(ValueError):
    pass


# --- AST ------------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: Scalar


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Adj:
    operand: "Expr"


Expr = Union[Const, Var, Add, Sub, Neg, Mul, Pow, Adj]


# --- lexer ----------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+\.\d+|\d+(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, var, i, adj, op, end
    text: str
    offset: int
    value: object = None


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        off = _byte_offset(text, pos)
        if m is None:
            raise ParseError(f"unknown token {text[pos]!r}", off)
        kind = m.lastgroup
        tok = m.group()
        if kind == "num":
            if "/" in tok:
                p, q = tok.split("/")
                if int(q) == 0:
                    raise ParseError(f"zero denominator in {tok!r}", off)
            toks.append(_Tok("num", tok, off, Scalar(Fraction(tok))))
        elif kind == "name":
            if tok == "i":
                toks.append(_Tok("i", tok, off, I))
            elif tok == "adj":
                toks.append(_Tok("adj", tok, off))
            elif re.fullmatch(r"x\d*", tok):
                digits = tok[1:]
                if not digits:
                    raise ParseError("variable 'x' needs an index 1..99", off)
                if digits.startswith("0") or not 1 <= int(digits) <= 99:
                    raise ParseError(f"variable index must be 1..99, got {tok!r}", off)
                toks.append(_Tok("var", tok, off, int(digits)))
            else:
                raise ParseError(f"unknown token {tok!r}", off)
        elif kind == "op":
            toks.append(_Tok("op", tok, off))
        pos = m.end()
    toks.append(_Tok("end", "", _byte_offset(text, len(text))))
    return toks


# --- parser ----------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self) -> _Tok:
        return self.toks[self.k]

    def take(self) -> _Tok:
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def at_op(self, op: str) -> bool:
        tok = self.peek()
        return tok.kind == "op" and tok.text == op

    def expect_op(self, op: str, why: str) -> _Tok:
        tok = self.peek()
        if not (tok.kind == "op" and tok.text == op):
            raise ParseError(why, tok.offset)
        return self.take()

    def parse(self) -> Expr:
        if self.peek().kind == "end":
            raise ParseError("empty expression", 0)
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            if tok.kind in ("num", "var", "i", "adj") or (tok.kind == "op" and tok.text == "("):
                raise ParseError("missing '*' between factors", tok.offset)
            if tok.kind == "op" and tok.text == ")":
                raise ParseError("unbalanced ')'", tok.offset)
            raise ParseError(f"unexpected {tok.text!r}", tok.offset)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.at_op("+") or self.at_op("-"):
            op = self.take().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.unary()
        if self.at_op("*"):
            self.take()
            return Mul(node, self.term())
        return node

    def unary(self) -> Expr:
        if self.at_op("-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if not self.at_op("^"):
            return base
        self.take()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            raise ParseError("exponent must be a nonnegative integer", tok.offset)
        if tok.kind != "num" or not tok.text.isdigit():
            raise ParseError("exponent must be a nonnegative integer", tok.offset)
        self.take()
        if self.at_op("^"):
            raise ParseError("'^' does not chain; add parentheses", self.peek().offset)
        return Pow(base, int(tok.text))

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num" or tok.kind == "i":
            self.take()
            return Const(tok.value)
        if tok.kind == "var":
            self.take()
            return Var(tok.value)
        if tok.kind == "adj":
            self.take()
            self.expect_op("(", "expected '(' after 'adj'")
            inner = self.expr()
            self.expect_op(")", "unbalanced '(': expected ')'")
            return Adj(inner)
        if tok.kind == "op" and tok.text == "(":
            self.take()
            inner = self.expr()
            self.expect_op(")", "unbalanced '(': expected ')'")
            return inner
        if tok.kind == "end":
            raise ParseError("unexpected end of input", tok.offset)
        raise ParseError(f"expected an operand, found {tok.text!r}", tok.offset)


def parse(text: str) -> Expr:
    return _Parser(text).parse()


def max_variable(ast: Expr) -> int:
    """Largest variable index in the tree (0 if there is none)."""
    if isinstance(ast, Var):
        return ast.index
    if isinstance(ast, Const):
        return 0
    if isinstance(ast, (Neg, Adj)):
        return max_variable(ast.operand)
    if isinstance(ast, Pow):
        return max_variable(ast.base)
    return max(max_variable(ast.left), max_variable(ast.right))


def lower(ast: Expr, n: int) -> NcPoly:
    """Expand an expression tree into a canonical polynomial in ``n`` variables."""
    if isinstance(ast, Const):
        return NcPoly.const(ast.value, n)
    if isinstance(ast, Var):
        if ast.index > n:
            raise VariableOutOfRange(f"x{ast.index} used but only {n} variables are declared")
        return NcPoly.var(ast.index, n)
    if isinstance(ast, Add):
        return lower(ast.left, n) + lower(ast.right, n)
    if isinstance(ast, Sub):
        return lower(ast.left, n) - lower(ast.right, n)
    if isinstance(ast, Neg):
        return -lower(ast.operand, n)
    if isinstance(ast, Mul):
        return lower(ast.left, n) * lower(ast.right, n)
    if isinstance(ast, Pow):
        return lower(ast.base, n) ** ast.exponent
    if isinstance(ast, Adj):
        return lower(ast.operand, n).adjoint()
    raise TypeError(f"not an expression node: {ast!r}")


def parse_poly(text: str, n: int | None = None) -> NcPoly:
    """Parse and lower; ``n`` defaults to the largest variable index (at least 1)."""
    ast = parse(text)
    if n is None:
        n = max(1, max_variable(ast))
    return lower(ast, n)


# --- formatting ----------------------------------------------------------------------

def _word_text(w: Word) -> str:
    return "*".join(f"x{k}" for k in w)


def _split_sign(c: Scalar) -> tuple[bool, Scalar]:
    """(negative?, magnitude-ish) for coefficients that print without parentheses."""
    if c.im == 0:
        return c.re < 0, Scalar(abs(c.re))
    if c.re == 0:
        return c.im < 0, Scalar(0, abs(c.im))
    return False, c


def _coef_text(c: Scalar) -> str:
    # c is nonnegative real, positive imaginary, or a general complex number
    if c.im == 0:
        return str(c.re)
    if c.re == 0:
        return "i" if c.im == 1 else f"{c.im}*i"
    sign = "+" if c.im > 0 else "-"
    mag = abs(c.im)
    imag = "i" if mag == 1 else f"{mag}*i"
    return f"({c.re}{sign}{imag})"


def _term_text(c: Scalar, body: str) -> tuple[bool, str]:
    neg, mag = _split_sign(c)
    if not body:
        return neg, _coef_text(mag)
    if mag == ONE:
        return neg, body
    return neg, f"{_coef_text(mag)}*{body}"


def _join(parts: list[tuple[bool, str]]) -> str:
    if not parts:
        return "0"
    out = []
    for k, (neg, text) in enumerate(parts):
        if k == 0:
            out.append(f"-{text}" if neg else text)
        else:
            out.append(f" - {text}" if neg else f" + {text}")
    return "".join(out)


def format_poly(P: NcPoly) -> str:
    """Canonical text; ``parse_poly(format_poly(P), P.n) == P`` for exact P."""
    parts = []
    for w, c in P.terms():
        if not isinstance(c, Scalar):
            parts.append((False, f"({c.real!r}{c.imag:+.17g}*i)*{_word_text(w)}" if w else f"({c!r})"))
            continue
        parts.append(_term_text(c, _word_text(w)))
    return _join(parts)


def format_tensor(T) -> str:
    parts = []
    for (a, b), c in T.terms():
        body = f"{_word_text(a) or '1'}⊗{_word_text(b) or '1'}"
        if not isinstance(c, Scalar):
            parts.append((False, f"({c!r})*({body})"))
            continue
        neg, mag = _split_sign(c)
        parts.append((neg, body if mag == ONE else f"{_coef_text(mag)}*({body})"))
    return _join(parts)
