"""Recursive-descent parser for the expression grammar.

    expr   := ['-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' signed-integer)?
    atom   := number | ident | '(' expr ')' | func '(' expr ')'
    func   := sin | cos | exp | log | sqrt
    ident  := 't' | qI | qI_t | qI_tt | pI | 'p' | parameter-name

Numbers are parsed exactly: integer and decimal literals (including
scientific notation) become rationals.  Identifiers resolve against the
declared dimension and parameter list.
"""

from __future__ import annotations

import re
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Sequence

from . import symbols as sy
from .expr import FUNCTIONS, Expr, add, div, fn, mul, neg, num, pow_, sym

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_IDENT_FORM = re.compile(r"^(?:q(?P<qi>\d+)(?P<suffix>_tt|_t)?|p(?P<pi>\d+))$")


class ParseError(ValueError):
    """Syntax or resolution error, carrying the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


def _number_value(text: str, pos: int) -> Fraction:
    try:
        return Fraction(Decimal(text))
    except InvalidOperation:
        raise ParseError(f"bad number literal {text!r}", pos) from None


class _Parser:
    def __init__(self, text: str, dimension: int, params: Sequence[str]):
        self.text = text
        self.dimension = dimension
        self.params = set(params)
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def _advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _expect_op(self, op: str):
        tok = self.cur
        if tok.kind != "op" or tok.text != op:
            raise ParseError(f"expected {op!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return self._advance()

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.cur
        if tok.kind != "end":
            raise ParseError(f"trailing input {tok.text!r}", tok.pos)
        return e

    def expr(self) -> Expr:
        parts = [self.term()]
        while self.cur.kind == "op" and self.cur.text in "+-":
            op = self._advance().text
            t = self.term()
            parts.append(t if op == "+" else neg(t))
        return add(*parts)

    def term(self) -> Expr:
        negate = False
        while self.cur.kind == "op" and self.cur.text == "-":
            self._advance()
            negate = not negate
        e = self.factor()
        while self.cur.kind == "op" and self.cur.text in "*/":
            op = self._advance().text
            f = self.factor()
            e = mul(e, f) if op == "*" else div(e, f)
        return neg(e) if negate else e

    def factor(self) -> Expr:
        e = self.atom()
        if self.cur.kind == "op" and self.cur.text == "^":
            self._advance()
            sign = 1
            if self.cur.kind == "op" and self.cur.text == "-":
                self._advance()
                sign = -1
            tok = self.cur
            if tok.kind != "number" or not tok.text.isdigit():
                raise ParseError("exponent must be a signed integer", tok.pos)
            self._advance()
            e = pow_(e, sign * int(tok.text))
        return e

    def atom(self) -> Expr:
        tok = self.cur
        if tok.kind == "number":
            self._advance()
            return num(_number_value(tok.text, tok.pos))
        if tok.kind == "op" and tok.text == "(":
            self._advance()
            e = self.expr()
            self._expect_op(")")
            return e
        if tok.kind == "ident":
            self._advance()
            if tok.text in FUNCTIONS and self.cur.kind == "op" and self.cur.text == "(":
                self._advance()
                arg = self.expr()
                self._expect_op(")")
                return fn(tok.text, arg)
            return sym(self._resolve(tok))
        raise ParseError(f"expected a value, found {tok.text or 'end of input'!r}", tok.pos)

    def _resolve(self, tok: _Token) -> sy.Symbol:
        name = tok.text
        if name == "t":
            return sy.TIME
        if name == "p":
            return sy.HOMOGENEOUS_MOMENTUM
        m = _IDENT_FORM.match(name)
        if m:
            if m.group("qi") is not None:
                i = int(m.group("qi"))
                self._check_index(i, tok)
                suffix = m.group("suffix")
                if suffix == "_t":
                    return sy.velocity(i)
                if suffix == "_tt":
                    return sy.acceleration(i)
                return sy.coord(i)
            i = int(m.group("pi"))
            self._check_index(i, tok)
            return sy.momentum(i)
        if name in self.params:
            return sy.parameter(name)
        raise ParseError(f"unknown identifier {name!r}", tok.pos)

    def _check_index(self, i: int, tok: _Token):
        if not 1 <= i <= self.dimension:
            raise ParseError(
                f"index {i} out of range for dimension {self.dimension} in {tok.text!r}", tok.pos
            )


def parse(text: str, dimension: int, params: Sequence[str] = ()) -> Expr:
    """Parse an expression string into a normalized Expr."""
    return _Parser(text, dimension, params).parse()
