"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' factor)?
    base   := number | 'n' | 'pi' | 'u' '[' integer ']'
            | name '(' expr ')' | '(' expr ')' | '-' base
    name   := sin | cos | log | abs | sqrt | exp

Numbers are read exactly (``0.25`` becomes the rational 1/4).
"""

from __future__ import annotations

import re
from fractions import Fraction

from odelie.expr import (
    FUNCTIONS,
    N,
    PI,
    Expr,
    Func,
    Num,
    U,
    add,
    div,
    mul,
    neg,
    power,
)


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()\[\]]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind not in ("op", "name"):
            raise ParseError(f"expected {value!r}, got {val or 'end of input'!r}", pos, self.text)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos, self.text)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            t = self.term()
            e = add(e, t) if op == "+" else add(e, neg(t))
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            f = self.factor()
            e = mul(e, f) if op == "*" else div(e, f)
        return e

    def factor(self) -> Expr:
        b = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            return power(b, self.factor())
        return b

    def base(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(Fraction(val))
        if kind == "op" and val == "-":
            return neg(self.base())
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if val == "n":
                return N
            if val == "pi":
                return PI
            if val == "u":
                self.expect("[")
                sign_tok = self.peek()
                if sign_tok[1] == "-":
                    raise ParseError("negative shift index", sign_tok[2], self.text)
                k_kind, k_val, k_pos = self.take()
                if k_kind != "num" or not k_val.isdigit():
                    raise ParseError("shift index must be a nonnegative integer", k_pos, self.text)
                self.expect("]")
                return U(int(k_val))
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(val, arg)
            raise ParseError(f"unknown function or name {val!r}", pos, self.text)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos, self.text)


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree (see module docstring for grammar)."""
    return _Parser(text).parse()
