"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | '+' factor | base ('^' factor)?
    base   := number | ident | '(' expr ')' | ('exp'|'log') '(' expr ')'

Numbers are integers or decimals and are read exactly.  Unary signs are
accepted at factor level so that inputs like ``exp(-d*x1)`` parse.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable

from . import tree as T

__all__ = ["parse", "ParseError"]

FUNCTIONS = {"exp": T.exp, "log": T.log}

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^(),])
""", re.VERBOSE)


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        caret = f"\n  {text}\n  {' ' * position}^" if text else ""
        super().__init__(f"{message} at position {position}{caret}")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            if val == "**":
                val = "^"
            out.append((kind, val, pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, vars_, params):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.vars = set(vars_)
        self.params = set(params)
        clash = self.vars & self.params
        if clash:
            raise ValueError(f"names declared as both variable and parameter: {sorted(clash)}")
        reserved = (self.vars | self.params) & set(FUNCTIONS)
        if reserved:
            raise ValueError(f"reserved function names used as symbols: {sorted(reserved)}")

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, found {found}", pos, self.text)

    def error(self, message):
        raise ParseError(message, self.peek()[2], self.text)

    def parse(self):
        if self.peek()[0] == "end":
            self.error("empty expression")
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos, self.text)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            e = T.add(e, rhs) if op == "+" else T.sub(e, rhs)
        return e

    def term(self):
        e = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            _, op, pos = self.take()
            rhs = self.factor()
            if op == "*":
                e = T.mul(e, rhs)
            else:
                try:
                    e = T.div(e, rhs)
                except ZeroDivisionError:
                    raise ParseError("division by zero", pos, self.text) from None
        return e

    def factor(self):
        kind, val, pos = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.take()
            inner = self.factor()
            return T.neg(inner) if val == "-" else inner
        base = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            caret = self.take()[2]
            ex = self.factor()
            if isinstance(ex, T.Const) and ex.value.denominator == 1:
                try:
                    return T.power(base, int(ex.value))
                except ZeroDivisionError:
                    raise ParseError("zero raised to a negative power", caret, self.text) from None
            if T.free_vars(ex):
                raise ParseError("exponent depends on a state variable", caret, self.text)
            return T.rpow(base, ex)
        return base

    def base(self):
        kind, val, pos = self.take()
        if kind == "num":
            return T.Const(Fraction(val))
        if kind == "ident":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                try:
                    return FUNCTIONS[val](arg)
                except T.DomainError as exc:
                    raise ParseError(str(exc), pos, self.text) from None
            if val in self.vars:
                return T.Var(val)
            if val in self.params:
                return T.Param(val)
            raise ParseError(f"undeclared identifier {val!r}", pos, self.text)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {found}", pos, self.text)


def parse(text: str, vars: Iterable[str] = (), params: Iterable[str] = ()) -> T.Expr:
    """Parse ``text`` over declared state variables and parameters."""
    return _Parser(text, vars, params).parse()
