"""Tiny arithmetic language for control components.

Grammar (precedence low to high)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 't' | 'pi' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := sin | cos | sinh | cosh

``^`` is right-associative. Whitespace is ignored.
"""

from __future__ import annotations

import math
import re
from typing import Callable

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\S))")
FUNCS = {"sin": math.sin, "cos": math.cos, "sinh": math.sinh, "cosh": math.cosh}


class ExprError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at column {pos + 1} in {text!r}")
        self.pos = pos


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        start = m.start(m.lastindex)
        num, name, sym = m.groups()
        if num is not None:
            out.append(("num", float(num), start))
        elif name is not None:
            out.append(("name", name, start))
        else:
            out.append(("sym", sym, start))
        pos = m.end()
    out.append(("end", None, len(text)))
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

    def expect(self, sym):
        tok = self.take()
        if tok[:2] != ("sym", sym):
            raise ExprError(f"expected {sym!r}", self.text, tok[2])

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprError("unexpected token", self.text, tok[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (("sym", "+"), ("sym", "-")):
            op = self.take()[1]
            rhs = self.term()
            node = _binop(op, node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[:2] in (("sym", "*"), ("sym", "/")):
            op = self.take()[1]
            rhs = self.unary()
            node = _binop(op, node, rhs)
        return node

    def unary(self):
        if self.peek()[:2] == ("sym", "-"):
            self.take()
            inner = self.unary()
            return lambda t: -inner(t)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("sym", "^"):
            self.take()
            exp = self.unary()
            return lambda t: base(t) ** exp(t)
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return lambda t: val
        if kind == "name":
            if val == "t":
                return lambda t: t
            if val == "pi":
                return lambda t: math.pi
            if val in FUNCS:
                f = FUNCS[val]
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return lambda t: f(arg(t))
            raise ExprError(f"unknown name {val!r}", self.text, pos)
        if (kind, val) == ("sym", "("):
            node = self.expr()
            self.expect(")")
            return node
        raise ExprError("unexpected token", self.text, pos)


def _binop(op, a, b):
    if op == "+":
        return lambda t: a(t) + b(t)
    if op == "-":
        return lambda t: a(t) - b(t)
    if op == "*":
        return lambda t: a(t) * b(t)
    return lambda t: a(t) / b(t)


def compile_expr(text: str | float | int) -> Callable[[float], float]:
    """Compile an expression in ``t`` into a float function."""
    if isinstance(text, (int, float)):
        value = float(text)
        return lambda t: value
    fn = _Parser(str(text)).parse()
    return lambda t: float(fn(float(t)))
