"""Minimal recursive-descent parser for weight expressions.

Grammar (``^`` is right-associative, usual precedence):

    expr   := term   (('+' | '-') term)*
    term   := unary  (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'x' | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Functions: ``exp``, ``log``, ``pow``.  Evaluation is vectorized over
numpy arrays.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

__all__ = ["Expression", "ExpressionError", "parse_expression"]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)

_FUNCTIONS = {"exp": 1, "log": 1, "pow": 2}


class ExpressionError(ValueError):
    """Raised for malformed weight expression text."""


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character at position {pos}: {text[pos:]!r}")
        if m.group("num") is not None:
            tokens.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    tokens.append(("end", None))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r} in {self.text!r}")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise ExpressionError(f"trailing input in {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            rhs = self.unary()
            node = ("mul" if op == "*" else "div", node, rhs)
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return ("pow", base, self.unary())
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("num", val)
        if kind == "name":
            if val == "x":
                return ("var",)
            if val in _FUNCTIONS:
                self.expect_op("(")
                args = [self.expr()]
                while self.peek() == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect_op(")")
                if len(args) != _FUNCTIONS[val]:
                    raise ExpressionError(f"{val} takes {_FUNCTIONS[val]} argument(s)")
                return ("call", val, tuple(args))
            raise ExpressionError(f"unknown name {val!r} (only x, exp, log, pow)")
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(f"unexpected token {val!r} in {self.text!r}")


def _eval(node, x):
    op = node[0]
    if op == "num":
        return np.full_like(x, node[1]) if np.ndim(x) else node[1]
    if op == "var":
        return x
    if op == "neg":
        return -_eval(node[1], x)
    if op == "add":
        return _eval(node[1], x) + _eval(node[2], x)
    if op == "sub":
        return _eval(node[1], x) - _eval(node[2], x)
    if op == "mul":
        return _eval(node[1], x) * _eval(node[2], x)
    if op == "div":
        return _eval(node[1], x) / _eval(node[2], x)
    if op == "pow":
        return _eval(node[1], x) ** _eval(node[2], x)
    if op == "call":
        name, args = node[1], node[2]
        if name == "exp":
            return np.exp(_eval(args[0], x))
        if name == "log":
            return np.log(_eval(args[0], x))
        if name == "pow":
            return _eval(args[0], x) ** _eval(args[1], x)
    raise ExpressionError(f"bad node {node!r}")


@dataclass(frozen=True)
class Expression:
    """Parsed arithmetic expression in the variable x."""

    text: str
    ast: tuple

    def __call__(self, x):
        return _eval(self.ast, np.asarray(x, dtype=float))


def parse_expression(text: str) -> Expression:
    node = _Parser(text).parse()
    return Expression(text=text, ast=node)
