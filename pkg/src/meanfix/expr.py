"""Arithmetic expressions for boundary data and reference solutions.

Grammar (recursive descent, precedence low to high):

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?          # right-associative, binds above unary minus
    atom    := number | 'x' | 'y' | 'theta' | func '(' expr ')' | '(' expr ')'
    func    := sin | cos | exp | log | abs | sqrt

Evaluation is IEEE double precision; domain faults (log of a non-positive
value, division by zero, even root of a negative) raise EvalError instead of
producing NaN.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # x | y | theta


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Num | Var | Neg | BinOp | Call

VARIABLES = ("x", "y", "theta")
FUNCTIONS = ("sin", "cos", "exp", "log", "abs", "sqrt")

_TOKEN_RE = re.compile(r"""
    (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"invalid character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, val, pos = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, found {val or 'end of input'!r}", pos)
        return self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {val!r}", pos)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = BinOp(val, node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = BinOp(val, node, self.factor())
            else:
                return node

    def factor(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            # recursing through factor makes ^ right-associative and lets the
            # exponent carry a unary minus (2^-3)
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in VARIABLES:
                return Var(val)
            if val in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse(text: str) -> Expr:
    return _Parser(text).parse()


def evaluate(expr: Expr, x: float = 0.0, y: float = 0.0, theta: float = 0.0) -> float:
    bindings = {"x": x, "y": y, "theta": theta}
    return _eval(expr, bindings)


def _eval(node: Expr, env: dict[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        v = _eval(node.arg, env)
        if node.func == "sin":
            return math.sin(v)
        if node.func == "cos":
            return math.cos(v)
        if node.func == "exp":
            try:
                return math.exp(v)
            except OverflowError as exc:
                raise EvalError(f"exp overflow at {v}") from exc
        if node.func == "log":
            if v <= 0:
                raise EvalError(f"log of non-positive value {v}")
            return math.log(v)
        if node.func == "abs":
            return abs(v)
        if node.func == "sqrt":
            if v < 0:
                raise EvalError(f"sqrt of negative value {v}")
            return math.sqrt(v)
        raise EvalError(f"unknown function {node.func}")
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            if b == 0:
                raise EvalError("division by zero")
            return a / b
        if node.op == "^":
            try:
                r = a ** b
            except (OverflowError, ZeroDivisionError) as exc:
                raise EvalError(f"cannot raise {a} to {b}") from exc
            if isinstance(r, complex):
                raise EvalError(f"non-real power {a}^{b}")
            return r
    raise EvalError(f"malformed expression node {node!r}")


_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def format_expr(node: Expr) -> str:
    """Unparse; parse(format_expr(e)) reproduces the same tree."""
    return _fmt(node, 0)


def _fmt(node: Expr, parent_prec: int) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({_fmt(node.arg, 0)})"
    if isinstance(node, Neg):
        s = "-" + _fmt(node.operand, _PRECEDENCE["neg"])
        return f"({s})" if parent_prec > _PRECEDENCE["neg"] else s
    if isinstance(node, BinOp):
        prec = _PRECEDENCE[node.op]
        if node.op == "^":
            # right-associative; left side needs parens at equal precedence
            left = _fmt(node.left, prec + 1)
            right = _fmt(node.right, prec)
        else:
            left = _fmt(node.left, prec)
            right = _fmt(node.right, prec + 1)
        s = f"{left} {node.op} {right}"
        return f"({s})" if parent_prec > prec else s
    raise ValueError(f"unknown node {node!r}")
