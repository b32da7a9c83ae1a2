import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meanfix.expr import (BinOp, Call, EvalError, Neg, Num, ParseError, Var,
                          evaluate, format_expr, parse)


class TestParseEval:
    def test_saddle(self):
        assert evaluate(parse("x^2 - y^2"), x=1, y=2) == -3

    def test_precedence(self):
        assert evaluate(parse("2+3*x"), x=1) == 5

    def test_power_right_associative(self):
        assert evaluate(parse("2^3^2")) == 512

    def test_unary_minus_below_power(self):
        # precedence ^ > unary minus: -x^2 == -(x^2)
        assert evaluate(parse("-x^2"), x=3) == -9

    def test_negative_exponent(self):
        assert evaluate(parse("2^-3")) == 0.125

    def test_sin_zero(self):
        assert evaluate(parse("sin(0)")) == 0

    def test_cos_theta(self):
        assert evaluate(parse("cos(theta)"), theta=math.pi) == pytest.approx(-1)

    def test_hypot(self):
        assert evaluate(parse("sqrt(x*x+y*y)"), x=3, y=4) == pytest.approx(5)

    def test_division(self):
        assert evaluate(parse("(1+3)/8")) == 0.5

    def test_scientific_literals(self):
        assert evaluate(parse("1e-2 + 2.5E3")) == pytest.approx(2500.01)


class TestParseErrors:
    def test_invalid_character_position(self):
        with pytest.raises(ParseError) as e:
            parse("1 + $")
        assert e.value.position == 4

    def test_unbalanced_parens(self):
        with pytest.raises(ParseError):
            parse("(1 + 2")
        with pytest.raises(ParseError):
            parse("sin(x")

    def test_trailing_input(self):
        with pytest.raises(ParseError, match="trailing"):
            parse("1 + 2 3")

    def test_unknown_identifier(self):
        with pytest.raises(ParseError, match="unknown identifier"):
            parse("1 + z")

    def test_empty(self):
        with pytest.raises(ParseError):
            parse("")


class TestEvalErrors:
    def test_log_nonpositive(self):
        with pytest.raises(EvalError):
            evaluate(parse("log(x)"), x=0.0)
        with pytest.raises(EvalError):
            evaluate(parse("log(0 - 1)"))

    def test_division_by_zero(self):
        with pytest.raises(EvalError):
            evaluate(parse("1/x"), x=0.0)

    def test_sqrt_negative(self):
        with pytest.raises(EvalError):
            evaluate(parse("sqrt(0-4)"))

    def test_fractional_power_of_negative(self):
        with pytest.raises(EvalError):
            evaluate(parse("(0-8)^0.5"))


# ---------------------------------------------------------------------------
# random tree corpus


def random_tree(rng, depth=0):
    choice = rng.random()
    if depth >= 4 or choice < 0.30:
        if rng.random() < 0.5:
            return Num(round(float(rng.uniform(0, 10)), 3))
        return Var(rng.choice(["x", "y", "theta"]))
    if choice < 0.40:
        return Neg(random_tree(rng, depth + 1))
    if choice < 0.55:
        fn = rng.choice(["sin", "cos", "exp", "abs"])
        return Call(fn, random_tree(rng, depth + 1))
    op = rng.choice(["+", "-", "*", "/", "^"])
    left = random_tree(rng, depth + 1)
    right = random_tree(rng, depth + 1)
    if op == "^":
        # keep powers tame and real: base |.|+1, small constant exponent
        left = Call("abs", left)
        right = Num(float(rng.integers(0, 3)))
    return BinOp(op, left, right)


def test_print_parse_idempotent_on_corpus():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        tree = random_tree(rng)
        text = format_expr(tree)
        reparsed = parse(text)
        assert reparsed == tree
        assert format_expr(reparsed) == text


# ---------------------------------------------------------------------------
# reference shunting-yard evaluator (independent oracle)

_TOK = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+|\d+(?:[eE][+-]?\d+)?)"
                  r"|([A-Za-z_][A-Za-z_0-9]*)|(.))")

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "u-": 3, "^": 4}
_RIGHT = {"^", "u-"}
_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp,
          "log": math.log, "abs": abs, "sqrt": math.sqrt}


def shunting_yard_eval(text, env):
    tokens = []
    for num, name, op in _TOK.findall(text):
        if num:
            tokens.append(("num", float(num)))
        elif name:
            tokens.append(("name", name))
        elif op.strip():
            tokens.append(("op", op))
    out, stack = [], []
    prev = None
    for kind, val in tokens:
        if kind == "num":
            out.append(("num", val))
        elif kind == "name":
            if val in _FUNCS:
                stack.append(("func", val))
            else:
                out.append(("var", val))
        elif val == "(":
            stack.append(("op", "("))
        elif val == ")":
            while stack and stack[-1] != ("op", "("):
                out.append(stack.pop())
            stack.pop()
            if stack and stack[-1][0] == "func":
                out.append(stack.pop())
        else:
            op = val
            if op == "-" and (prev is None or prev == ("op", "(")
                              or (prev[0] == "op" and prev[1] not in ")")):
                op = "u-"
            while stack and stack[-1][0] == "op" and stack[-1][1] != "(":
                top = stack[-1][1]
                if (_PREC[top] > _PREC[op]
                        or (_PREC[top] == _PREC[op] and op not in _RIGHT)):
                    out.append(stack.pop())
                else:
                    break
            stack.append(("op", op))
        prev = (kind if kind != "name" else ("name"), val) if kind != "op" else ("op", val)
    while stack:
        out.append(stack.pop())

    ev = []
    for kind, val in out:
        if kind == "num":
            ev.append(val)
        elif kind == "var":
            ev.append(env[val])
        elif kind == "func":
            ev.append(_FUNCS[val](ev.pop()))
        elif val == "u-":
            ev.append(-ev.pop())
        else:
            b, a = ev.pop(), ev.pop()
            ev.append({"+": a + b, "-": a - b, "*": a * b,
                       "/": a / b if b != 0 else math.nan,
                       "^": a ** b}[val])
    assert len(ev) == 1
    return ev[0]


def test_eval_matches_shunting_yard_reference():
    rng = np.random.default_rng(99)
    checked = 0
    attempts = 0
    while checked < 1000 and attempts < 5000:
        attempts += 1
        tree = random_tree(rng)
        text = format_expr(tree)
        env = {"x": float(rng.uniform(-3, 3)), "y": float(rng.uniform(-3, 3)),
               "theta": float(rng.uniform(-3, 3))}
        try:
            mine = evaluate(parse(text), **env)
            ref = shunting_yard_eval(text, env)
        except (EvalError, OverflowError, ZeroDivisionError, ValueError):
            continue
        if not math.isfinite(ref) or not math.isfinite(mine):
            continue
        assert mine == pytest.approx(ref, rel=1e-12, abs=1e-12)
        checked += 1
    assert checked == 1000


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_roundtrip_random_trees(seed):
    rng = np.random.default_rng(seed)
    tree = random_tree(rng)
    assert parse(format_expr(tree)) == tree
