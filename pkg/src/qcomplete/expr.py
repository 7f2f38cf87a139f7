"""Small symbolic expression language over named real variables.

Supports parsing from a conventional infix grammar, exact symbolic
differentiation, and IEEE double evaluation.  Expressions are immutable
trees; all operations are pure functions, safe for concurrent use.

Grammar (whitespace insignificant)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | base ('^' factor)?
    base   := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so
``-t^2`` reads as ``-(t^2)``.  Known functions: ln, exp, sin, cos, sqrt,
abs, sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

__all__ = [
    "Expr",
    "ExprError",
    "ParseError",
    "UnknownFunctionError",
    "ArityError",
    "UnboundVariableError",
    "DomainError",
    "const",
    "var",
    "parse",
    "differentiate",
    "evaluate",
    "free_variables",
    "fold",
    "to_string",
]


class ExprError(Exception):
    """Base class for expression-layer errors."""


class ParseError(ExprError):
    """Malformed formula text; ``offset`` is the byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownFunctionError(ExprError):
    pass


class ArityError(ExprError):
    pass


class UnboundVariableError(ExprError):
    pass


class DomainError(ExprError):
    """Evaluation outside a function's domain (ln of non-positive, ...)."""


_FUNCTIONS = {"ln": 1, "exp": 1, "sin": 1, "cos": 1, "sqrt": 1, "abs": 1, "sign": 1}

# Node kinds: "const", "var", "neg", "add", "sub", "mul", "div", "pow", "call".
_BINARY = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


@dataclass(frozen=True)
class Expr:
    """Immutable expression node.

    ``value`` holds the constant for kind ``const``, ``name`` the variable
    or function name, ``args`` the child nodes.
    """

    kind: str
    value: float = 0.0
    name: str = ""
    args: tuple["Expr", ...] = ()

    def __post_init__(self):
        if self.kind == "const" and not math.isfinite(self.value):
            raise ValueError("constants must be finite")
        arity = {"const": 0, "var": 0, "neg": 1, "add": 2, "sub": 2,
                 "mul": 2, "div": 2, "pow": 2}
        if self.kind in arity and len(self.args) != arity[self.kind]:
            raise ValueError(f"{self.kind} node expects {arity[self.kind]} children")

    # Operator sugar used by the model-building modules.
    def __add__(self, other):
        return fold(Expr("add", args=(self, _coerce(other))))

    def __radd__(self, other):
        return fold(Expr("add", args=(_coerce(other), self)))

    def __sub__(self, other):
        return fold(Expr("sub", args=(self, _coerce(other))))

    def __rsub__(self, other):
        return fold(Expr("sub", args=(_coerce(other), self)))

    def __mul__(self, other):
        return fold(Expr("mul", args=(self, _coerce(other))))

    def __rmul__(self, other):
        return fold(Expr("mul", args=(_coerce(other), self)))

    def __truediv__(self, other):
        return fold(Expr("div", args=(self, _coerce(other))))

    def __rtruediv__(self, other):
        return fold(Expr("div", args=(_coerce(other), self)))

    def __pow__(self, other):
        return fold(Expr("pow", args=(self, _coerce(other))))

    def __neg__(self):
        return fold(Expr("neg", args=(self,)))

    def __str__(self):
        return to_string(self)


def const(value: float) -> Expr:
    return Expr("const", value=float(value))


def var(name: str) -> Expr:
    return Expr("var", name=name)


def _coerce(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return const(x)


# -- tokenizer / parser ------------------------------------------------------

def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*/^(),":
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            lit = text[i:j]
            try:
                float(lit)
            except ValueError:
                raise ParseError(f"bad number literal {lit!r}", i) from None
            tokens.append(("num", lit, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("ident", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, symbol: str):
        kind, val, off = self.peek()
        if kind != "op" or val != symbol:
            raise ParseError(f"expected {symbol!r}", off)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", off)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                rhs = self.term()
                e = Expr("add" if val == "+" else "sub", args=(e, rhs))
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                rhs = self.factor()
                e = Expr("mul" if val == "*" else "div", args=(e, rhs))
            else:
                return e

    def factor(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            inner = self.factor()
            if inner.kind == "const":
                return const(-inner.value)
            return Expr("neg", args=(inner,))
        e = self.base()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            return Expr("pow", args=(e, self.factor()))
        return e

    def base(self) -> Expr:
        kind, val, off = self.advance()
        if kind == "num":
            return const(float(val))
        if kind == "ident":
            nxt_kind, nxt_val, _ = self.peek()
            if nxt_kind == "op" and nxt_val == "(":
                self.advance()
                args = [self.expr()]
                while True:
                    k, v, o = self.peek()
                    if k == "op" and v == ",":
                        self.advance()
                        args.append(self.expr())
                    elif k == "op" and v == ")":
                        self.advance()
                        break
                    else:
                        raise ParseError("expected ',' or ')'", o)
                if val not in _FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {val!r}")
                if len(args) != _FUNCTIONS[val]:
                    raise ArityError(
                        f"{val} takes {_FUNCTIONS[val]} argument(s), got {len(args)}")
                return Expr("call", name=val, args=tuple(args))
            return var(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected token {val!r}" if val else "unexpected end of input", off)


def parse(text: str) -> Expr:
    """Parse formula text into an expression tree."""
    return _Parser(text).parse()


# -- evaluation --------------------------------------------------------------

def evaluate(e: Expr, bindings: Mapping[str, float]) -> float:
    """Evaluate ``e`` with every free variable bound to a real number."""
    if e.kind == "const":
        return e.value
    if e.kind == "var":
        try:
            return float(bindings[e.name])
        except KeyError:
            raise UnboundVariableError(f"unbound variable {e.name!r}") from None
    if e.kind == "neg":
        return -evaluate(e.args[0], bindings)
    if e.kind in ("add", "sub", "mul", "div", "pow"):
        a = evaluate(e.args[0], bindings)
        b = evaluate(e.args[1], bindings)
        return _apply_binary(e.kind, a, b)
    if e.kind == "call":
        x = evaluate(e.args[0], bindings)
        return _apply_function(e.name, x)
    raise ExprError(f"malformed node kind {e.kind!r}")


def _apply_binary(kind: str, a: float, b: float) -> float:
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        if b == 0.0:
            raise DomainError("division by zero")
        return a / b
    # pow
    if a == 0.0 and b < 0.0:
        raise DomainError("zero raised to a negative power")
    try:
        return math.pow(a, b)
    except ValueError:
        raise DomainError(f"pow domain error: ({a})^({b})") from None
    except OverflowError:
        return math.inf


def _apply_function(name: str, x: float) -> float:
    if name == "ln":
        if x <= 0.0:
            raise DomainError(f"ln of non-positive value {x}")
        return math.log(x)
    if name == "exp":
        try:
            return math.exp(x)
        except OverflowError:
            return math.inf
    if name == "sin":
        return math.sin(x)
    if name == "cos":
        return math.cos(x)
    if name == "sqrt":
        if x < 0.0:
            raise DomainError(f"sqrt of negative value {x}")
        return math.sqrt(x)
    if name == "abs":
        return abs(x)
    if name == "sign":
        return 0.0 if x == 0.0 else math.copysign(1.0, x)
    raise UnknownFunctionError(f"unknown function {name!r}")


def free_variables(e: Expr) -> frozenset[str]:
    if e.kind == "var":
        return frozenset((e.name,))
    out: frozenset[str] = frozenset()
    for a in e.args:
        out |= free_variables(a)
    return out


# -- folding -----------------------------------------------------------------

def fold(e: Expr) -> Expr:
    """Constant-fold and drop arithmetic identities (x+0, 1*x, x^1, ...).

    No canonical form is attempted beyond this; equality of expressions is
    decided by evaluation, not by rewriting.
    """
    if e.kind in ("const", "var"):
        return e
    args = tuple(fold(a) for a in e.args)
    e = Expr(e.kind, value=e.value, name=e.name, args=args)
    if all(a.kind == "const" for a in args):
        try:
            return const(evaluate(e, {}))
        except (DomainError, ValueError, OverflowError):
            return e
    if e.kind == "neg":
        (a,) = args
        if a.kind == "neg":
            return a.args[0]
        return e
    if e.kind in ("add", "sub", "mul", "div", "pow"):
        a, b = args
        if e.kind == "add":
            if _is_const(a, 0.0):
                return b
            if _is_const(b, 0.0):
                return a
        elif e.kind == "sub":
            if _is_const(b, 0.0):
                return a
            if _is_const(a, 0.0):
                return fold(Expr("neg", args=(b,)))
        elif e.kind == "mul":
            if _is_const(a, 0.0) or _is_const(b, 0.0):
                return const(0.0)
            if _is_const(a, 1.0):
                return b
            if _is_const(b, 1.0):
                return a
        elif e.kind == "div":
            if _is_const(a, 0.0) and not _is_const(b, 0.0):
                return const(0.0)
            if _is_const(b, 1.0):
                return a
        elif e.kind == "pow":
            if _is_const(b, 1.0):
                return a
            if _is_const(b, 0.0):
                return const(1.0)
    return e


def _is_const(e: Expr, v: float) -> bool:
    return e.kind == "const" and e.value == v


# -- differentiation ---------------------------------------------------------

def differentiate(e: Expr, name: str) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to variable ``name``.

    ``abs`` differentiates to ``sign`` (with sign(0) = 0), which is correct
    away from the kink; callers in this package only evaluate abs off zero.
    """
    return fold(_diff(e, name))


def _diff(e: Expr, name: str) -> Expr:
    if e.kind == "const":
        return const(0.0)
    if e.kind == "var":
        return const(1.0 if e.name == name else 0.0)
    if e.kind == "neg":
        return Expr("neg", args=(_diff(e.args[0], name),))
    if e.kind == "add" or e.kind == "sub":
        return Expr(e.kind, args=(_diff(e.args[0], name), _diff(e.args[1], name)))
    if e.kind == "mul":
        u, v = e.args
        du, dv = _diff(u, name), _diff(v, name)
        return Expr("add", args=(Expr("mul", args=(du, v)),
                                 Expr("mul", args=(u, dv))))
    if e.kind == "div":
        u, v = e.args
        du, dv = _diff(u, name), _diff(v, name)
        num = Expr("sub", args=(Expr("mul", args=(du, v)),
                                Expr("mul", args=(u, dv))))
        return Expr("div", args=(num, Expr("pow", args=(v, const(2.0)))))
    if e.kind == "pow":
        u, v = e.args
        du = _diff(u, name)
        if v.kind == "const":
            # c * u^(c-1) * u'
            return Expr("mul", args=(
                Expr("mul", args=(v, Expr("pow", args=(u, const(v.value - 1.0))))),
                du))
        dv = _diff(v, name)
        # u^v * (v' ln u + v u'/u)
        bracket = Expr("add", args=(
            Expr("mul", args=(dv, Expr("call", name="ln", args=(u,)))),
            Expr("mul", args=(v, Expr("div", args=(du, u))))))
        return Expr("mul", args=(e, bracket))
    if e.kind == "call":
        (u,) = e.args
        du = _diff(u, name)
        if e.name == "ln":
            outer = Expr("div", args=(const(1.0), u))
        elif e.name == "exp":
            outer = e
        elif e.name == "sin":
            outer = Expr("call", name="cos", args=(u,))
        elif e.name == "cos":
            outer = Expr("neg", args=(Expr("call", name="sin", args=(u,)),))
        elif e.name == "sqrt":
            outer = Expr("div", args=(const(0.5), e))
        elif e.name == "abs":
            outer = Expr("call", name="sign", args=(u,))
        elif e.name == "sign":
            outer = const(0.0)
        else:
            raise UnknownFunctionError(f"unknown function {e.name!r}")
        return Expr("mul", args=(outer, du))
    raise ExprError(f"malformed node kind {e.kind!r}")


# -- printing ----------------------------------------------------------------

_PRECEDENCE = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def to_string(e: Expr) -> str:
    """Render an expression; ``parse(to_string(e))`` recovers folded trees."""
    return _render(e, 0)


def _render(e: Expr, parent_prec: int) -> str:
    if e.kind == "const":
        if e.value < 0 or (e.value == 0 and math.copysign(1.0, e.value) < 0):
            text = "(" + _fmt_number(e.value) + ")"
            return text
        return _fmt_number(e.value)
    if e.kind == "var":
        return e.name
    if e.kind == "call":
        return f"{e.name}({_render(e.args[0], 0)})"
    prec = _PRECEDENCE[e.kind]
    if e.kind == "neg":
        body = "-" + _render(e.args[0], prec)
    elif e.kind == "pow":
        # right-associative: left child needs parens at equal precedence
        body = _render(e.args[0], prec + 1) + "^" + _render(e.args[1], prec)
    else:
        lhs = _render(e.args[0], prec)
        rhs = _render(e.args[1], prec + 1)
        body = f"{lhs}{_BINARY[e.kind]}{rhs}"
    if prec < parent_prec:
        return "(" + body + ")"
    return body


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)
