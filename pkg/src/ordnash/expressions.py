"""Tiny arithmetic expression language for utilities and contour coefficients.

Grammar (infix, conventional precedence):

    expr     := term (('+' | '-') term)*
    term     := factor (('*' | '/') factor)*
    factor   := '-' factor | power
    power    := atom ('^' exponent)*
    exponent := ['-'] INTEGER
    atom     := NUMBER | VARIABLE | '(' expr ')'

Variables are the profile coordinates ``x1 .. xn`` (1-based in the surface
syntax, 0-based internally).  Exponents are restricted to integer literals so
expressions stay real-valued on all of R^n.

Two evaluation routes are provided on purpose: :meth:`Expr.evaluate` walks the
tree (reference semantics), while :func:`compile_expression` emits a plain
numpy lambda for hot loops.  Tests hold the two routes to agreement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ExpressionError

__all__ = [
    "Expr",
    "Literal",
    "Variable",
    "Negate",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Power",
    "parse_expression",
    "compile_expression",
]


class Expr:
    """Base class for expression nodes."""

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        """Evaluate with ``values[..., i]`` bound to variable ``x(i+1)``."""
        raise NotImplementedError

    def variables(self) -> frozenset[int]:
        """Zero-based indices of the variables referenced by this node."""
        raise NotImplementedError

    def _emit(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Literal(Expr):
    value: float

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.float64(self.value), np.shape(values)[:-1]).copy()

    def variables(self) -> frozenset[int]:
        return frozenset()

    def _emit(self) -> str:
        return repr(self.value)


@dataclass(frozen=True)
class Variable(Expr):
    index: int  # zero-based profile coordinate

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64)[..., self.index]

    def variables(self) -> frozenset[int]:
        return frozenset({self.index})

    def _emit(self) -> str:
        return f"v[..., {self.index}]"


@dataclass(frozen=True)
class Negate(Expr):
    operand: Expr

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        return -self.operand.evaluate(values)

    def variables(self) -> frozenset[int]:
        return self.operand.variables()

    def _emit(self) -> str:
        return f"(-{self.operand._emit()})"


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        return self.left.evaluate(values) + self.right.evaluate(values)

    def variables(self) -> frozenset[int]:
        return self.left.variables() | self.right.variables()

    def _emit(self) -> str:
        return f"({self.left._emit()} + {self.right._emit()})"


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        return self.left.evaluate(values) - self.right.evaluate(values)

    def variables(self) -> frozenset[int]:
        return self.left.variables() | self.right.variables()

    def _emit(self) -> str:
        return f"({self.left._emit()} - {self.right._emit()})"


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        return self.left.evaluate(values) * self.right.evaluate(values)

    def variables(self) -> frozenset[int]:
        return self.left.variables() | self.right.variables()

    def _emit(self) -> str:
        return f"({self.left._emit()} * {self.right._emit()})"


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.left.evaluate(values) / self.right.evaluate(values)

    def variables(self) -> frozenset[int]:
        return self.left.variables() | self.right.variables()

    def _emit(self) -> str:
        return f"({self.left._emit()} / {self.right._emit()})"


@dataclass(frozen=True)
class Power(Expr):
    base: Expr
    exponent: int

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.base.evaluate(values) ** self.exponent

    def variables(self) -> frozenset[int]:
        return self.base.variables()

    def _emit(self) -> str:
        return f"({self.base._emit()} ** {self.exponent})"


_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<var>x\d+)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad = len(text) - len(stripped)
            raise ExpressionError(f"unexpected character {text[bad]!r}", bad)
        kind = match.lastgroup
        tokens.append((kind, match.group(kind), match.start(kind)))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self) -> tuple[str, str, int]:
        token = self.peek()
        if token is None:
            raise ExpressionError("unexpected end of expression", len(self.text))
        self.pos += 1
        return token

    def expect_op(self, symbol: str) -> None:
        token = self.advance()
        if token[0] != "op" or token[1] != symbol:
            raise ExpressionError(f"expected {symbol!r}, found {token[1]!r}", token[2])

    def parse(self) -> Expr:
        node = self.expr()
        leftover = self.peek()
        if leftover is not None:
            raise ExpressionError(f"trailing input {leftover[1]!r}", leftover[2])
        return node

    def expr(self) -> Expr:
        node = self.term()
        while (token := self.peek()) is not None and token[1] in "+-":
            self.advance()
            right = self.term()
            node = Add(node, right) if token[1] == "+" else Sub(node, right)
        return node

    def term(self) -> Expr:
        node = self.factor()
        while (token := self.peek()) is not None and token[1] in "*/":
            self.advance()
            right = self.factor()
            node = Mul(node, right) if token[1] == "*" else Div(node, right)
        return node

    def factor(self) -> Expr:
        token = self.peek()
        if token is not None and token[0] == "op" and token[1] == "-":
            self.advance()
            return Negate(self.factor())
        return self.power()

    def power(self) -> Expr:
        node = self.atom()
        while (token := self.peek()) is not None and token[1] == "^":
            self.advance()
            node = Power(node, self.integer_exponent())
        return node

    def integer_exponent(self) -> int:
        sign = 1
        token = self.advance()
        if token[0] == "op" and token[1] == "-":
            sign = -1
            token = self.advance()
        if token[0] != "number" or any(c in token[1] for c in ".eE"):
            raise ExpressionError("exponent must be an integer literal", token[2])
        return sign * int(token[1])

    def atom(self) -> Expr:
        token = self.advance()
        kind, text, position = token
        if kind == "number":
            return Literal(float(text))
        if kind == "var":
            index = int(text[1:])
            if index < 1:
                raise ExpressionError("variables are numbered from x1", position)
            return Variable(index - 1)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(f"unexpected token {text!r}", position)


def parse_expression(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises :class:`ExpressionError` with the offending position on bad input.
    """
    if not text or not text.strip():
        raise ExpressionError("empty expression", 0)
    return _Parser(text).parse()


def compile_expression(expr: Expr):
    """Return a fast ``f(values) -> ndarray`` equivalent of ``expr.evaluate``.

    The generated source uses only indexing and arithmetic on the input
    array, so it is safe to ``eval`` and keeps numpy broadcasting semantics.
    """
    source = f"lambda v: {expr._emit()}"
    return eval(source, {"__builtins__": {}}, {})
