"""Arithmetic expression evaluation for the calculator tools.

Supports + - * / with parentheses and unary sign over integer or decimal
literals. Parsing is recursive descent; evaluation is exact (Fractions),
then the result is rounded half-away-from-zero to three decimal places
and rendered without a decimal point when integral ("6", not "6.000").
"""

from __future__ import annotations

import re
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

__all__ = ["ArithmeticError_", "eval_arithmetic", "render_number"]

_TOKEN = re.compile(r"\s*(\d+(?:\.\d+)?|[()+\-*/])")


class ArithmeticError_(ValueError):
    """Malformed expression or division by zero."""


def _tokenize(expr: str) -> list[str]:
    tokens = []
    pos = 0
    while pos < len(expr):
        match = _TOKEN.match(expr, pos)
        if match is None:
            rest = expr[pos:].strip()
            if not rest:
                break
            raise ArithmeticError_(f"unexpected character {rest[0]!r}")
        tokens.append(match.group(1))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[str]) -> None:
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        token = self.peek()
        if token is None:
            raise ArithmeticError_("unexpected end of expression")
        self.pos += 1
        return token

    def expr(self) -> Fraction:
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> Fraction:
        value = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.factor()
            if op == "*":
                value = value * rhs
            else:
                if rhs == 0:
                    raise ArithmeticError_("division by zero")
                value = value / rhs
        return value

    def factor(self) -> Fraction:
        sign = 1
        while self.peek() in ("+", "-"):
            if self.take() == "-":
                sign = -sign
        return sign * self.primary()

    def primary(self) -> Fraction:
        token = self.take()
        if token == "(":
            value = self.expr()
            if self.take() != ")":
                raise ArithmeticError_("missing closing parenthesis")
            return value
        if token in ")+-*/":
            raise ArithmeticError_(f"unexpected token {token!r}")
        return Fraction(token)


def render_number(value: Fraction | Decimal | float | int) -> str:
    """Round to 3 decimals (ties away from zero) and strip dead zeros."""
    if isinstance(value, Fraction):
        dec = Decimal(value.numerator) / Decimal(value.denominator)
    elif isinstance(value, Decimal):
        dec = value
    else:
        dec = Decimal(repr(value))
    rounded = dec.quantize(Decimal("0.001"), rounding=ROUND_HALF_UP)
    if rounded == rounded.to_integral_value():
        return str(int(rounded))
    return str(rounded).rstrip("0").rstrip(".")


def eval_arithmetic(expr: str) -> str:
    """Evaluate an arithmetic expression to its rendered decimal string.

    Raises ArithmeticError_ on malformed input or division by zero; tool
    executors translate that into an unparsable response.
    """
    tokens = _tokenize(expr)
    if not tokens:
        raise ArithmeticError_("empty expression")
    parser = _Parser(tokens)
    value = parser.expr()
    if parser.peek() is not None:
        raise ArithmeticError_(f"trailing input at token {parser.peek()!r}")
    return render_number(value)
