"""Recursive-descent parser for polynomial expressions.

Grammar (whitespace insensitive):

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' uint)?
    base   := rational | 'x'index | '(' expr ')'
    rational := digits ('/' digits)?

Variables are x1..xn; exponents are nonnegative integer literals.
Errors carry the character position.
"""

from __future__ import annotations

from .polymap import Polynomial
from .rational import Rat

__all__ = ["ParseError", "parse_expression"]


class ParseError(ValueError):
    def __init__(self, message, pos):
        super().__init__("%s (at position %d)" % (message, pos))
        self.pos = pos


class _Scanner:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self):
        ch = self.peek()
        self.pos += 1
        return ch

    def digits(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ParseError("expected digits", start)
        return self.text[start:self.pos]


def parse_expression(text, n) -> Polynomial:
    """Parse `text` into a canonical polynomial in variables x1..xn."""
    sc = _Scanner(text)
    poly = _expr(sc, n)
    sc.skip_ws()
    if sc.pos != len(sc.text):
        raise ParseError("unexpected trailing input %r" % sc.text[sc.pos:], sc.pos)
    return poly


def _expr(sc, n):
    sign = 1
    if sc.peek() in ("+", "-"):
        sign = -1 if sc.take() == "-" else 1
    total = _term(sc, n).scale(sign)
    while sc.peek() in ("+", "-"):
        op = sc.take()
        t = _term(sc, n)
        total = total + t if op == "+" else total - t
    return total


def _term(sc, n):
    total = _factor(sc, n)
    while sc.peek() == "*":
        sc.take()
        total = total * _factor(sc, n)
    return total


def _factor(sc, n):
    base = _base(sc, n)
    if sc.peek() == "^":
        sc.take()
        pos = sc.pos
        if sc.peek() == "-":
            raise ParseError("negative exponent", pos)
        power = int(sc.digits())
        if sc.peek() == "/":
            raise ParseError("fractional exponent", sc.pos)
        return base ** power
    return base


def _base(sc, n):
    ch = sc.peek()
    pos = sc.pos
    if ch == "(":
        sc.take()
        inner = _expr(sc, n)
        if sc.peek() != ")":
            raise ParseError("expected ')'", sc.pos)
        sc.take()
        return inner
    if ch == "x":
        sc.take()
        idx = int(sc.digits())
        if not 1 <= idx <= n:
            raise ParseError("variable x%d out of range 1..%d" % (idx, n), pos)
        return Polynomial.variable(n, idx - 1)
    if ch.isdigit():
        num = sc.digits()
        if sc.peek() == "/":
            sc.take()
            den = sc.digits()
            if int(den) == 0:
                raise ParseError("zero denominator", pos)
            return Polynomial.constant(n, Rat(int(num), int(den)))
        return Polynomial.constant(n, int(num))
    raise ParseError("expected a rational, a variable, or '('", pos)
