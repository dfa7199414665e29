"""Parser for the symbolic-constant grammar used on the command line.

Accepted forms include ``sqrt(2)``, ``golden``/``phi``, ``e``,
``(1+sqrt(5))/2``, ``-3/7`` and decimal literals such as ``0.7234567890123``.
A bare decimal literal becomes a :class:`DecimalLiteral`; anything built
with operators is evaluated exactly.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .reals import GOLDEN, DecimalLiteral, ECombination, ExactReal, QuadraticNumber

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_]+)|(.))")
_BARE_DECIMAL = re.compile(r"^\s*([+-]?)(\d*)\.(\d+)\s*$")


class ParseError(ValueError):
    pass


def _tokens(text: str):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot tokenize {text[pos:]!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name.lower()))
        elif op.strip():
            out.append(("op", op))
        pos = m.end()
    return out


def _mul(x, y):
    if isinstance(x, ECombination) and isinstance(y, ECombination):
        raise ParseError("products involving e twice are not supported")
    if isinstance(x, ECombination):
        x, y = y, x
    if isinstance(y, ECombination):
        if not x.is_rational:
            raise ParseError("e may only be combined with rationals")
        return ECombination(y.a * x.a, y.b * x.a)
    try:
        return x * y
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _add(x, y):
    if isinstance(x, ECombination) and isinstance(y, ECombination):
        b = x.b + y.b
        return QuadraticNumber(x.a + y.a) if b == 0 else ECombination(x.a + y.a, b)
    if isinstance(x, ECombination):
        x, y = y, x
    if isinstance(y, ECombination):
        if not x.is_rational:
            raise ParseError("e may only be combined with rationals")
        return ECombination(y.a + x.a, y.b)
    try:
        return x + y
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _neg(x):
    if isinstance(x, ECombination):
        return ECombination(-x.a, -x.b)
    return -x


def _div(x, y):
    if isinstance(y, ECombination):
        raise ParseError("division by an expression in e is not supported")
    if isinstance(x, ECombination):
        if not y.is_rational or y.a == 0:
            raise ParseError("e may only be divided by a nonzero rational")
        return ECombination(x.a / y.a, x.b / y.a)
    try:
        return x / y
    except ZeroDivisionError:
        raise ParseError("division by zero") from None


def _sqrt(x):
    if isinstance(x, ECombination) or not x.is_rational:
        raise ParseError("sqrt takes a rational argument")
    r = x.a
    if r < 0:
        raise ParseError("sqrt of a negative number")
    # sqrt(n/m) = sqrt(n*m)/m
    nm = r.numerator * r.denominator
    s = math.isqrt(nm)
    if s * s == nm:
        return QuadraticNumber(Fraction(s, r.denominator))
    return QuadraticNumber(Fraction(0), Fraction(1, r.denominator), nm)


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ParseError(f"expected {value or kind}, got " + ("end of input" if tok[0] is None else repr(tok[1])))
        self.i += 1
        return tok

    def expr(self):
        v = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            w = self.term()
            v = _add(v, w if op == "+" else _neg(w))
        return v

    def term(self):
        v = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            w = self.unary()
            v = _mul(v, w) if op == "*" else _div(v, w)
        return v

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return _neg(self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.atom()

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return QuadraticNumber(Fraction(val))
        if kind == "name":
            self.take()
            if val in ("golden", "phi"):
                return GOLDEN
            if val == "e":
                return ECombination(Fraction(0), Fraction(1))
            if val == "sqrt":
                self.take("op", "(")
                inner = self.expr()
                self.take("op", ")")
                return _sqrt(inner)
            raise ParseError(f"unknown name {val!r}")
        if (kind, val) == ("op", "("):
            self.take()
            v = self.expr()
            self.take("op", ")")
            return v
        raise ParseError("unexpected end of input" if val is None else f"unexpected token {val!r}")


def parse_real(text: str) -> ExactReal:
    """Parse a constant expression into an exact real."""
    m = _BARE_DECIMAL.match(text)
    if m:
        sign, ip, fp = m.groups()
        value = Fraction(f"{ip or '0'}.{fp}")
        if sign == "-":
            value = -value
        return DecimalLiteral(value, digits=len(fp), text=text.strip())
    p = _Parser(_tokens(text))
    if not p.toks:
        raise ParseError("empty expression")
    v = p.expr()
    if p.i != len(p.toks):
        raise ParseError(f"trailing input at {p.toks[p.i][1]!r}")
    return v


def split_pair(text: str) -> tuple[str, str]:
    """Split ``"expr,expr"`` at the single top-level comma."""
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return text[:i], text[i + 1:]
    raise ParseError(f"expected a pair 'a,b', got {text!r}")
