"""Exactly specified real numbers with on-demand certified balls.

Supported values: elements of a real quadratic field ``a + b*sqrt(d)``
(rationals included), affine expressions ``a + b*e``, decimal literals
(exact value, but only *assumed* irrational), and derived reals defined
by a ball-producing function.  Every value answers ``ball(prec)`` with a
radius of at most ``2**-prec``.
"""

from __future__ import annotations

import functools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .ball import Ordering, PrecisionExhausted, RealScalar

DEFAULT_START_BITS = 128
DEFAULT_MAX_BITS = 8192
MAX_BITS_ENV = "COPRIME_APPROX_MAX_BITS"


@dataclass(frozen=True)
class PrecisionPolicy:
    """Escalation schedule: start, then double until the cap."""

    start_bits: int = DEFAULT_START_BITS
    max_bits: int = field(default_factory=lambda: int(os.environ.get(MAX_BITS_ENV, DEFAULT_MAX_BITS)))

    def schedule(self) -> Iterable[int]:
        bits = self.start_bits
        while bits <= self.max_bits:
            yield bits
            bits *= 2


def default_policy() -> PrecisionPolicy:
    return PrecisionPolicy()


def decide(fn: Callable[[int], object], policy: PrecisionPolicy | None = None, what: str = "decision"):
    """Call ``fn(bits)`` along the escalation schedule until it returns non-None."""
    policy = policy or default_policy()
    for bits in policy.schedule():
        result = fn(bits)
        if result is not None:
            return result
    raise PrecisionExhausted(f"{what} undecided at {policy.max_bits} bits")


def _sqrt_ball(d: int, prec: int) -> RealScalar:
    t = d << (2 * prec)
    s = math.isqrt(t)
    return RealScalar(s, 0 if s * s == t else 1, prec)


def _squarefree_split(d: int) -> tuple[int, int]:
    """Write d = k**2 * m with m squarefree (trial division; d is small in practice)."""
    k, m = 1, 1
    n = d
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        k *= p ** (e // 2)
        if e % 2:
            m *= p
        p += 1
    return k, m * n


class ExactReal:
    """Base class; subclasses implement ``ball``."""

    label: str = ""

    def ball(self, prec: int) -> RealScalar:
        raise NotImplementedError

    def as_fraction(self) -> Fraction | None:
        return None

    @property
    def irrational(self) -> bool | None:
        """True if certified irrational, False if rational, None if only assumed irrational."""
        return True

    def approx(self) -> float:
        return float(self.ball(64))

    def __str__(self) -> str:
        return self.label or repr(self)


@dataclass(frozen=True, eq=True)
class QuadraticNumber(ExactReal):
    """``a + b*sqrt(d)`` with rational a, b and squarefree d > 1 (d = 1 when b = 0)."""

    a: Fraction
    b: Fraction = Fraction(0)
    d: int = 1

    def __post_init__(self):
        a, b, d = Fraction(self.a), Fraction(self.b), int(self.d)
        if d < 0:
            raise ValueError("only real quadratic fields are supported")
        if b != 0 and d > 1:
            k, m = _squarefree_split(d)
            b, d = b * k, m
        if b != 0 and d == 1:
            a, b = a + b, Fraction(0)
        if b == 0 or d == 0:
            b, d = Fraction(0), 1
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    @classmethod
    def rational(cls, x) -> "QuadraticNumber":
        return cls(Fraction(x))

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    @property
    def irrational(self) -> bool | None:
        return not self.is_rational

    @property
    def label(self) -> str:  # type: ignore[override]
        if self.is_rational:
            return str(self.a)
        return f"{self.a}+{self.b}*sqrt({self.d})"

    def as_fraction(self) -> Fraction | None:
        return self.a if self.is_rational else None

    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def _field(self, other: "QuadraticNumber") -> int:
        if self.is_rational:
            return other.d
        if other.is_rational or other.d == self.d:
            return self.d
        raise ValueError(f"mixed quadratic fields sqrt({self.d}) and sqrt({other.d})")

    def __add__(self, other):
        other = as_quadratic(other)
        if other is None:
            return NotImplemented
        return QuadraticNumber(self.a + other.a, self.b + other.b, self._field(other))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d)

    def __sub__(self, other):
        other = as_quadratic(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_quadratic(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = as_quadratic(other)
        if other is None:
            return NotImplemented
        d = self._field(other)
        return QuadraticNumber(self.a * other.a + self.b * other.b * d,
                               self.a * other.b + self.b * other.a, d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_quadratic(other)
        if other is None:
            return NotImplemented
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero")
        c = other.conjugate()
        num = self * c
        return QuadraticNumber(num.a / n, num.b / n, num.d)

    def __rtruediv__(self, other):
        other = as_quadratic(other)
        if other is None:
            return NotImplemented
        return other / self

    def integer_form(self) -> tuple[int, int, int]:
        """(A, B, W) with W > 0 and self = (A + B*sqrt(d)) / W."""
        w = self.a.denominator * self.b.denominator // math.gcd(self.a.denominator, self.b.denominator)
        return int(self.a * w), int(self.b * w), w

    def sign(self) -> int:
        if self.b == 0:
            return (self.a > 0) - (self.a < 0)
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sa == 0 or sa == sb:
            return sb
        return sa if self.a * self.a > self.b * self.b * self.d else sb

    def floor(self) -> int:
        A, B, W = self.integer_form()
        if B == 0:
            return A // W
        r = math.isqrt(B * B * self.d)
        fb = r if B > 0 else -r - 1  # sqrt is irrational, so never exact
        return (A + fb) // W

    def ceil(self) -> int:
        return -(-self).floor()

    def ball(self, prec: int) -> RealScalar:
        if self.b == 0:
            return RealScalar.exact(self.a, prec + 2)
        A, B, W = self.integer_form()
        extra = (abs(B).bit_length() + 4)
        s = _sqrt_ball(self.d, prec + extra)
        num = s * B + RealScalar.exact(A, prec + extra)
        return (num / W).with_prec(prec + 2)

    def approx(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)


@dataclass(frozen=True)
class DecimalLiteral(QuadraticNumber):
    """A decimal literal: exact rational value, assumed irrational.

    ``digits`` is the number of stated fractional digits; the literal is
    trusted to stand for any real within half a unit of its last digit.
    """

    digits: int = 0
    text: str = ""

    @property
    def irrational(self) -> bool | None:
        return None

    @property
    def uncertainty(self) -> Fraction:
        return Fraction(1, 2 * 10 ** self.digits)

    @property
    def label(self) -> str:  # type: ignore[override]
        return self.text or str(self.a)


@functools.lru_cache(maxsize=64)
def _e_ball(prec: int) -> RealScalar:
    # sum 1/n! in fixed point with guard bits; tail after n terms < 2/(n+1)!
    g = prec + 16
    one = 1 << g
    term = one
    total = 0
    n = 0
    while term > 0:
        total += term
        n += 1
        term //= n
    # floors only undershoot: each term by < 2 ulps, the tail by < 2 ulps
    return RealScalar.from_bounds(total, total + 2 * n + 4, g).with_prec(prec + 2)


@dataclass(frozen=True)
class ECombination(ExactReal):
    """``a + b*e`` for rational a and nonzero rational b."""

    a: Fraction
    b: Fraction = Fraction(1)

    @property
    def label(self) -> str:  # type: ignore[override]
        if self.a == 0 and self.b == 1:
            return "e"
        return f"{self.a}+{self.b}*e"

    def ball(self, prec: int) -> RealScalar:
        extra = max(abs(self.b.numerator).bit_length(), 1) + 4
        eb = _e_ball(prec + extra)
        val = eb * RealScalar.exact(self.b, prec + extra) + RealScalar.exact(self.a, prec + extra)
        return val.with_prec(prec + 2)


class DerivedReal(ExactReal):
    """A real defined by a function ``bits -> RealScalar`` whose radius shrinks with bits."""

    def __init__(self, fn: Callable[[int], RealScalar], label: str = "derived",
                 policy: PrecisionPolicy | None = None):
        self._fn = fn
        self.label = label
        self._policy = policy or default_policy()

    def ball(self, prec: int) -> RealScalar:
        target = Fraction(1, 1 << prec)
        bits = prec + 16
        cap = max(self._policy.max_bits, prec + 16) * 2
        while bits <= cap:
            b = self._fn(bits)
            if b.radius <= target:
                return b
            bits *= 2
        raise PrecisionExhausted(f"{self.label}: radius above 2^-{prec} at {cap} bits")

    def __repr__(self) -> str:
        return f"DerivedReal({self.label})"


def as_quadratic(x) -> QuadraticNumber | None:
    if isinstance(x, QuadraticNumber):
        return x
    if isinstance(x, (int, Fraction)):
        return QuadraticNumber(Fraction(x))
    return None


def to_real(x) -> ExactReal:
    if isinstance(x, ExactReal):
        return x
    if isinstance(x, (int, Fraction)):
        return QuadraticNumber(Fraction(x))
    raise TypeError(f"not an exact real: {x!r}")


def combine(terms: Iterable[tuple[int | Fraction, ExactReal]], const: int | Fraction = 0) -> ExactReal:
    """Exact linear combination ``const + sum(k * x)``.

    Stays in a quadratic field when possible; otherwise returns a
    :class:`DerivedReal` evaluated through ball arithmetic.
    """
    terms = [(k, to_real(x)) for k, x in terms if k != 0]
    acc = QuadraticNumber(Fraction(const))
    exact = True
    for k, x in terms:
        qx = as_quadratic(x)
        if qx is None:
            exact = False
            break
        try:
            acc = acc + qx * k
        except ValueError:
            exact = False
            break
    if exact:
        return acc

    def fn(bits: int) -> RealScalar:
        total = RealScalar.exact(Fraction(const), bits)
        for k, x in terms:
            kk = Fraction(k)
            extra = max(abs(kk.numerator).bit_length(), 1) + len(terms).bit_length() + 2
            total = total + x.ball(bits + extra) * RealScalar.exact(kk, bits + extra)
        return total

    label = " + ".join(f"{k}*({x})" for k, x in terms) + (f" + {const}" if const else "")
    return DerivedReal(fn, label)


def mobius(a: int, b: int, c: int, d: int, x: ExactReal) -> ExactReal:
    """``(a*x + b) / (c*x + d)``."""
    qx = as_quadratic(x)
    if qx is not None:
        return (qx * a + b) / (qx * c + d)

    def fn(bits: int) -> RealScalar:
        xb = x.ball(bits)
        return (xb * a + b) / (xb * c + d)

    return DerivedReal(fn, f"({a}*({x})+{b})/({c}*({x})+{d})")


def scale(x: ExactReal, num: ExactReal | int | Fraction, den: ExactReal) -> ExactReal:
    """``num * x / den`` with exact arithmetic when all operands are quadratic."""
    qx, qn, qd = as_quadratic(x), as_quadratic(num), as_quadratic(den)
    if qx is not None and qn is not None and qd is not None:
        try:
            return qx * qn / qd
        except ValueError:
            pass
    n, dd = to_real(num), to_real(den)

    def fn(bits: int) -> RealScalar:
        return x.ball(bits) * n.ball(bits) / dd.ball(bits)

    return DerivedReal(fn, f"({num})*({x})/({den})")


# -- certified decisions on exact reals ---------------------------------------


def real_sign(x: ExactReal, policy: PrecisionPolicy | None = None) -> int:
    qx = as_quadratic(x)
    if qx is not None:
        return qx.sign()
    return decide(lambda bits: x.ball(bits).sign(), policy, f"sign of {x}")


def real_floor(x: ExactReal, policy: PrecisionPolicy | None = None) -> int:
    qx = as_quadratic(x)
    if qx is not None:
        return qx.floor()
    return decide(lambda bits: x.ball(bits).floor(), policy, f"floor of {x}")


def real_ceil(x: ExactReal, policy: PrecisionPolicy | None = None) -> int:
    qx = as_quadratic(x)
    if qx is not None:
        return qx.ceil()
    return decide(lambda bits: x.ball(bits).ceil(), policy, f"ceil of {x}")


def real_compare(x: ExactReal, y: ExactReal, policy: PrecisionPolicy | None = None) -> Ordering:
    """Exact comparison; UNDECIDED only for non-quadratic values that refuse to separate."""
    diff = combine([(1, x), (-1, y)])
    try:
        s = real_sign(diff, policy)
    except PrecisionExhausted:
        return Ordering.UNDECIDED
    return {1: Ordering.GREATER, -1: Ordering.LESS, 0: Ordering.EQUAL}[s]


def real_abs(x: ExactReal, policy: PrecisionPolicy | None = None) -> ExactReal:
    qx = as_quadratic(x)
    if qx is not None:
        return -qx if qx.sign() < 0 else qx
    return DerivedReal(lambda bits: abs(x.ball(bits)), f"|{x}|")


E = ECombination(Fraction(0), Fraction(1))
GOLDEN = QuadraticNumber(Fraction(1, 2), Fraction(1, 2), 5)
SQRT2 = QuadraticNumber(Fraction(0), Fraction(1), 2)
