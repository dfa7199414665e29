"""Fixed-point ball arithmetic on Python integers.

A :class:`RealScalar` stores ``mid / 2**prec`` with an error radius
``rad / 2**prec``.  Every operation rounds outward, so the output ball
contains the exact result whenever the input balls contain theirs.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from mpmath import libmp

Number = Union[int, Fraction]


class PrecisionExhausted(ArithmeticError):
    """A certified decision could not be reached within the precision cap."""


class Ordering(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    EQUAL = "equal"  # only produced by exact comparisons, never by balls
    UNDECIDED = "undecided"

    def flipped(self) -> "Ordering":
        if self is Ordering.LESS:
            return Ordering.GREATER
        if self is Ordering.GREATER:
            return Ordering.LESS
        return self


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _shift(x: int, s: int) -> int:
    return x << s if s >= 0 else x >> -s


@dataclass(frozen=True, slots=True)
class RealScalar:
    mid: int
    rad: int = 0
    prec: int = 0

    def __post_init__(self):
        if self.rad < 0:
            raise ValueError("radius must be nonnegative")

    # -- construction -------------------------------------------------------

    @classmethod
    def exact(cls, x: Number, prec: int = 0) -> "RealScalar":
        """Ball around ``x``; radius zero when ``x`` is dyadic at ``prec`` bits."""
        if isinstance(x, int):
            return cls(x << prec, 0, prec)
        x = Fraction(x)
        num = x.numerator << prec
        mid, r = divmod(num, x.denominator)
        return cls(mid, 1 if r else 0, prec)

    @classmethod
    def from_bounds(cls, lo: int, hi: int, prec: int) -> "RealScalar":
        """Smallest ball at ``prec`` covering the integer interval [lo, hi]."""
        if lo > hi:
            lo, hi = hi, lo
        mid = (lo + hi) >> 1
        return cls(mid, max(hi - mid, mid - lo), prec)

    # -- views --------------------------------------------------------------

    @property
    def center(self) -> Fraction:
        return Fraction(self.mid, 1 << self.prec)

    @property
    def radius(self) -> Fraction:
        return Fraction(self.rad, 1 << self.prec)

    @property
    def precision_bits(self) -> int:
        return self.prec

    @property
    def lower(self) -> Fraction:
        return Fraction(self.mid - self.rad, 1 << self.prec)

    @property
    def upper(self) -> Fraction:
        return Fraction(self.mid + self.rad, 1 << self.prec)

    def __float__(self) -> float:
        return math.ldexp(self.mid, -self.prec) if self.mid.bit_length() < 1000 else float(self.center)

    @property
    def rad_float(self) -> float:
        return math.ldexp(self.rad, -self.prec) if self.rad.bit_length() < 1000 else float(self.radius)

    def contains(self, x: Number) -> bool:
        x = Fraction(x)
        scaled = x * (1 << self.prec)
        return self.mid - self.rad <= scaled <= self.mid + self.rad

    def overlaps(self, other: "RealScalar") -> bool:
        a, b, p = _align(self, other)
        return abs(a.mid - b.mid) <= a.rad + b.rad

    def intersect(self, other: "RealScalar") -> "RealScalar":
        a, b, p = _align(self, other)
        lo = max(a.mid - a.rad, b.mid - b.rad)
        hi = min(a.mid + a.rad, b.mid + b.rad)
        if lo > hi:
            raise ValueError("balls are disjoint")
        return RealScalar.from_bounds(lo, hi, p)

    def with_prec(self, prec: int) -> "RealScalar":
        """Re-express at ``prec`` bits (outward rounded when coarsening)."""
        s = prec - self.prec
        if s >= 0:
            return RealScalar(self.mid << s, self.rad << s, prec)
        lo = (self.mid - self.rad) >> -s
        hi = _ceil_div(self.mid + self.rad, 1 << -s)
        return RealScalar.from_bounds(lo, hi, prec)

    # -- arithmetic ---------------------------------------------------------

    def __neg__(self) -> "RealScalar":
        return RealScalar(-self.mid, self.rad, self.prec)

    def __abs__(self) -> "RealScalar":
        lo, hi = self.mid - self.rad, self.mid + self.rad
        if lo >= 0:
            return self
        if hi <= 0:
            return -self
        return RealScalar.from_bounds(0, max(-lo, hi), self.prec)

    def __add__(self, other) -> "RealScalar":
        other = _coerce(other, self.prec)
        a, b, p = _align(self, other)
        return RealScalar(a.mid + b.mid, a.rad + b.rad, p)

    __radd__ = __add__

    def __sub__(self, other) -> "RealScalar":
        return self + (-_coerce(other, self.prec))

    def __rsub__(self, other) -> "RealScalar":
        return _coerce(other, self.prec) - self

    def __mul__(self, other) -> "RealScalar":
        if isinstance(other, int):
            return RealScalar(self.mid * other, self.rad * abs(other), self.prec)
        other = _coerce(other, self.prec)
        p = max(self.prec, other.prec)
        m = self.mid * other.mid
        r = abs(self.mid) * other.rad + abs(other.mid) * self.rad + self.rad * other.rad
        s = self.prec + other.prec - p
        if s == 0:
            return RealScalar(m, r, p)
        lo = (m - r) >> s
        hi = _ceil_div(m + r, 1 << s)
        return RealScalar.from_bounds(lo, hi, p)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RealScalar":
        other = _coerce(other, self.prec)
        a, b, p = _align(self, other)
        if abs(b.mid) <= b.rad:
            raise ZeroDivisionError("divisor ball contains zero")
        # |a/b - ma/mb| <= (ra*|mb| + |ma|*rb) / (|mb|*(|mb| - rb))
        mb = abs(b.mid)
        num = a.mid if b.mid > 0 else -a.mid
        mid, rem = divmod(num << p, mb)
        err = (a.rad * mb + abs(a.mid) * b.rad) << p
        rad = _ceil_div(err, mb * (mb - b.rad)) + (1 if rem else 0)
        return RealScalar(mid, rad, p)

    def __rtruediv__(self, other) -> "RealScalar":
        return _coerce(other, self.prec) / self

    def sqrt(self) -> "RealScalar":
        lo, hi = self.mid - self.rad, self.mid + self.rad
        if hi < 0:
            raise ValueError("sqrt of a negative ball")
        lo = max(lo, 0)
        p = self.prec
        s_lo = math.isqrt(lo << p)
        t = hi << p
        s_hi = math.isqrt(t)
        if s_hi * s_hi != t:
            s_hi += 1
        return RealScalar.from_bounds(s_lo, s_hi, p)

    def log(self) -> "RealScalar":
        """Natural logarithm (ball must be strictly positive)."""
        lo, hi = self.mid - self.rad, self.mid + self.rad
        if lo <= 0:
            raise ValueError("log of a ball that is not strictly positive")
        return _monotone_libmp(libmp.mpf_log, lo, hi, self.prec)

    def exp(self) -> "RealScalar":
        lo, hi = self.mid - self.rad, self.mid + self.rad
        return _monotone_libmp(libmp.mpf_exp, lo, hi, self.prec)

    def max_with(self, other) -> "RealScalar":
        other = _coerce(other, self.prec)
        a, b, p = _align(self, other)
        lo = max(a.mid - a.rad, b.mid - b.rad)
        hi = max(a.mid + a.rad, b.mid + b.rad)
        return RealScalar.from_bounds(lo, hi, p)

    # -- certified integer extraction -------------------------------------

    def floor(self) -> int | None:
        """``floor`` of the contained value, or None if the ball straddles an integer."""
        lo = (self.mid - self.rad) >> self.prec
        hi = (self.mid + self.rad) >> self.prec
        return lo if lo == hi else None

    def ceil(self) -> int | None:
        one = 1 << self.prec
        lo = _ceil_div(self.mid - self.rad, one)
        hi = _ceil_div(self.mid + self.rad, one)
        return lo if lo == hi else None

    def sign(self) -> int | None:
        if self.mid - self.rad > 0:
            return 1
        if self.mid + self.rad < 0:
            return -1
        if self.mid == 0 and self.rad == 0:
            return 0
        return None

    def __str__(self) -> str:
        return f"{fmt_decimal(self.center)} +/- {fmt_decimal(self.radius, 3)}"

    def __repr__(self) -> str:
        return f"RealScalar({self})"


def fmt_decimal(x: Fraction | float, digits: int = 20) -> str:
    return libmp.to_str(libmp.from_rational(x.numerator, x.denominator, 4 * digits + 8, "n"), digits) \
        if isinstance(x, Fraction) else repr(x)


def _coerce(x, prec: int) -> RealScalar:
    if isinstance(x, RealScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return RealScalar.exact(x, prec)
    raise TypeError(f"cannot combine RealScalar with {type(x).__name__}")


def _align(a: RealScalar, b: RealScalar):
    if a.prec == b.prec:
        return a, b, a.prec
    p = max(a.prec, b.prec)
    return a.with_prec(p), b.with_prec(p), p


def _monotone_libmp(fn, lo: int, hi: int, prec: int) -> RealScalar:
    # libmp is faithful to within an ulp at the working precision; widen by 4 ulps
    wp = prec + 20
    f_lo = fn(libmp.from_man_exp(lo, -prec), wp, "f")
    f_hi = fn(libmp.from_man_exp(hi, -prec), wp, "c")
    out_lo = libmp.to_fixed(f_lo, prec) - 4
    out_hi = libmp.to_fixed(f_hi, prec) + 5
    return RealScalar.from_bounds(out_lo, out_hi, prec)


def compare_certified(a: RealScalar, b: RealScalar) -> Ordering:
    """LESS/GREATER only when the balls are disjoint; never EQUAL."""
    a, b, _ = _align(a, b)
    if a.mid + a.rad < b.mid - b.rad:
        return Ordering.LESS
    if a.mid - a.rad > b.mid + b.rad:
        return Ordering.GREATER
    return Ordering.UNDECIDED


def nearest_integer_distance(x: RealScalar) -> tuple[int, RealScalar]:
    """Nearest integer to ``x.center`` (halves go to the floor) and a ball for ``||x||``."""
    if x.radius >= Fraction(1, 4):
        raise ValueError("radius too large for a nearest-integer decision (need < 1/4)")
    one = 1 << x.prec
    half = one >> 1 if x.prec > 0 else None
    if half is None:
        n = x.mid
    else:
        n = _ceil_div(x.mid - half, one)
    dist = abs(x - n)
    return n, dist
