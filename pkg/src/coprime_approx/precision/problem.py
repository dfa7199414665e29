from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ball import PrecisionExhausted, RealScalar
from .parse import parse_real
from .reals import ExactReal, PrecisionPolicy, combine, default_policy, real_abs, to_real

DEFAULT_GUARD_BITS = 64


@dataclass(frozen=True)
class TargetProblem:
    """The pair (xi, y) of an inhomogeneous approximation problem."""

    xi: ExactReal
    y: ExactReal
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "xi", to_real(self.xi))
        object.__setattr__(self, "y", to_real(self.y))
        if not self.description:
            object.__setattr__(self, "description", f"xi={self.xi}, y={self.y}")

    @classmethod
    def parse(cls, xi: str, y: str, description: str = "") -> "TargetProblem":
        return cls(parse_real(xi), parse_real(y), description or f"xi={xi}, y={y}")

    @property
    def xi_assumed_irrational(self) -> bool:
        return self.xi.irrational is None


def linear_form(p: int, q: int, prob: TargetProblem) -> ExactReal:
    """The exact real ``q*xi + p - y`` (signed)."""
    return combine([(q, prob.xi), (-1, prob.y)], const=p)


def eval_linear_form(p: int, q: int, prob: TargetProblem, guard: int = DEFAULT_GUARD_BITS,
                     tol: Fraction | None = None, policy: PrecisionPolicy | None = None) -> RealScalar:
    """Ball containing ``|q*xi + p - y|``.

    The radius is at most ``2**-(guard + bitlen(q))``, and below ``tol``
    when one is given.
    """
    policy = policy or default_policy()
    bits = guard + max(abs(q).bit_length(), 1)
    if tol is not None:
        while Fraction(1, 1 << bits) > tol:
            bits += 32
    if bits > policy.max_bits:
        raise PrecisionExhausted(f"linear form needs {bits} bits, cap is {policy.max_bits}")
    return real_abs(linear_form(p, q, prob)).ball(bits)
