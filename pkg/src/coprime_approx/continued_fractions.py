"""Continued fractions, convergents and their certified identities.

Indexing: the first convergent is ``p_0/q_0 = a_0/1``, so that
``p_k q_{k+1} - p_{k+1} q_k = (-1)**(k+1)`` for every computed k.
Logarithms are natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .precision import (
    DecimalLiteral,
    ExactReal,
    Ordering,
    PrecisionExhausted,
    PrecisionPolicy,
    QuadraticNumber,
    RealScalar,
    TargetProblem,
    as_quadratic,
    combine,
    default_policy,
    real_abs,
    real_compare,
    real_sign,
)


class DepthError(IndexError):
    """Requested index lies beyond the certified depth of an expansion."""


@dataclass(frozen=True)
class CFExpansion:
    xi: ExactReal
    partial_quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    terminal: bool = False
    truncated: bool = False
    trust_horizon: int | None = None

    @property
    def k_max(self) -> int:
        return len(self.partial_quotients) - 1

    def p(self, k: int) -> int:
        return self.convergents[self._check(k)][0]

    def q(self, k: int) -> int:
        return self.convergents[self._check(k)][1]

    def _check(self, k: int) -> int:
        if k < 0 or k > self.k_max:
            raise DepthError(f"index {k} outside certified depth 0..{self.k_max}")
        return k

    def delta(self, k: int) -> ExactReal:
        """The exact real ``q_k*xi - p_k``."""
        p, q = self.convergents[self._check(k)]
        return combine([(q, self.xi)], const=-p)

    def rows(self, bits: int = 128) -> list[dict]:
        out = []
        for k, (a, (p, q)) in enumerate(zip(self.partial_quotients, self.convergents)):
            err = real_abs(self.delta(k)).ball(bits + q.bit_length())
            out.append({"k": k, "a_k": a, "p_k": p, "q_k": q, "err": err})
        return out


def _convergents(quotients: list[int]) -> list[tuple[int, int]]:
    out = []
    p_prev, q_prev = 1, 0
    p, q = quotients[0], 1
    out.append((p, q))
    for a in quotients[1:]:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return out


def rational_quotients(x: Fraction, n: int) -> tuple[list[int], bool]:
    """Up to n quotients of a rational; flag is True when the expansion ended."""
    out = []
    num, den = x.numerator, x.denominator
    while len(out) < n:
        a, r = divmod(num, den)
        out.append(a)
        if r == 0:
            return out, True
        num, den = den, r
    return out, False


def interval_quotients(lo: Fraction, hi: Fraction, n: int) -> list[int]:
    """Partial quotients shared by every real in [lo, hi] (at most n)."""
    out = []
    while len(out) < n:
        a = math.floor(lo)
        if math.floor(hi) != a or lo == a:
            break
        out.append(a)
        lo, hi = 1 / (hi - a), 1 / (lo - a)
    return out


def quadratic_quotients(x: QuadraticNumber, n: int) -> list[int]:
    """Exact expansion of an irrational quadratic number (periodic algorithm)."""
    A, B, W = x.integer_form()
    if B == 0:
        raise ValueError("not irrational")
    s = 1 if B > 0 else -1
    P, Q, D = s * A, s * W, B * B * x.d
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    r = math.isqrt(D)
    out = []
    while len(out) < n:
        if Q > 0:
            a = (P + r) // Q
        else:
            a = -((P + r) // -Q) - 1
        out.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    return out


def ball_quotients(x: ExactReal, n: int, policy: PrecisionPolicy | None = None) -> list[int]:
    """Quotients certified from balls of increasing precision."""
    policy = policy or default_policy()
    best: list[int] = []
    for bits in policy.schedule():
        b = x.ball(bits)
        best = interval_quotients(b.lower, b.upper, n)
        if len(best) >= n:
            return best
    raise PrecisionExhausted(f"only {len(best)} of {n} partial quotients certified at {policy.max_bits} bits")


def expand(prob: TargetProblem | ExactReal, k_max: int, policy: PrecisionPolicy | None = None) -> CFExpansion:
    """Continued fraction of xi up to index ``k_max``."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    xi = prob.xi if isinstance(prob, TargetProblem) else prob
    n = k_max + 1
    terminal = truncated = False
    horizon = None
    if isinstance(xi, DecimalLiteral):
        u = xi.uncertainty
        certified = interval_quotients(xi.a - u, xi.a + u, n)
        exact, ended = rational_quotients(xi.a, n)
        horizon = len(certified) - 1
        if ended and len(exact) <= len(certified):
            quotients, terminal = exact, True
        else:
            quotients = certified
            truncated = len(certified) < n
        if not quotients:
            raise PrecisionExhausted(f"literal {xi} does not certify a_0")
    else:
        qx = as_quadratic(xi)
        if qx is not None and qx.is_rational:
            quotients, terminal = rational_quotients(qx.a, n)
        elif qx is not None:
            quotients = quadratic_quotients(qx, n)
        else:
            quotients = ball_quotients(xi, n, policy)
    return CFExpansion(xi, tuple(quotients), tuple(_convergents(quotients)),
                       terminal=terminal, truncated=truncated, trust_horizon=horizon)


@dataclass
class IdentityReport:
    checked: int = 0
    determinant_failures: list[int] = field(default_factory=list)
    bound_failures: list[int] = field(default_factory=list)
    gcd_failures: list[int] = field(default_factory=list)
    recurrence_failures: list[int] = field(default_factory=list)
    sign_failures: list[int] = field(default_factory=list)
    undecided: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.determinant_failures or self.bound_failures or self.gcd_failures
                    or self.recurrence_failures or self.sign_failures or self.undecided)

    def failures(self) -> list[int]:
        return sorted(set(self.determinant_failures + self.bound_failures + self.gcd_failures
                          + self.recurrence_failures + self.sign_failures + self.undecided))


def verify_identities(cf: CFExpansion, policy: PrecisionPolicy | None = None) -> IdentityReport:
    """Check determinant, approximation bound, gcd, recurrence and sign alternation."""
    rep = IdentityReport()
    conv = cf.convergents
    a = cf.partial_quotients
    for k, (p, q) in enumerate(conv):
        rep.checked += 1
        if math.gcd(p, q) != 1:
            rep.gcd_failures.append(k)
        if k >= 1:
            pm, qm = conv[k - 2] if k >= 2 else (1, 0)
            if q != a[k] * conv[k - 1][1] + qm or p != a[k] * conv[k - 1][0] + pm:
                rep.recurrence_failures.append(k)
        delta = cf.delta(k)
        try:
            s = real_sign(delta, policy)
        except PrecisionExhausted:
            rep.undecided.append(k)
            s = None
        if s is not None and s != 0 and s != (-1) ** k:
            rep.sign_failures.append(k)
        if k + 1 > cf.k_max:
            continue
        p1, q1 = conv[k + 1]
        if p * q1 - p1 * q != (-1) ** (k + 1):
            rep.determinant_failures.append(k)
        order = real_compare(real_abs(delta), QuadraticNumber(Fraction(1, q1)), policy)
        if order is Ordering.GREATER:
            rep.bound_failures.append(k)
        elif order is Ordering.UNDECIDED:
            rep.undecided.append(k)
    return rep


def series5_partial_sum(cf: CFExpansion, K: int, bits: int = 256) -> RealScalar:
    """Ball for ``sum_{k<=K} 1/max(1, log q_k)``."""
    if K > cf.k_max:
        raise DepthError(f"K={K} beyond depth {cf.k_max}")
    total = RealScalar.exact(0, bits)
    for k in range(K + 1):
        lg = RealScalar.exact(cf.q(k), bits).log().max_with(1)
        total = total + RealScalar.exact(1, bits) / lg
    return total


def khintchine_levy_stat(cf: CFExpansion, k: int, bits: int = 128) -> RealScalar:
    """Ball for ``log(q_k) / k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return RealScalar.exact(cf.q(k), bits).log() / k


KHINTCHINE_LEVY = math.pi ** 2 / (12 * math.log(2))
