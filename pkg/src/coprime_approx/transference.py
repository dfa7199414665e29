"""Inhomogeneous solutions built from consecutive convergents.

With ``nu_k = (-1)**(k+1) * q_k * y`` and ``n_k`` either integer next to
``nu_k``, the pair

    q = n_k q_{k+1} + n_{k+1} q_k,    p = -n_k p_{k+1} - n_{k+1} p_k

satisfies ``|q xi + p - y| <= 2/|q|``, and (p, q) is primitive exactly
when gcd(n_k, n_{k+1}) = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .arith import primality
from .continued_fractions import CFExpansion, DepthError
from .matrices import UnimodMatrix
from .precision import (
    DEFAULT_GUARD_BITS,
    ExactReal,
    Ordering,
    PrecisionExhausted,
    PrecisionPolicy,
    QuadraticNumber,
    RealScalar,
    TargetProblem,
    combine,
    eval_linear_form,
    linear_form,
    mobius,
    real_abs,
    real_ceil,
    real_compare,
    real_floor,
    real_sign,
    scale,
    to_real,
)


class BoundCase(enum.Enum):
    SAME_SIGN_21 = "same_sign"
    MIXED_SIGN_22 = "mixed_sign"
    ORACLE = "oracle"
    ORBIT = "orbit"


class UndecidableFloor(PrecisionExhausted):
    pass


class BoundViolation(AssertionError):
    """A constructed candidate broke the bound it was classified under."""


class NonPositiveDenominator(ValueError):
    pass


@dataclass(frozen=True)
class SolutionRecord:
    p: int
    q: int
    error: RealScalar
    coprime: bool
    bound_case: BoundCase
    source: str
    k: int | None = None

    def as_row(self) -> dict:
        return {"p": self.p, "q": self.q, "error": self.error, "coprime": self.coprime,
                "bound_case": self.bound_case.value, "source": self.source,
                "k": "" if self.k is None else self.k}


@dataclass(frozen=True)
class Candidate:
    n_k: int
    n_k1: int
    p: int
    q: int
    error: RealScalar
    coprime: bool
    degenerate: bool
    bound_case: BoundCase | None = None

    def record(self, k: int) -> SolutionRecord:
        return SolutionRecord(self.p, self.q, self.error, self.coprime,
                              self.bound_case or BoundCase.SAME_SIGN_21, "transference", k)


@dataclass(frozen=True)
class TransferenceStep:
    k: int
    nu_k: ExactReal
    nu_k1: ExactReal
    n_choices_k: tuple[int, ...]
    n_choices_k1: tuple[int, ...]
    candidates: tuple[Candidate, ...] = field(default=())
    q_k1: int = 1
    problem: TargetProblem | None = None

    def nu_balls(self, bits: int = 128) -> tuple[RealScalar, RealScalar]:
        return self.nu_k.ball(bits), self.nu_k1.ball(bits)


def _nu(cf: CFExpansion, y: ExactReal, k: int) -> ExactReal:
    return combine([((-1) ** (k + 1) * cf.q(k), y)])


def _neighbors(nu: ExactReal, policy: PrecisionPolicy | None) -> tuple[int, ...]:
    try:
        lo = real_floor(nu, policy)
        hi = real_ceil(nu, policy)
    except PrecisionExhausted as exc:
        raise UndecidableFloor(str(exc)) from None
    return (lo,) if lo == hi else (lo, hi)


def _telescoped(cf: CFExpansion, k: int, nu_k: ExactReal, nu_k1: ExactReal,
                n_k: int, n_k1: int, bits: int) -> RealScalar:
    d_k1 = cf.delta(k + 1).ball(bits)
    d_k = cf.delta(k).ball(bits)
    return abs((n_k - nu_k.ball(bits)) * d_k1 + (n_k1 - nu_k1.ball(bits)) * d_k)


def build_candidates(cf: CFExpansion, y: ExactReal, k: int, policy: PrecisionPolicy | None = None,
                     guard: int = DEFAULT_GUARD_BITS) -> TransferenceStep:
    """All (up to four) candidates at index k, errors certified two ways."""
    if k + 1 > cf.k_max:
        raise DepthError(f"need q_(k+1) for k={k}, expansion depth is {cf.k_max}")
    y = to_real(y)
    prob = TargetProblem(cf.xi, y)
    nu_k, nu_k1 = _nu(cf, y, k), _nu(cf, y, k + 1)
    ch_k, ch_k1 = _neighbors(nu_k, policy), _neighbors(nu_k1, policy)
    pk, qk = cf.convergents[k]
    pk1, qk1 = cf.convergents[k + 1]
    step = TransferenceStep(k, nu_k, nu_k1, ch_k, ch_k1, (), qk1, prob)
    cands = []
    for n_k in ch_k:
        for n_k1 in ch_k1:
            q = n_k * qk1 + n_k1 * qk
            p = -n_k * pk1 - n_k1 * pk
            bits = guard + max(abs(q).bit_length(), 1) + qk1.bit_length()
            direct = eval_linear_form(p, q, prob, guard=bits - max(abs(q).bit_length(), 1), policy=policy)
            tele = _telescoped(cf, k, nu_k, nu_k1, n_k, n_k1, bits)
            if not direct.overlaps(tele):
                raise ArithmeticError(f"telescoped and direct errors disagree at k={k}: {direct} vs {tele}")
            err = direct.intersect(tele)
            cand = Candidate(n_k, n_k1, p, q, err, math.gcd(p, q) == 1, q == 0)
            if not cand.degenerate:
                cand = Candidate(n_k, n_k1, p, q, err, cand.coprime, False,
                                 classify_bound(step, cand, policy))
            cands.append(cand)
    return TransferenceStep(k, nu_k, nu_k1, ch_k, ch_k1, tuple(cands), qk1, prob)


def classify_bound(step: TransferenceStep, cand: Candidate, policy: PrecisionPolicy | None = None) -> BoundCase:
    """Which of the two bounds applies; the bound itself is then certified.

    A vanishing difference n - nu counts as compatible with either sign
    and is grouped with the same-sign case.
    """
    s1 = real_sign(combine([(-1, step.nu_k)], const=cand.n_k), policy)
    s2 = real_sign(combine([(-1, step.nu_k1)], const=cand.n_k1), policy)
    case = BoundCase.SAME_SIGN_21 if (s1 == 0 or s2 == 0 or s1 == s2) else BoundCase.MIXED_SIGN_22
    if cand.degenerate:
        return case
    return case if _bound_holds(step, cand, case, policy) else _violation(step, cand, case)


def _violation(step, cand, case):
    raise BoundViolation(f"k={step.k} (p,q)=({cand.p},{cand.q}) violates {case.value} bound")


def _bound_holds(step: TransferenceStep, cand: Candidate, case: BoundCase,
                 policy: PrecisionPolicy | None) -> bool:
    qk1 = step.q_k1
    err_mult, q_mult = (1, 2) if case is BoundCase.SAME_SIGN_21 else (2, 1)
    if not abs(cand.q) < q_mult * qk1:
        return False
    form = linear_form(cand.p, cand.q, step.problem)
    order = real_compare(real_abs(form), QuadraticNumber(Fraction(err_mult, qk1)), policy)
    if order is Ordering.UNDECIDED:
        raise PrecisionExhausted(f"bound at k={step.k} undecided")
    return order is Ordering.LESS


def coprimality_condition(cf: CFExpansion, y: ExactReal, k: int,
                          policy: PrecisionPolicy | None = None) -> tuple[bool, list[tuple[str, int, int]]]:
    """Evaluate the four gcd conditions on floor/ceil of y*q_k and y*q_(k+1)."""
    y = to_real(y)
    vals = []
    for j in (k, k + 1):
        t = combine([(cf.q(j), y)])
        try:
            vals.append((real_floor(t, policy), real_ceil(t, policy)))
        except PrecisionExhausted as exc:
            raise UndecidableFloor(str(exc)) from None
    (fk, ck), (fk1, ck1) = vals
    witnesses = []
    for label, u, v in (("floor,floor", fk, fk1), ("ceil,ceil", ck, ck1),
                        ("floor,ceil", fk, ck1), ("ceil,floor", ck, fk1)):
        if math.gcd(u, v) == 1:
            witnesses.append((label, u, v))
    return bool(witnesses), witnesses


def solution_stream(cf: CFExpansion, y: ExactReal, k_range, policy: PrecisionPolicy | None = None) -> list[SolutionRecord]:
    """Coprime, non-degenerate candidates over ``k_range``, deduplicated by (p, q)."""
    seen = set()
    out = []
    for k in k_range:
        step = build_candidates(cf, y, k, policy)
        for cand in step.candidates:
            if cand.degenerate or not cand.coprime or (cand.p, cand.q) in seen:
                continue
            seen.add((cand.p, cand.q))
            out.append(cand.record(k))
    return out


@dataclass(frozen=True)
class ScanRow:
    k: int
    floor_yq: int
    is_prime: bool
    certain: bool
    solutions: tuple[SolutionRecord, ...]


def theorem3_scan(cf: CFExpansion, y: ExactReal, k_max: int,
                  policy: PrecisionPolicy | None = None) -> list[ScanRow]:
    """For each k, test floor(y*q_k) for primality and collect the coprime solutions at prime hits."""
    y = to_real(y)
    if real_sign(y, policy) <= 0:
        raise ValueError("the prime-floor scan needs y > 0")
    rows = []
    for k in range(min(k_max, cf.k_max - 1) + 1):
        f = real_floor(combine([(cf.q(k), y)]), policy)
        prime, certain = primality(f)
        sols: tuple[SolutionRecord, ...] = ()
        if prime or f == 1:
            step = build_candidates(cf, y, k, policy)
            sols = tuple(c.record(k) for c in step.candidates if c.coprime and not c.degenerate)
        rows.append(ScanRow(k, f, prime, certain, sols))
    return rows


def transport_solution(sol: SolutionRecord, gamma: UnimodMatrix, prob: TargetProblem,
                       policy: PrecisionPolicy | None = None) -> tuple[TargetProblem, SolutionRecord, RealScalar]:
    """Move a solution of (xi, y) to ((a xi + b)/(c xi + d), y/(c xi + d)).

    Returns the new problem, the transported solution and the factor
    1/(c xi + d) by which its error is scaled.
    """
    a, b, c, d = gamma.as_tuple()
    den = combine([(c, prob.xi)], const=d)
    if real_sign(den, policy) <= 0:
        raise NonPositiveDenominator(f"c*xi + d = {c}*({prob.xi}) + {d} is not positive")
    new_prob = TargetProblem(mobius(a, b, c, d, prob.xi), scale(prob.y, 1, den),
                             f"transport of ({prob.description}) by {gamma.as_tuple()}")
    q_new = d * sol.q - c * sol.p
    p_new = -b * sol.q + a * sol.p
    err = eval_linear_form(p_new, q_new, new_prob, policy=policy)
    bits = err.prec
    factor = RealScalar.exact(1, bits) / den.ball(bits)
    scaled = sol.error * factor
    if not err.overlaps(scaled):
        raise ArithmeticError("transported error disagrees with the scaled original")
    new = SolutionRecord(p_new, q_new, err, math.gcd(p_new, q_new) == 1, sol.bound_case, "transport", sol.k)
    return new_prob, new, factor
