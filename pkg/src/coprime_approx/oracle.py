"""Brute-force ground truth for ``|q xi + p - y|`` over all heights ``|q| <= Q``.

Each certified error comes from one fixed-point evaluation of xi and y
at ``bits(Q) + guard`` bits, so a single height costs a handful of
integer operations.  Searches against an envelope psi(q) first run a
numpy float pass with a rigorous margin on the float error, and then
certify every surviving row in exact integer arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

import numpy as np

from .continued_fractions import expand
from .precision import (
    DEFAULT_GUARD_BITS,
    DerivedReal,
    ExactReal,
    Ordering,
    PrecisionExhausted,
    PrecisionPolicy,
    QuadraticNumber,
    RealScalar,
    TargetProblem,
    as_quadratic,
    default_policy,
    eval_linear_form,
    linear_form,
    real_abs,
    real_compare,
    to_real,
)
from .transference import BoundCase, SolutionRecord

SIGNS = ("positive", "negative", "both")
_BLOCK = 1 << 16
# float pass: |computed - exact| <= (|q xi| + |y| + 1) * 2**-48 with lots of room
_FLOAT_REL = 2.0 ** -48
_WIDE = 0.4


def _product(a: ExactReal, b: ExactReal) -> ExactReal:
    qa, qb = as_quadratic(a), as_quadratic(b)
    if qa is not None and qb is not None:
        try:
            return qa * qb
        except ValueError:
            pass
    return DerivedReal(lambda bits: a.ball(bits + 4) * b.ball(bits + 4), f"({a})*({b})")


def _ball_pow(x: RealScalar, e: Fraction) -> RealScalar:
    """``x**e`` for a positive ball (integer exponents also allow x <= 0)."""
    if e.denominator == 1:
        n = int(e)
        out = RealScalar.exact(1, x.prec)
        base = x if n >= 0 else RealScalar.exact(1, x.prec) / x
        for _ in range(abs(n)):
            out = out * base
        return out
    return (x.log() * RealScalar.exact(e, x.prec)).exp()


class Envelope:
    """An approximating function given through its n-th power.

    ``psi(q)**n = c_pow * q**(-n*alpha) * log(q + 1)**(-n*beta)``, with n
    the denominator of alpha, so that for beta = 0 the comparison
    ``err <= psi(q)`` becomes the polynomial test
    ``err**n * q**(n*alpha) <= c_pow``, exact for quadratic inputs.
    """

    def __init__(self, c_pow: ExactReal | Fraction | int, n: int = 1, alpha: Fraction = Fraction(1),
                 beta: Fraction = Fraction(0), label: str = ""):
        self.c_pow = to_real(c_pow if not isinstance(c_pow, float) else Fraction(c_pow))
        self.n = n
        self.alpha = Fraction(alpha)
        self.beta = Fraction(beta)
        if (self.n * self.alpha).denominator != 1:
            raise ValueError("n * alpha must be an integer")
        self.label = label or f"({self.c_pow})^(1/{n}) q^-{self.alpha} log(q+1)^-{self.beta}"
        self._c_float = self.c_pow.approx() ** (1.0 / n)

    @classmethod
    def power(cls, c, alpha=1, beta=0, label: str = "") -> "Envelope":
        """``psi(q) = c * q**-alpha * log(q+1)**-beta``."""
        alpha, beta = Fraction(alpha), Fraction(beta)
        n = alpha.denominator
        c = to_real(Fraction(c) if isinstance(c, (int, float, str)) else c)
        c_pow = c
        for _ in range(n - 1):
            c_pow = _product(c_pow, c)
        return cls(c_pow, n, alpha, beta, label or f"{c}*q^-{alpha}*log(q+1)^-{beta}")

    @classmethod
    def theorem1(cls, prob: TargetProblem, policy: PrecisionPolicy | None = None) -> "Envelope":
        """``c / sqrt(q)`` with ``c**2 = 12 max(1, |xi|) |y|``."""
        ax = real_abs(prob.xi)
        m = ax if real_compare(ax, QuadraticNumber(Fraction(1)), policy) is Ordering.GREATER \
            else QuadraticNumber(Fraction(1))
        c2 = _product(QuadraticNumber(Fraction(12)), _product(m, real_abs(prob.y)))
        return cls(c2, 2, Fraction(1, 2), Fraction(0), "c/sqrt(q)")

    def c_ball(self, bits: int = 128) -> RealScalar:
        cp = self.c_pow.ball(bits + 8)
        if self.n == 1:
            return cp
        if self.n == 2:
            return cp.sqrt()
        return _ball_pow(cp, Fraction(1, self.n))

    def float(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        out = self._c_float * q ** (-float(self.alpha))
        if self.beta:
            out = out * np.log(q + 1.0) ** (-float(self.beta))
        return out

    def ball(self, q: int, bits: int = 128) -> RealScalar:
        """Ball for psi(q) itself."""
        qb = RealScalar.exact(q, bits + 16)
        v = self.c_ball(bits + 16) * _ball_pow(qb, -self.alpha)
        if self.beta:
            v = v * _ball_pow((qb + 1).log(), -self.beta)
        return v

    def _lhs(self, err: RealScalar, q: int) -> RealScalar:
        lhs = _ball_pow(err, Fraction(self.n)) * (q ** int(self.n * self.alpha))
        if self.beta:
            lq = RealScalar.exact(q + 1, err.prec + 16).log()
            lhs = lhs * _ball_pow(lq, self.n * self.beta)
        return lhs

    def holds_ball(self, err: RealScalar, q: int) -> bool | None:
        """Certified ``err <= psi(q)`` from a ball, or None when undecided."""
        lhs = self._lhs(err, q)
        rhs = self.c_pow.ball(lhs.prec + 4)
        lhs_hi = lhs.upper
        if lhs_hi < rhs.lower:
            return True
        if lhs.lower > rhs.upper:
            return False
        return None

    def holds_value(self, value: ExactReal, q: int, policy: PrecisionPolicy | None = None) -> bool | None:
        """Certified ``value <= psi(q)`` for an exact nonnegative real; None if undecidable."""
        qv = as_quadratic(value)
        if qv is not None and not self.beta and as_quadratic(self.c_pow) is not None:
            lhs = qv
            for _ in range(self.n - 1):
                lhs = lhs * qv
            try:
                order = real_compare(lhs * (q ** int(self.n * self.alpha)), self.c_pow, policy)
            except ValueError:
                order = Ordering.UNDECIDED
            if order is not Ordering.UNDECIDED:
                return order is not Ordering.GREATER
        policy = policy or default_policy()
        for bits in policy.schedule():
            r = self.holds_ball(value.ball(bits + q.bit_length()), q)
            if r is not None:
                return r
        return None

    def holds(self, p: int, q: int, prob: TargetProblem, policy: PrecisionPolicy | None = None,
              first: RealScalar | None = None) -> bool | None:
        """Certified ``|q xi + p - y| <= psi(|q|)``; None if undecidable at the cap."""
        if first is not None:
            r = self.holds_ball(first, abs(q))
            if r is not None:
                return r
        return self.holds_value(real_abs(linear_form(p, q, prob)), abs(q), policy)

    def __repr__(self) -> str:
        return f"Envelope({self.label})"


class _Sweep:
    """xi and y frozen at one fixed-point precision for fast per-height balls."""

    def __init__(self, prob: TargetProblem, qmax: int, guard: int = DEFAULT_GUARD_BITS):
        self.prob = prob
        self.P = guard + max(qmax, 1).bit_length() + 8
        xb = prob.xi.ball(self.P).with_prec(self.P)
        yb = prob.y.ball(self.P).with_prec(self.P)
        self.xm, self.xr, self.ym, self.yr = xb.mid, xb.rad, yb.mid, yb.rad

    def form(self, p: int, q: int) -> RealScalar:
        """Signed ball for ``q xi + p - y``."""
        return RealScalar(q * self.xm + (p << self.P) - self.ym, abs(q) * self.xr + self.yr, self.P)

    def nearest(self, q: int) -> tuple[int, RealScalar] | None:
        """Certified minimizing p for height q (floor tie-break on exact halves)."""
        s = self.form(0, q)
        one = 1 << self.P
        half = one >> 1
        # p0 = nearest integer to -s, ties toward the floor
        p0 = -((s.mid + half) // one)
        v = s.mid + p0 * one
        if abs(v) + s.rad < half:
            return p0, abs(RealScalar(v, s.rad, self.P))
        if s.rad == 0 and abs(v) == half:
            return p0, abs(RealScalar(v, 0, self.P))
        return None


def _exact_nearest(prob: TargetProblem, q: int, policy: PrecisionPolicy | None) -> tuple[int, RealScalar] | None:
    policy = policy or default_policy()
    for bits in policy.schedule():
        r = _Sweep(prob, abs(q), bits).nearest(q)
        if r is not None:
            return r
    return None


def _heights(Q: int, sign: str) -> Iterator[int]:
    if sign not in SIGNS:
        raise ValueError(f"sign must be one of {SIGNS}")
    if sign in ("negative", "both"):
        yield from range(-Q, 0)
    if sign in ("positive", "both"):
        yield from range(1, Q + 1)


def _height_blocks(Q: int, sign: str) -> Iterator[np.ndarray]:
    if sign not in SIGNS:
        raise ValueError(f"sign must be one of {SIGNS}")
    spans = []
    if sign in ("negative", "both"):
        spans.append((-Q, 0))
    if sign in ("positive", "both"):
        spans.append((1, Q + 1))
    for lo, hi in spans:
        for start in range(lo, hi, _BLOCK):
            yield np.arange(start, min(start + _BLOCK, hi), dtype=np.int64)


# -- best approximations -----------------------------------------------------


@dataclass(frozen=True)
class BestRow:
    q: int
    p: int
    error: RealScalar
    coprime: bool


def _coprime_scan(sweep: _Sweep, q: int, p0: int, err0: RealScalar) -> tuple[int, RealScalar] | None:
    """Closest p coprime to q, scanning outward from the minimizer p0.

    If j is the first offset with a coprime neighbour, the optimum sits at
    offset j or j+1 (offset m lies at distance m -/+ 1/2), so only those
    are compared.  Exact ties go to the smaller p; None means undecided.
    """
    if math.gcd(p0, q) == 1:
        return p0, err0
    j = 1
    while math.gcd(p0 - j, q) != 1 and math.gcd(p0 + j, q) != 1:
        j += 1
    contenders = [p for p in (p0 - j, p0 + j, p0 - j - 1, p0 + j + 1) if math.gcd(p, q) == 1]
    balls = sorted(((abs(sweep.form(p, q)), p) for p in contenders), key=lambda t: (t[0].center, t[1]))
    best, runner = balls[0], balls[1] if len(balls) > 1 else None
    if runner is None or best[0].upper < runner[0].lower:
        return best[1], best[0]
    if best[0] == runner[0] and best[0].rad == 0:
        return min(best[1], runner[1]), best[0]
    return None


def best_solutions(prob: TargetProblem, Q: int, coprime_only: bool = False, sign: str = "positive",
                   guard: int = DEFAULT_GUARD_BITS, policy: PrecisionPolicy | None = None,
                   undecided: list | None = None) -> list[SolutionRecord]:
    """For every height in range, the p minimizing ``|q xi + p - y|``.

    With ``coprime_only`` the closest p coprime to q is returned instead.
    Heights whose minimizer cannot be certified are left out and, when
    ``undecided`` is a list, appended to it.
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    sweep = _Sweep(prob, Q, guard)
    out = []
    for q in _heights(Q, sign):
        r = sweep.nearest(q) or _exact_nearest(prob, q, policy)
        if r is None:
            if undecided is not None:
                undecided.append(q)
            continue
        p, err = r
        if coprime_only:
            r = _coprime_scan(sweep, q, p, err)
            if r is None:
                wide = _Sweep(prob, abs(q), guard + 192)
                r = _coprime_scan(wide, q, p, err)
            if r is None:
                if undecided is not None:
                    undecided.append(q)
                continue
            p, err = r
        out.append(SolutionRecord(p, q, err, math.gcd(p, q) == 1, BoundCase.ORACLE, "oracle"))
    return out


# -- envelope searches ------------------------------------------------------


class SearchResult(NamedTuple):
    rows: list[SolutionRecord]
    undecided: list[tuple[int, int]]


def _p_range(t: float, psi: float) -> range:
    return range(math.floor(t - psi) - 1, math.ceil(t + psi) + 2)


def envelope_solutions(prob: TargetProblem, Q: int, envelope: Envelope, coprime_only: bool = True,
                       sign: str = "both", guard: int = DEFAULT_GUARD_BITS,
                       policy: PrecisionPolicy | None = None) -> SearchResult:
    """All (p, q) with ``1 <= |q| <= Q`` and certified ``|q xi + p - y| <= psi(|q|)``.

    Rows come sorted by (q, p).  Pairs whose comparison stays undecided
    at the precision cap are listed in ``undecided``.
    """
    if Q < 0:
        raise ValueError("Q must be >= 0")
    rows: list[SolutionRecord] = []
    undecided: list[tuple[int, int]] = []
    if Q == 0:
        return SearchResult(rows, undecided)
    sweep = _Sweep(prob, Q, guard)
    xf, yf = prob.xi.approx(), prob.y.approx()
    if abs(xf) * Q > 2.0 ** 50:
        raise ValueError("|xi| * Q too large for the float prefilter")

    def certify(p: int, q: int):
        if coprime_only and math.gcd(p, q) != 1:
            return
        b = abs(sweep.form(p, q))
        verdict = envelope.holds(p, q, prob, policy, first=b)
        if verdict is None:
            undecided.append((p, q))
        elif verdict:
            rows.append(SolutionRecord(p, q, b, math.gcd(p, q) == 1, BoundCase.ORACLE, "oracle"))

    for qs in _height_blocks(Q, sign):
        aq = np.abs(qs)
        psi = envelope.float(aq)
        t = yf - qs * xf
        margin = (aq * abs(xf) + abs(yf) + 1.0) * _FLOAT_REL + psi * 1e-9
        wide = psi + margin >= _WIDE
        p0 = np.rint(t)
        err = np.abs(t - p0)
        hit = ~wide & (err <= psi + margin)
        for q, tt, ps in zip(qs[wide].tolist(), t[wide].tolist(), psi[wide].tolist()):
            for p in _p_range(tt, ps):
                certify(p, q)
        for q, p in zip(qs[hit].tolist(), p0[hit].astype(np.int64).tolist()):
            certify(p, q)
    rows.sort(key=lambda r: (r.q, r.p))
    return SearchResult(rows, undecided)


class CoprimeBoundResult(NamedTuple):
    count: int
    c: RealScalar
    rows: list[SolutionRecord]
    delegated: bool = False
    undecided: int = 0


def verify_theorem1(prob: TargetProblem, Q: int, policy: PrecisionPolicy | None = None) -> CoprimeBoundResult:
    """Count coprime (p, q), ``1 <= |q| <= Q``, with ``|q xi + p - y| <= c/sqrt|q|``.

    For y = 0 the constant vanishes; the count is then the number of
    convergents with ``q_k <= Q`` (each satisfies the homogeneous bound
    and is primitive) and ``delegated`` is set.
    """
    if real_compare(prob.y, QuadraticNumber(Fraction(0)), policy) is Ordering.EQUAL:
        cf = expand(prob, 1)
        k = 1
        while cf.q(cf.k_max) <= Q and not cf.terminal:
            k *= 2
            cf = expand(prob, k, policy)
        rows = []
        for idx, (p, q) in enumerate(cf.convergents):
            if q <= Q:
                rows.append(SolutionRecord(-p, q, eval_linear_form(-p, q, prob), True, BoundCase.ORACLE,
                                           "convergent", idx))
        return CoprimeBoundResult(len(rows), RealScalar.exact(0, 64), rows, True, 0)
    env = Envelope.theorem1(prob, policy)
    res = envelope_solutions(prob, Q, env, coprime_only=True, sign="both", policy=policy)
    return CoprimeBoundResult(len(res.rows), env.c_ball(), res.rows, False, len(res.undecided))


def verify_minkowski(prob: TargetProblem, Q: int, policy: PrecisionPolicy | None = None) -> int:
    """Number of integer (p, q), ``1 <= |q| <= Q``, with ``|q xi + p - y| <= 1/(4|q|)``."""
    if Q <= 0:
        return 0
    env = Envelope.power(Fraction(1, 4), 1)
    return len(envelope_solutions(prob, Q, env, coprime_only=False, sign="both", policy=policy).rows)


# -- empirical exponents -------------------------------------------------------


@dataclass(frozen=True)
class ExponentRecord:
    q: int
    p: int
    error: RealScalar
    effective_exponent: RealScalar | None
    is_record: bool


def effective_exponent(err: RealScalar, q: int, bits: int = 128) -> RealScalar | None:
    """``-log(err)/log(q)``; None when q < 2 or err is not certifiably positive."""
    if q < 2 or err.lower <= 0:
        return None
    e = err.with_prec(max(err.prec, bits))
    return -e.log() / RealScalar.exact(q, e.prec).log()


def empirical_exponent(prob: TargetProblem, Q: int, coprime_only: bool = False,
                       policy: PrecisionPolicy | None = None) -> tuple[list[ExponentRecord], RealScalar | None]:
    """Effective exponents of the best solutions for ``1 <= q <= Q``.

    A height is a record when its error is certifiably below every earlier
    error.  The estimate is the largest effective exponent among records
    with ``q >= sqrt(Q)``, falling back to the last record.
    """
    if Q < 4:
        raise ValueError("Q must be >= 4")
    best = best_solutions(prob, Q, coprime_only=coprime_only, sign="positive", policy=policy)
    out = []
    champion: RealScalar | None = None
    for r in best:
        is_rec = champion is None or r.error.upper < champion.lower
        if is_rec:
            champion = r.error
        out.append(ExponentRecord(r.q, r.p, r.error, effective_exponent(r.error, r.q), is_rec))
    recs = [r for r in out if r.is_record and r.effective_exponent is not None]
    tail = [r for r in recs if r.q * r.q >= Q] or recs[-1:]
    if not tail:
        return out, None
    est = max((r.effective_exponent for r in tail), key=lambda b: b.center)
    return out, est


# -- vectorized dyadic kernel ---------------------------------------------------


def dyadic_window_hits(X: np.ndarray, Y: np.ndarray, bits: int, q_lo: int, q_hi: int,
                       envelope: Envelope, coprime_only: bool = True, clamp: Fraction | None = Fraction(1, 2),
                       chunk: int = 1 << 22) -> np.ndarray:
    """For dyadic points ``xi = X/2**bits, y = Y/2**bits`` flag a solution with q in [q_lo, q_hi).

    Exact int64 arithmetic decides the nearest p and its distance; the
    envelope comparison is done in floats, with every near-tie re-decided
    exactly.  Requires ``q_hi * 2**bits < 2**62`` and ``min(psi) < 0.4``.
    """
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    if (q_hi - 1).bit_length() + bits > 62:
        raise ValueError("q range and bits overflow int64")
    qs = np.arange(q_lo, q_hi, dtype=np.int64)
    psi = envelope.float(qs)
    if clamp is not None:
        psi = np.minimum(psi, float(clamp))
    if psi.size and psi.max() >= _WIDE:
        raise ValueError("dyadic kernel needs psi < 0.4 on the window")
    one = np.int64(1) << np.int64(bits)
    half = one >> np.int64(1)
    out = np.zeros(X.shape[0], dtype=bool)
    rows = max(1, chunk // max(qs.size, 1))
    scale = float(2 ** bits)
    for s in range(0, X.shape[0], rows):
        xs, ys = X[s:s + rows, None], Y[s:s + rows, None]
        v = qs[None, :] * xs - ys  # q xi - y scaled
        # p = nearest integer to -v/one, halves to the floor
        p = -((v + half) >> np.int64(bits))
        r = np.abs(v + p * one)
        rf = r / scale
        lo = rf < psi * (1 - 1e-12)
        near = ~lo & (rf <= psi * (1 + 1e-12))
        ok = lo
        if near.any():
            ok = ok.copy()
            for i, j in zip(*np.nonzero(near)):
                q = int(qs[j])
                err = Fraction(int(r[i, j]), 1 << bits)
                ok[i, j] = _exact_le(err, q, envelope, clamp)
        if coprime_only:
            ok = ok & (np.gcd(p, qs[None, :]) == 1)
        out[s:s + rows] = ok.any(axis=1)
    return out


def _exact_le(err: Fraction, q: int, envelope: Envelope, clamp: Fraction | None) -> bool:
    if clamp is not None and envelope.float(q) > float(clamp):
        return err <= clamp
    b = RealScalar.exact(err, 256)
    r = envelope.holds_ball(b, q)
    if r is None and as_quadratic(envelope.c_pow) is not None and not envelope.beta:
        lhs = err ** envelope.n * q ** int(envelope.n * envelope.alpha)
        order = real_compare(QuadraticNumber(lhs), envelope.c_pow)
        return order is not Ordering.GREATER
    if r is None:
        raise PrecisionExhausted(f"envelope comparison at q={q} undecided")
    return r


def scalar_window_hit(xi: Fraction, y: Fraction, q_lo: int, q_hi: int, envelope: Envelope,
                      coprime_only: bool = True, clamp: Fraction | None = Fraction(1, 2)) -> bool:
    """Pure-Python reference for :func:`dyadic_window_hits` on one rational point."""
    for q in range(q_lo, q_hi):
        t = q * xi - y
        p = -math.floor(t + Fraction(1, 2))
        err = abs(t + p)
        if coprime_only and math.gcd(p, q) != 1:
            continue
        if _exact_le(err, q, envelope, clamp):
            return True
    return False
