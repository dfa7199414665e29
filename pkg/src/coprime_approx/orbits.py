"""SL(2, Z) orbits of a planar point: ball enumeration, shrinking targets, counting.

Two independent enumerators are provided.  The column enumerator walks
every primitive first column (a, c) and the one-parameter family of
completions (b + k a, d + k c); it lists whole norm balls.  The row
enumerator starts from primitive rows (a, b) with ``a x1 + b x2`` near a
target coordinate and completes them to matrices whose second row is
also near the target, so its cost scales with the number of near
matrices rather than with the size of the ball.

Norms are sup norms throughout, for matrices and for vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .matrices import UnimodMatrix
from .oracle import Envelope
from .precision import (
    DEFAULT_GUARD_BITS,
    ExactReal,
    Ordering,
    PrecisionPolicy,
    QuadraticNumber,
    RealScalar,
    TargetProblem,
    as_quadratic,
    combine,
    default_policy,
    parse_real,
    real_abs,
    real_compare,
    to_real,
)
from .transference import BoundCase, SolutionRecord

Point = tuple[ExactReal, ExactReal]
_FLOAT_REL = 2.0 ** -46


def as_point(x: Sequence) -> Point:
    """Coerce a pair of expressions, numbers or exact reals to a point."""
    if len(x) != 2:
        raise ValueError("a point has two coordinates")
    return tuple(parse_real(v) if isinstance(v, str) else to_real(v) for v in x)  # type: ignore[return-value]


def _check_slope(x: Point) -> None:
    q1, q2 = as_quadratic(x[0]), as_quadratic(x[1])
    if q1 is None or q2 is None:
        return
    if q2.sign() == 0 or q1.sign() == 0:
        raise ValueError("point lies on a coordinate axis: rational slope, discrete orbit")
    try:
        ratio = q1 / q2
    except ValueError:
        return
    if ratio.is_rational and ratio.irrational is not None:
        raise ValueError(f"slope {ratio} of x is rational: the orbit is discrete")


# -- column enumeration of norm balls ----------------------------------------------


def _k_interval(off: int, step: int, bound: int) -> tuple[int, int] | None:
    """Integers k with ``|off + k*step| <= bound`` (None = no constraint)."""
    if step == 0:
        return None if abs(off) <= bound else (1, 0)
    if step > 0:
        return -((bound + off) // step), (bound - off) // step
    return -((bound - off) // -step), (bound + off) // -step


def _completion(a: int, c: int) -> tuple[int, int]:
    """(b, d) with a d - b c = 1 for coprime (a, c)."""
    if c == 0:
        return 0, a  # a = +-1
    d = pow(a, -1, abs(c)) if abs(c) > 1 else 0
    b = (a * d - 1) // c
    return b, d


def iter_ball_tuples(T: int) -> Iterator[tuple[int, int, int, int]]:
    """Every (a, b, c, d) in SL(2, Z) with all entries in [-T, T], each once, unordered."""
    if T < 1:
        raise ValueError("T must be >= 1")
    for a in range(-T, T + 1):
        for c in range(-T, T + 1):
            if math.gcd(a, c) != 1:
                continue
            b0, d0 = _completion(a, c)
            lo, hi = -(1 << 62), 1 << 62
            for iv in (_k_interval(b0, a, T), _k_interval(d0, c, T)):
                if iv is not None:
                    lo, hi = max(lo, iv[0]), min(hi, iv[1])
            for k in range(lo, hi + 1):
                yield a, b0 + k * a, c, d0 + k * c


def iter_ball(T: int) -> Iterator[UnimodMatrix]:
    for t in iter_ball_tuples(T):
        yield UnimodMatrix(*t)


def enumerate_ball(T: int) -> Iterator[UnimodMatrix]:
    """Every gamma with norm <= T, ordered by norm, then lexicographically on (a, b, c, d).

    The ordered stream materializes the ball; use :func:`iter_ball` for
    large T when order does not matter.
    """
    items = sorted(iter_ball_tuples(T), key=lambda t: (max(map(abs, t)), t))
    for t in items:
        yield UnimodMatrix(*t)


def exhaustive_ball(T: int) -> set[tuple[int, int, int, int]]:
    """Reference enumeration by four nested loops (small T only)."""
    r = range(-T, T + 1)
    return {(a, b, c, d) for a in r for b in r for c in r for d in r if a * d - b * c == 1}


# -- certified evaluation of gamma x ------------------------------------------------


class _Frozen:
    """x and a target t at a fixed precision, for integer-only balls of gamma x - t."""

    def __init__(self, x: Point, t: Point, T: int, guard: int = DEFAULT_GUARD_BITS):
        self.x, self.t = x, t
        self.P = guard + max(T, 1).bit_length() + 8
        bx = [v.ball(self.P).with_prec(self.P) for v in x]
        bt = [v.ball(self.P).with_prec(self.P) for v in t]
        self.xm = [b.mid for b in bx]
        self.xr = [b.rad for b in bx]
        self.tm = [b.mid for b in bt]
        self.tr = [b.rad for b in bt]

    def coord(self, i: int, u: int, v: int) -> RealScalar:
        """Ball for ``u x1 + v x2 - t_i``."""
        mid = u * self.xm[0] + v * self.xm[1] - self.tm[i]
        rad = abs(u) * self.xr[0] + abs(v) * self.xr[1] + self.tr[i]
        return RealScalar(mid, rad, self.P)

    def image(self, g: tuple[int, int, int, int]) -> tuple[RealScalar, RealScalar]:
        a, b, c, d = g
        return self.coord(0, a, b), self.coord(1, c, d)

    def distance(self, g) -> RealScalar:
        u, w = self.image(g)
        return _sup(abs(u), abs(w))


def _sup(u: RealScalar, w: RealScalar) -> RealScalar:
    p = max(u.prec, w.prec)
    u, w = u.with_prec(p), w.with_prec(p)
    lo = max(u.mid - u.rad, w.mid - w.rad)
    hi = max(u.mid + u.rad, w.mid + w.rad)
    return RealScalar.from_bounds(lo, hi, p)


def _exact_coords(g, x: Point, t: Point) -> tuple[ExactReal, ExactReal]:
    a, b, c, d = g
    return (combine([(a, x[0]), (b, x[1]), (-1, t[0])]), combine([(c, x[0]), (d, x[1]), (-1, t[1])]))


def _exact_sup(g, x: Point, t: Point, policy=None) -> ExactReal | None:
    u, w = (real_abs(v) for v in _exact_coords(g, x, t))
    if as_quadratic(u) is None or as_quadratic(w) is None:
        return None
    return u if real_compare(u, w, policy) is not Ordering.LESS else w


# -- row enumeration near a target --------------------------------------------------


def near_matrices(x: Point, t: Point, R: float, T: int) -> list[tuple[int, int, int, int]]:
    """Superset (by a float margin) of the gamma, norm <= T, with ``|gamma x - t| <= R``.

    Callers certify each returned matrix.
    """
    x, t = as_point(x), as_point(t)
    x1, x2 = x[0].approx(), x[1].approx()
    t1, t2 = t[0].approx(), t[1].approx()
    eps = (T * (abs(x1) + abs(x2)) + abs(t1) + abs(t2) + 1.0) * _FLOAT_REL
    out = []
    for a, b in _primitive_rows(x1, x2, t1, R + eps, T):
        c0, d0 = _row_completion(a, b)
        v = a * x1 + b * x2
        w0 = c0 * x1 + d0 * x2
        lo, hi = -(1 << 62), 1 << 62
        for iv in (_k_interval(c0, a, T), _k_interval(d0, b, T)):
            if iv is not None:
                lo, hi = max(lo, iv[0]), min(hi, iv[1])
        if lo > hi:
            continue
        if v != 0.0:
            ka, kb = (t2 - R - eps - w0) / v, (t2 + R + eps - w0) / v
            if ka > kb:
                ka, kb = kb, ka
            lo, hi = max(lo, math.floor(ka) - 1), min(hi, math.ceil(kb) + 1)
        for k in range(lo, hi + 1):
            c, d = c0 + k * a, d0 + k * b
            if abs(w0 + k * v - t2) <= R + eps * (1 + abs(k)):
                out.append((a, b, c, d))
    return out


def _row_completion(a: int, b: int) -> tuple[int, int]:
    """(c, d) with a d - b c = 1 for a primitive row (a, b)."""
    if b == 0:
        return 0, a
    d = pow(a, -1, abs(b)) if abs(b) > 1 else 0
    c = (a * d - 1) // b
    return c, d


def _primitive_rows(x1: float, x2: float, t: float, R: float, T: int) -> Iterator[tuple[int, int]]:
    """Primitive (a, b), |a|, |b| <= T, with ``|a x1 + b x2 - t| <= R`` (float test)."""
    swap = abs(x1) > abs(x2)
    u1, u2 = (x2, x1) if swap else (x1, x2)
    # loop variable s multiplies u1; the other entry r solves |s u1 + r u2 - t| <= R
    s = np.arange(-T, T + 1, dtype=np.int64)
    lo = np.ceil((t - R - s * u1) / u2)
    hi = np.floor((t + R - s * u1) / u2)
    if u2 < 0:
        lo, hi = np.ceil((t + R - s * u1) / u2), np.floor((t - R - s * u1) / u2)
    lo = np.maximum(lo - 1, -T).astype(np.int64)
    hi = np.minimum(hi + 1, T).astype(np.int64)
    n = np.maximum(hi - lo + 1, 0)
    ss = np.repeat(s, n)
    starts = np.repeat(lo - np.cumsum(n) + n, n)
    rr = starts + np.arange(ss.size, dtype=np.int64)
    keep = np.gcd(ss, rr) == 1
    ss, rr = ss[keep], rr[keep]
    pairs = (rr, ss) if swap else (ss, rr)
    yield from zip(pairs[0].tolist(), pairs[1].tolist())


# -- shrinking-target hits ----------------------------------------------------------


@dataclass(frozen=True)
class HitRecord:
    gamma: UnimodMatrix
    image: tuple[RealScalar, RealScalar]
    distance: RealScalar
    norm: int

    def as_row(self) -> dict:
        g = self.gamma
        return {"a": g.a, "b": g.b, "c": g.c, "d": g.d, "norm": self.norm,
                "image_x": self.image[0], "image_y": self.image[1], "distance": self.distance}


class OrbitHits(NamedTuple):
    hits: list[HitRecord]
    undecided: list[UnimodMatrix]


def _le_norm_power(dist: RealScalar, norm: int, mu: Fraction) -> bool | None:
    """Certified ``dist <= norm**-mu`` (mu >= 0)."""
    return Envelope.power(1, mu).holds_ball(dist, norm)


def _hit_record(fr: _Frozen, g) -> HitRecord:
    u, w = fr.image(g)
    tx, ty = fr.t
    img = (u + tx.ball(fr.P), w + ty.ball(fr.P))
    return HitRecord(UnimodMatrix(*g), img, _sup(abs(u), abs(w)), max(map(abs, g)))


def orbit_hits(x: Point, y: Point, T: int, mu, policy: PrecisionPolicy | None = None) -> OrbitHits:
    """All gamma with norm <= T and certified ``|gamma x - y| <= norm**-mu``."""
    x, y = as_point(x), as_point(y)
    if all(real_compare(v, QuadraticNumber(Fraction(0)), policy) is Ordering.EQUAL for v in x):
        raise ValueError("x must be nonzero")
    mu = Fraction(mu)
    if mu < 0:
        raise ValueError("mu must be >= 0")
    R = 1.0
    fr = _Frozen(x, y, T)
    hits, undecided = [], []
    for g in near_matrices(x, y, R, T):
        dist = fr.distance(g)
        n = max(map(abs, g))
        ok = _le_norm_power(dist, n, mu)
        if ok is None:
            ok = _decide_exact_le(g, x, y, n, mu, policy)
        if ok is None:
            undecided.append(UnimodMatrix(*g))
        elif ok:
            hits.append(_hit_record(fr, g))
    hits.sort(key=lambda h: h.gamma.sort_key())
    undecided.sort(key=UnimodMatrix.sort_key)
    return OrbitHits(hits, undecided)


def _decide_exact_le(g, x, y, n: int, mu: Fraction, policy) -> bool | None:
    env = Envelope.power(1, mu)
    s = _exact_sup(g, x, y, policy)
    if s is not None:
        return env.holds_value(s, n, policy)
    policy = policy or default_policy()
    for bits in policy.schedule():
        r = env.holds_ball(_Frozen(x, y, n, bits).distance(g), n)
        if r is not None:
            return r
    return None


# -- coprime solutions through the orbit of (xi, 1) ----------------------------------------


class OrbitSolution(NamedTuple):
    first: SolutionRecord
    second: SolutionRecord
    gamma: UnimodMatrix


def theorem1_via_orbit(prob: TargetProblem, T: int, policy: PrecisionPolicy | None = None) -> list[OrbitSolution]:
    """Matrices with ``|gamma (xi, 1) - (y, y)| <= c |gamma|**-1/2`` and their two rows as solutions.

    The rows (q1, p1) and (q2, p2) of gamma are primitive with
    ``q1 p2 - q2 p1 = 1``; each is re-certified against ``c/sqrt|q|``.
    Matrices with a row whose q vanishes are skipped.
    """
    if real_compare(prob.y, QuadraticNumber(Fraction(0)), policy) is Ordering.EQUAL:
        raise ValueError("y must be nonzero")
    env = Envelope.theorem1(prob, policy)
    x = (prob.xi, QuadraticNumber(Fraction(1)))
    t = (prob.y, prob.y)
    fr = _Frozen(x, t, T)
    R = float(env.c_ball(64)) * (1 + 1e-9)
    out = []
    for g in near_matrices(x, t, R, T):
        a, b, c, d = g
        if a == 0 or c == 0:
            continue
        n = max(map(abs, g))
        ok = env.holds_ball(fr.distance(g), n)
        if ok is None:
            s = _exact_sup(g, x, t, policy)
            ok = env.holds_value(s, n, policy) if s is not None else None
        if not ok:
            continue
        rows = []
        for q, p in ((a, b), (c, d)):
            err = abs(fr.coord(0, q, p))
            if env.holds(p, q, prob, policy, first=err):
                rows.append(SolutionRecord(p, q, err, math.gcd(p, q) == 1, BoundCase.ORBIT, "orbit"))
        if len(rows) == 2:
            out.append(OrbitSolution(rows[0], rows[1], UnimodMatrix(*g)))
    out.sort(key=lambda s: s.gamma.sort_key())
    return out


# -- annulus counting -----------------------------------------------------------------


@dataclass(frozen=True)
class Annulus:
    """``{z : a_inner <= |z| <= b_outer}`` in the sup norm."""

    a_inner: Fraction
    b_outer: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a_inner", Fraction(self.a_inner))
        object.__setattr__(self, "b_outer", Fraction(self.b_outer))
        if not 0 < self.a_inner < self.b_outer:
            raise ValueError("need 0 < a_inner < b_outer")

    def log_measure(self) -> float:
        """Integral of dz/|z| over the annulus (sup norm): 8 (b - a)."""
        return float(8 * (self.b_outer - self.a_inner))


def _membership(s: RealScalar, om: Annulus) -> bool | None:
    if s.lower >= om.a_inner and s.upper <= om.b_outer:
        return True
    if s.upper < om.a_inner or s.lower > om.b_outer:
        return False
    return None


def _member_exact(g, x: Point, om: Annulus, policy) -> bool | None:
    zero = (QuadraticNumber(Fraction(0)), QuadraticNumber(Fraction(0)))
    s = _exact_sup(g, x, zero, policy)
    if s is not None:
        lo = real_compare(s, QuadraticNumber(om.a_inner), policy)
        hi = real_compare(s, QuadraticNumber(om.b_outer), policy)
        return lo is not Ordering.LESS and hi is not Ordering.GREATER
    policy = policy or default_policy()
    n = max(map(abs, g))
    for bits in policy.schedule():
        r = _membership(_Frozen(x, zero, n, bits).distance(g), om)
        if r is not None:
            return r
    return None


class CountRow(NamedTuple):
    T: int
    M: int
    ratio: float
    boundary_undecided: int


def annulus_members(x: Point, omega: Annulus, T: int, policy: PrecisionPolicy | None = None
                    ) -> tuple[list[tuple[int, int, int, int]], list[tuple[int, int, int, int]]]:
    """Certified members (row enumerator) and the boundary-undecided matrices."""
    x = as_point(x)
    zero = (QuadraticNumber(Fraction(0)), QuadraticNumber(Fraction(0)))
    fr = _Frozen(x, zero, T)
    members, undecided = [], []
    for g in near_matrices(x, zero, float(omega.b_outer), T):
        r = _membership(fr.distance(g), omega)
        if r is None:
            r = _member_exact(g, x, omega, policy)
        if r is None:
            undecided.append(g)
        elif r:
            members.append(g)
    return members, undecided


def count_in_annulus(x: Point, omega: Annulus, T_list: Sequence[int],
                     policy: PrecisionPolicy | None = None) -> list[CountRow]:
    """``M(T) = #{gamma : |gamma| <= T, gamma x in omega}`` for each T."""
    x = as_point(x)
    _check_slope(x)
    Ts = sorted(T_list)
    members, undecided = annulus_members(x, omega, Ts[-1], policy)
    norms = np.sort(np.array([max(map(abs, g)) for g in members], dtype=np.int64))
    un = np.sort(np.array([max(map(abs, g)) for g in undecided], dtype=np.int64))
    rows = []
    for T in T_list:
        M = int(np.searchsorted(norms, T, side="right"))
        rows.append(CountRow(T, M, M / T, int(np.searchsorted(un, T, side="right"))))
    return rows


def count_by_ball_filter(x: Point, omega: Annulus, T: int, policy: PrecisionPolicy | None = None) -> tuple[int, int]:
    """The same count by filtering the full column enumeration: (members, undecided)."""
    x = as_point(x)
    x1, x2 = x[0].approx(), x[1].approx()
    eps = (T * (abs(x1) + abs(x2)) + 1.0) * _FLOAT_REL
    a_in, b_out = float(omega.a_inner), float(omega.b_outer)
    zero = (QuadraticNumber(Fraction(0)), QuadraticNumber(Fraction(0)))
    fr = None
    members = undecided = 0
    for a in range(-T, T + 1):
        for c in range(-T, T + 1):
            if math.gcd(a, c) != 1:
                continue
            b0, d0 = _completion(a, c)
            lo, hi = -(1 << 62), 1 << 62
            for iv in (_k_interval(b0, a, T), _k_interval(d0, c, T)):
                if iv is not None:
                    lo, hi = max(lo, iv[0]), min(hi, iv[1])
            u0, w0 = a * x1 + b0 * x2, c * x1 + d0 * x2
            du, dw = a * x2, c * x2
            for k in range(lo, hi + 1):
                s = max(abs(u0 + k * du), abs(w0 + k * dw))
                if s < a_in - eps or s > b_out + eps:
                    continue
                g = (a, b0 + k * a, c, d0 + k * c)
                if a_in + eps < s < b_out - eps:
                    members += 1
                    continue
                fr = fr or _Frozen(x, zero, T)
                r = _membership(fr.distance(g), omega)
                if r is None:
                    r = _member_exact(g, x, omega, policy)
                if r is None:
                    undecided += 1
                elif r:
                    members += 1
    return members, undecided


# -- density exponent --------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentHit:
    gamma: UnimodMatrix
    distance: RealScalar
    norm: int
    exponent: RealScalar | None
    is_record: bool


class DensityEstimate(NamedTuple):
    records: list[ExponentHit]
    mu_hat: RealScalar | None
    exact_hits: list[UnimodMatrix]


def _is_exact_hit(g, x: Point, y: Point, policy) -> bool:
    u, w = _exact_coords(g, x, y)
    qu, qw = as_quadratic(u), as_quadratic(w)
    return qu is not None and qw is not None and qu.sign() == 0 and qw.sign() == 0


def density_exponent_estimate(x: Point, y: Point, T: int, policy: PrecisionPolicy | None = None) -> DensityEstimate:
    """Record-breaking approaches of the orbit of x to y, and the tail exponent estimate.

    Matrices with distance <= 1 are scanned in (norm, lexicographic)
    order; a matrix is a record when its distance is certifiably below
    every earlier one.  ``mu_hat`` is the largest ``-log d / log |gamma|``
    over records of norm >= sqrt(T).  Exact hits are set aside.
    """
    x, y = as_point(x), as_point(y)
    _check_slope(x)
    if T < 4:
        raise ValueError("T must be >= 4")
    s = math.isqrt(T - 1) + 1  # smallest norm with norm**2 >= T
    fr = _Frozen(x, y, T)
    # matrices below the tail all count; afterwards only those that can still
    # beat the best distance seen so far
    head = [g for g in near_matrices(x, y, 1.0, s - 1)]
    champion = None
    records: list[ExponentHit] = []
    exact: list[UnimodMatrix] = []

    def scan(items):
        nonlocal champion
        for g in sorted(set(items), key=lambda g: (max(map(abs, g)), g)):
            n = max(map(abs, g))
            d = fr.distance(g)
            if d.lower > 1:
                continue
            if d.lower <= 0 and _is_exact_hit(g, x, y, policy):
                exact.append(UnimodMatrix(*g))
                continue
            if champion is None or d.upper < champion.lower:
                champion = d
                e = -d.log() / RealScalar.exact(n, d.prec).log() if n >= 2 and d.lower > 0 else None
                records.append(ExponentHit(UnimodMatrix(*g), d, n, e, True))

    scan(head)
    R = float(champion.upper) if champion is not None else 1.0
    tail = [g for g in near_matrices(x, y, min(R, 1.0), T) if max(map(abs, g)) >= s]
    scan(tail)
    tail_recs = [r for r in records if r.norm >= s and r.exponent is not None]
    mu_hat = max((r.exponent for r in tail_recs), key=lambda b: b.center) if tail_recs else None
    return DensityEstimate(records, mu_hat, exact)


def density_exponent_bruteforce(x: Point, y: Point, T: int) -> DensityEstimate:
    """Reference for :func:`density_exponent_estimate` that scans the whole ball (small T)."""
    x, y = as_point(x), as_point(y)
    s = math.isqrt(T - 1) + 1
    fr = _Frozen(x, y, T)
    champion = None
    records, exact = [], []
    for m in enumerate_ball(T):
        g = m.as_tuple()
        d = fr.distance(g)
        if d.lower > 1:
            continue
        if d.lower <= 0 and _is_exact_hit(g, x, y, None):
            exact.append(m)
            continue
        if champion is None or d.upper < champion.lower:
            champion = d
            n = m.norm()
            e = -d.log() / RealScalar.exact(n, d.prec).log() if n >= 2 and d.lower > 0 else None
            records.append(ExponentHit(m, d, n, e, True))
    tail_recs = [r for r in records if r.norm >= s and r.exponent is not None]
    mu_hat = max((r.exponent for r in tail_recs), key=lambda b: b.center) if tail_recs else None
    return DensityEstimate(records, mu_hat, exact)
