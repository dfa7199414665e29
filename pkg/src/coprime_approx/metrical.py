"""Measures of coprime strip families in the unit square, exact and Monte Carlo.

For an approximating function psi with values at most 1/2, the set
``E_q(psi)`` of (x, y) with ``|q x + p - y| <= psi(q)`` for some p
coprime to q has measure ``2 phi(q) psi(q) / q`` in the unit square.
Monte Carlo runs use numpy's Philox counter-based generator; every chunk
of samples gets its own stream spawned from the master seed, so results
do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .arith import euler_phi, totient_sieve
from .oracle import Envelope, dyadic_window_hits
from .precision import RealScalar

__all__ = [
    "InvalidPsi",
    "ClampViolation",
    "PsiSpec",
    "StripFamily",
    "euler_phi",
    "strip_measure_exact",
    "strip_measure_mc",
    "pair_intersection_mc",
    "partial_sums",
    "totient_inequality_failures",
    "borel_cantelli_lower_bound",
    "dichotomy_experiment",
    "witness_count",
]

CAP = Fraction(1, 2)
MC_CHUNK = 1 << 18
DYADIC_BITS = 47


class InvalidPsi(ValueError):
    """The approximating function violates a required invariant."""


class ClampViolation(ValueError):
    pass


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(str(v)) if isinstance(v, float) else Fraction(v)


def _exact_root(n: int, k: int) -> int | None:
    r = round(n ** (1.0 / k))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c ** k == n:
            return c
    return None


@dataclass(frozen=True)
class PsiSpec:
    """``psi(q) = min(c q**-alpha log(q+1)**-beta, cap)``; natural log."""

    c: Fraction
    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)
    cap: Fraction | None = CAP
    validate_to: int = 10_000
    ratio_bounds: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("c", "alpha", "beta"):
            object.__setattr__(self, name, _frac(getattr(self, name)))
        if self.cap is not None:
            object.__setattr__(self, "cap", _frac(self.cap))
        if self.c < 0:
            raise InvalidPsi("c must be >= 0")
        if self.alpha < 0:
            raise InvalidPsi("alpha must be >= 0, otherwise psi is increasing")
        if self.c == 0:
            return
        if self.alpha == 0 and self.beta < 0:
            raise InvalidPsi("psi is increasing (alpha = 0 with beta < 0): not non-increasing")
        q = np.arange(1, self.validate_to + 1, dtype=np.float64)
        v = self.float(q)
        if np.any(np.diff(v) > 1e-12 * v[1:]):
            bad = int(np.argmax(np.diff(v) > 1e-12 * v[1:])) + 1
            raise InvalidPsi(f"psi is not non-increasing: psi({bad + 1}) > psi({bad})")
        bounds = {}
        for m in (2, 3, 5):
            ell = np.arange(1, self.validate_to + 1, dtype=np.float64)
            r = self.raw_float(m * ell) / self.raw_float(ell)
            if not np.all(np.isfinite(r)) or r.min() <= 0:
                raise InvalidPsi(f"ratio psi({m} l)/psi(l) is not bounded away from 0 and infinity")
            bounds[m] = (float(r.min()), float(r.max()))
        object.__setattr__(self, "ratio_bounds", bounds)

    @classmethod
    def parse(cls, text: str, **kw) -> "PsiSpec":
        """``"c,alpha,beta"`` (beta optional); c may be a fraction like ``1/2``."""
        parts = [s.strip() for s in text.split(",")]
        if not 1 <= len(parts) <= 3:
            raise InvalidPsi(f"psi spec must be 'c,alpha[,beta]', got {text!r}")
        try:
            vals = [Fraction(p) for p in parts]
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidPsi(f"bad psi spec {text!r}: {exc}") from None
        return cls(*vals, **kw)

    @property
    def divergent(self) -> bool:
        """Whether sum psi(q) diverges (the cap does not change this)."""
        if self.c == 0:
            return False
        return self.alpha < 1 or (self.alpha == 1 and self.beta <= 1)

    @property
    def label(self) -> str:
        return f"{self.c}*q^-{self.alpha}*log(q+1)^-{self.beta}"

    def raw_float(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64)
        v = float(self.c) * q ** (-float(self.alpha))
        if self.beta:
            v = v * np.log(q + 1.0) ** (-float(self.beta))
        return v

    def float(self, q) -> np.ndarray:
        v = self.raw_float(q)
        return np.minimum(v, float(self.cap)) if self.cap is not None else v

    def raw_exact(self, q: int) -> Fraction | None:
        """psi(q) before the cap as a rational, when it is one."""
        if self.c == 0:
            return Fraction(0)
        if self.beta:
            return None
        a = self.alpha
        root = _exact_root(q, a.denominator)
        if root is None:
            return None
        return self.c / Fraction(root) ** a.numerator

    def exact(self, q: int) -> Fraction | RealScalar:
        """psi(q) with the cap applied: a Fraction when rational, else a ball."""
        raw = self.raw_exact(q)
        if raw is not None:
            if self.cap is not None:
                return min(raw, self.cap)
            return raw
        b = self.envelope().ball(q, 128)
        if self.cap is not None and b.lower >= self.cap:
            return self.cap
        return b

    def envelope(self) -> Envelope:
        return Envelope.power(self.c, self.alpha, self.beta, self.label)


@dataclass(frozen=True)
class StripFamily:
    q: int
    psi: PsiSpec

    def measure(self):
        return strip_measure_exact(self.q, self.psi)


# -- exact measures ---------------------------------------------------------------


def strip_measure_exact(q: int, psi: PsiSpec) -> Fraction | RealScalar:
    """``2 phi(q) psi(q) / q``; the cap must not be exceeded when it is off."""
    if q < 1:
        raise ValueError("q must be >= 1")
    val = psi.exact(q)
    if psi.cap is None:
        too_big = val > CAP if isinstance(val, Fraction) else val.upper > CAP
        if too_big:
            raise ClampViolation(f"psi({q}) exceeds 1/2; the strips overlap")
    factor = Fraction(2 * euler_phi(q), q)
    return val * factor if isinstance(val, Fraction) else val * RealScalar.exact(factor, val.prec + 8)


# -- Monte Carlo ------------------------------------------------------------------


class MCResult(NamedTuple):
    estimate: float
    std_error: float
    hits: int
    n: int
    seed: int


def _chunked(n: int, seed: int, fn: Callable[[np.random.Generator, int], int], threads: int = 1) -> int:
    sizes = [MC_CHUNK] * (n // MC_CHUNK) + ([n % MC_CHUNK] if n % MC_CHUNK else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i: int) -> int:
        return fn(np.random.Generator(np.random.Philox(children[i])), sizes[i])

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return sum(ex.map(run, range(len(sizes))))
    return sum(run(i) for i in range(len(sizes)))


def _near(q: int, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest p to ``y - q x`` and the distance ``|q x + p - y|``."""
    t = q * x - y
    p = -np.floor(t + 0.5)
    return p.astype(np.int64), np.abs(t + p)


def _member(q: int, psi_q: float, x: np.ndarray, y: np.ndarray, coprime: bool) -> np.ndarray:
    p, err = _near(q, x, y)
    hit = err < psi_q
    if coprime:
        hit &= np.gcd(p, q) == 1
    return hit


def _result(hits: int, n: int, seed: int) -> MCResult:
    m = hits / n
    return MCResult(m, math.sqrt(max(m * (1 - m), 0.0) / n), hits, n, seed)


def strip_measure_mc(q: int, psi: PsiSpec, n_samples: int, seed: int, threads: int = 1) -> MCResult:
    """Fraction of uniform points of the unit square lying in ``E_q(psi)``."""
    if n_samples < 10_000:
        raise ValueError("n_samples must be >= 10^4")
    psi_q = float(psi.float(q))

    def fn(rng, n):
        x, y = rng.random(n), rng.random(n)
        return int(_member(q, psi_q, x, y, True).sum())

    return _result(_chunked(n_samples, seed, fn, threads), n_samples, seed)


class PairResult(NamedTuple):
    estimate: float
    std_error: float
    bound_4psipsi: float
    coprime: bool


def pair_intersection_mc(q: int, s: int, psi: PsiSpec, n_samples: int, seed: int,
                         coprime: bool = False, threads: int = 1) -> PairResult:
    """Measure of the points within psi of both strip families for q and s."""
    if q == s:
        raise ValueError("q and s must differ")
    pq, ps = float(psi.float(q)), float(psi.float(s))

    def fn(rng, n):
        x, y = rng.random(n), rng.random(n)
        return int((_member(q, pq, x, y, coprime) & _member(s, ps, x, y, coprime)).sum())

    r = _result(_chunked(n_samples, seed, fn, threads), n_samples, seed)
    return PairResult(r.estimate, r.std_error, 4 * pq * ps, coprime)


def witness_count(x: float, y: float, q: int, psi_q: float) -> int:
    """Number of p (any p) with ``|q x + p - y| <= psi_q``; at most one when psi_q < 1/2."""
    t = q * x - y
    return sum(1 for p in range(-math.ceil(t) - 2, -math.floor(t) + 3) if abs(t + p) <= psi_q)


# -- totient sums -------------------------------------------------------------------


class PartialSums(NamedTuple):
    sum_psi: RealScalar
    sum_phi_psi_over_q: RealScalar
    inequality12_holds: bool
    left_margin: RealScalar
    right_margin: RealScalar


_SUM_BITS = 96


def _term_bounds(psi: PsiSpec, Q: int, bits: int = _SUM_BITS):
    """Per-q integer bounds [lo, hi] on ``psi(q) * 2**bits``."""
    if psi.c == 0:
        zeros = [0] * Q
        return zeros, zeros
    if not psi.beta and psi.alpha.denominator == 1:
        lo, hi = [], []
        for q in range(1, Q + 1):
            v = min(psi.raw_exact(q), psi.cap) if psi.cap is not None else psi.raw_exact(q)
            n, r = divmod(v.numerator << bits, v.denominator)
            lo.append(n)
            hi.append(n + (1 if r else 0))
        return lo, hi
    # floats: libm pow/log are within a few ulps; a 2**-40 relative slack covers them
    v = psi.float(np.arange(1, Q + 1, dtype=np.float64))
    scale = 2.0 ** bits
    lo = [max(int(math.floor(f * (1 - 2.0 ** -40) * scale)), 0) for f in v.tolist()]
    hi = [int(math.ceil(f * (1 + 2.0 ** -40) * scale)) for f in v.tolist()]
    return lo, hi


def _dir_div(n: int, d: int, up: bool) -> int:
    return -((-n) // d) if up else n // d


def partial_sums(psi: PsiSpec, Q: int, bits: int = _SUM_BITS) -> PartialSums:
    """``sum psi(q)`` and ``sum phi(q) psi(q)/q`` over q <= Q, with a certified check of
    ``(1/2) sum psi <= sum phi psi / q <= sum psi``.

    The check bounds the two differences term by term with directed
    rounding, so an exact tie (Q = 1 on the right) is decided.
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    phi = totient_sieve(Q).tolist()
    lo, hi = _term_bounds(psi, Q, bits)
    s_lo = s_hi = f_lo = f_hi = 0
    l_lo = l_hi = r_lo = r_hi = 0
    for q in range(1, Q + 1):
        a, b, ph = lo[q - 1], hi[q - 1], phi[q]
        s_lo += a
        s_hi += b
        f_lo += _dir_div(a * ph, q, False)
        f_hi += _dir_div(b * ph, q, True)
        # right: psi (q - phi)/q >= 0 ; left: psi (2 phi - q)/(2q)
        w = q - ph
        r_lo += _dir_div(a * w, q, False)
        r_hi += _dir_div(b * w, q, True)
        w2 = 2 * ph - q
        if w2 >= 0:
            l_lo += _dir_div(a * w2, 2 * q, False)
            l_hi += _dir_div(b * w2, 2 * q, True)
        else:
            l_lo += _dir_div(b * w2, 2 * q, False)
            l_hi += _dir_div(a * w2, 2 * q, True)
    ball = lambda x, y: RealScalar.from_bounds(x, y, bits)  # noqa: E731
    left, right = ball(l_lo, l_hi), ball(r_lo, r_hi)
    holds = left.lower >= 0 and right.lower >= 0
    return PartialSums(ball(s_lo, s_hi), ball(f_lo, f_hi), holds, left, right)


def totient_inequality_failures(psi: PsiSpec, Q: int, bits: int = _SUM_BITS) -> list[int]:
    """Every Q' <= Q at which the totient-sum inequality is not certified."""
    phi = totient_sieve(Q).tolist()
    lo, hi = _term_bounds(psi, Q, bits)
    bad = []
    l_lo = r_lo = 0
    for q in range(1, Q + 1):
        a, b, ph = lo[q - 1], hi[q - 1], phi[q]
        r_lo += _dir_div(a * (q - ph), q, False)
        w2 = 2 * ph - q
        l_lo += _dir_div((a if w2 >= 0 else b) * w2, 2 * q, False)
        if l_lo < 0 or r_lo < 0:
            bad.append(q)
    return bad


class BCRatio(NamedTuple):
    ratio: float
    numerator: float
    denominator: float
    exceeds_quarter: bool
    small_q: bool


def borel_cantelli_lower_bound(psi: PsiSpec, Q: int, tolerance: float = 0.05, small_q: int = 100) -> BCRatio:
    """``(sum lambda_q)**2 / sum_{q,s} b(q,s)`` with ``lambda_q = 2 phi psi / q``.

    ``b(q, s) = 4 psi(q) psi(s)`` off the diagonal and ``2 psi(q)`` on it.
    Only meaningful when sum psi diverges.
    """
    if not psi.divergent:
        raise InvalidPsi("sum psi converges: the converse Borel-Cantelli ratio is not meaningful")
    if Q < 1:
        raise ValueError("Q must be >= 1")
    q = np.arange(1, Q + 1, dtype=np.float64)
    v = psi.float(q)
    phi = totient_sieve(Q)[1:].astype(np.float64)
    lam = math.fsum((2 * phi * v / q).tolist())
    s1 = math.fsum(v.tolist())
    s2 = math.fsum((v * v).tolist())
    den = 4 * (s1 * s1 - s2) + 2 * s1
    ratio = lam * lam / den
    return BCRatio(ratio, lam * lam, den, ratio >= 0.25 - tolerance, Q < small_q)


# -- windowed dichotomy ---------------------------------------------------------------


class WindowRow(NamedTuple):
    j: int
    q_lo: int
    q_hi: int
    hits: int
    n_points: int
    fraction: float
    std_error: float


def _parse_windows(windows) -> list[int]:
    if isinstance(windows, str):
        try:
            a, b = (int(t) for t in windows.split(".."))
        except ValueError:
            raise ValueError(f"windows must look like 'j0..j1', got {windows!r}") from None
        if a > b:
            raise ValueError(f"empty window range {windows!r}")
        return list(range(a, b + 1))
    return [int(j) for j in windows]


def dichotomy_experiment(psi: PsiSpec, n_points: int, q_windows: Sequence[int] | str, seed: int,
                         threads: int = 1) -> list[WindowRow]:
    """Per dyadic window ``[2**j, 2**(j+1))``, the fraction of random points with a
    primitive solution ``|q xi + p - y| <= psi(q)`` and q in the window.

    Points are dyadic rationals with 47-bit numerators, drawn uniformly
    from the unit square, so every distance is exact in int64.
    """
    js = _parse_windows(q_windows)
    if not js or min(js) < 0 or max(js) > 14:
        raise ValueError("windows must lie in 0..14 (q < 2**15)")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    X = rng.integers(0, 1 << DYADIC_BITS, size=n_points, dtype=np.int64)
    Y = rng.integers(0, 1 << DYADIC_BITS, size=n_points, dtype=np.int64)
    rows = []
    env = psi.envelope() if psi.c else None

    def window(j: int) -> WindowRow:
        lo, hi = 1 << j, 1 << (j + 1)
        if env is None:
            hits = 0
        else:
            hits = int(dyadic_window_hits(X, Y, DYADIC_BITS, lo, hi, env, True, psi.cap).sum())
        m = hits / n_points
        return WindowRow(j, lo, hi, hits, n_points, m, math.sqrt(m * (1 - m) / n_points))

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            rows = list(ex.map(window, js))
    else:
        rows = [window(j) for j in js]
    return rows
