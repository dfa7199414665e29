import math
from fractions import Fraction
from itertools import islice

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from coprime_approx.continued_fractions import (
    KHINTCHINE_LEVY,
    DepthError,
    expand,
    khintchine_levy_stat,
    series5_partial_sum,
    verify_identities,
)
from coprime_approx.precision import E, GOLDEN, SQRT2, PrecisionExhausted, PrecisionPolicy, QuadraticNumber, parse_real


@pytest.fixture(autouse=True)
def _mp_precision():
    with mpmath.workdps(80):
        yield



def test_golden_ratio():
    cf = expand(GOLDEN, 6)
    assert cf.partial_quotients == (1,) * 7
    assert cf.convergents == ((1, 1), (2, 1), (3, 2), (5, 3), (8, 5), (13, 8), (21, 13))


def test_sqrt2():
    cf = expand(SQRT2, 4)
    assert cf.partial_quotients == (1, 2, 2, 2, 2)
    assert cf.convergents == ((1, 1), (3, 2), (7, 5), (17, 12), (41, 29))


def test_rational_terminates():
    cf = expand(parse_real("7/5"), 10)
    assert cf.partial_quotients == (1, 2, 2)
    assert cf.terminal and cf.k_max == 2


def test_e_matches_known_pattern():
    cf = expand(E, 30)
    pattern = [2] + [x for k in range(1, 12) for x in (1, 2 * k, 1)]
    assert list(cf.partial_quotients) == pattern[:31]


@settings(max_examples=25)
@given(st.integers(2, 500).filter(lambda d: math.isqrt(d) ** 2 != d), st.integers(-5, 5), st.integers(1, 5))
def test_surds_match_sympy(d, a, den):
    x = QuadraticNumber(Fraction(a, den), Fraction(1, den), d)
    ours = expand(x, 40).partial_quotients
    ref = list(islice(sympy.continued_fraction_iterator((a + sympy.sqrt(d)) / den), 41))
    assert list(ours) == ref


def test_decimal_literal_trust_horizon():
    lit = parse_real("0.7234567890123")
    cf = expand(lit, 40)
    exact = Fraction("0.7234567890123")
    ref = list(islice(sympy.continued_fraction_iterator(sympy.Rational(exact.numerator, exact.denominator)), 41))
    assert list(cf.partial_quotients) == ref[: cf.k_max + 1]
    assert cf.trust_horizon is not None and cf.trust_horizon <= cf.k_max
    # q at the trust horizon stays within the literal's resolution
    assert cf.q(cf.trust_horizon) ** 2 <= 2 * 10 ** 13


def test_depth_error():
    cf = expand(SQRT2, 3)
    with pytest.raises(DepthError):
        cf.q(4)


def test_precision_exhaustion_for_deep_transcendental():
    with pytest.raises(PrecisionExhausted):
        expand(E, 200, PrecisionPolicy(32, 64))


@pytest.mark.parametrize("expr", ["sqrt(2)", "golden", "e", "sqrt(1001)/7", "0.12345678901234567890123"])
def test_identities_hold(expr):
    cf = expand(parse_real(expr), 40)
    rep = verify_identities(cf)
    assert rep.ok, rep.failures()
    assert all(math.gcd(p, q) == 1 for p, q in cf.convergents)


def test_series5_k0():
    cf = expand(SQRT2, 3)
    assert series5_partial_sum(cf, 0).contains(1)


def _series_oracle(qs):
    with mpmath.workdps(120):
        return +sum(1 / max(mpmath.mpf(1), mpmath.log(q)) for q in qs)


@pytest.mark.parametrize("x, K", [(SQRT2, 10), (GOLDEN, 30)])
def test_series5_matches_direct_sum(x, K):
    cf = expand(x, K)
    ball = series5_partial_sum(cf, K)
    with mpmath.workdps(120):
        ref = _series_oracle([cf.q(k) for k in range(K + 1)])
        assert mpmath.mpf(ball.lower.numerator) / ball.lower.denominator <= ref
        assert ref <= mpmath.mpf(ball.upper.numerator) / ball.upper.denominator


def test_series5_golden_growth():
    # with q_k ~ phi^k / sqrt(5) the terms behave like 1/(k log phi)
    cf = expand(GOLDEN, 200)
    s100, s200 = float(series5_partial_sum(cf, 100)), float(series5_partial_sum(cf, 200))
    assert s200 - s100 == pytest.approx(math.log(2) / math.log((1 + 5 ** 0.5) / 2), rel=0.05)


def test_khintchine_levy_quadratics():
    assert float(khintchine_levy_stat(expand(GOLDEN, 400), 400)) == pytest.approx(
        math.log((1 + 5 ** 0.5) / 2), abs=0.01)
    assert float(khintchine_levy_stat(expand(SQRT2, 400), 400)) == pytest.approx(math.log(1 + 2 ** 0.5), abs=0.01)
    assert KHINTCHINE_LEVY == pytest.approx(1.18657, abs=1e-5)
