from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coprime_approx.precision import (
    E,
    GOLDEN,
    SQRT2,
    DecimalLiteral,
    Ordering,
    ParseError,
    PrecisionExhausted,
    PrecisionPolicy,
    QuadraticNumber,
    RealScalar,
    TargetProblem,
    compare_certified,
    decide,
    eval_linear_form,
    nearest_integer_distance,
    parse_real,
    real_compare,
    real_floor,
    split_pair,
)
from coprime_approx.precision.reals import MAX_BITS_ENV


@pytest.fixture(autouse=True)
def _mp_precision():
    with mpmath.workdps(150):
        yield


rationals = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6)


def mp_frac(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def ball_contains_mp(ball: RealScalar, value) -> bool:
    lo = mp_frac(ball.lower)
    hi = mp_frac(ball.upper)
    return lo <= value <= hi


# -- linear form --------------------------------------------------------------------------


def test_linear_form_trivial_height():
    prob = TargetProblem(SQRT2, parse_real("0.5"))
    assert eval_linear_form(0, 0, prob).contains(Fraction(1, 2))


def test_linear_form_golden():
    prob = TargetProblem(GOLDEN, 0)
    ball = eval_linear_form(-13, 8, prob)
    expected = abs(8 * (1 + mpmath.sqrt(5)) / 2 - 13)
    assert ball_contains_mp(ball, expected)
    assert abs(float(ball) - 0.0557280900008) < 1e-12


def test_linear_form_exact_cancellation():
    prob = TargetProblem(SQRT2, parse_real("sqrt(2)+1"))
    assert eval_linear_form(1, 1, prob).contains(0)


def test_linear_form_radius_shrinks_with_guard():
    prob = TargetProblem(E, parse_real("1/3"))
    a = eval_linear_form(-5, 2, prob, guard=32)
    b = eval_linear_form(-5, 2, prob, guard=96)
    assert b.radius <= a.radius
    assert a.overlaps(b)
    assert ball_contains_mp(b, abs(2 * mpmath.e - 5 - mpmath.mpf(1) / 3))


# -- comparisons ---------------------------------------------------------------------------


def test_compare_examples():
    one, two = RealScalar.exact(1, 10), RealScalar.exact(2, 10)
    assert compare_certified(one, two) is Ordering.LESS
    wide1 = RealScalar.exact(1, 10) + RealScalar(0, 614, 10)
    wide2 = RealScalar.exact(2, 10) + RealScalar(0, 614, 10)
    assert compare_certified(wide1, wide2) is Ordering.UNDECIDED
    three = RealScalar.exact(3, 10)
    assert compare_certified(three, three) is Ordering.UNDECIDED


@given(rationals, rationals, st.integers(0, 80))
def test_compare_antisymmetric(a, b, prec):
    x, y = RealScalar.exact(a, prec), RealScalar.exact(b, prec)
    assert compare_certified(x, y) is compare_certified(y, x).flipped()


def test_real_compare_exact_equality_of_surds():
    assert real_compare(SQRT2, parse_real("sqrt(8)/2")) is Ordering.EQUAL
    assert real_compare(SQRT2, parse_real("1.4142135623")) is Ordering.GREATER


def test_real_compare_never_claims_equal_for_transcendentals():
    assert real_compare(E, parse_real("e"), PrecisionPolicy(64, 256)) is Ordering.UNDECIDED


# -- nearest integer -------------------------------------------------------------------------


def test_nearest_integer_examples():
    n, d = nearest_integer_distance(RealScalar.exact(Fraction(23, 10), 64))
    assert n == 2 and d.contains(Fraction(3, 10))
    n, d = nearest_integer_distance(RealScalar.exact(Fraction(-1, 2), 64))
    assert n == -1 and d.contains(Fraction(1, 2))
    phi8 = GOLDEN.ball(128) * 8 - 13
    n, d = nearest_integer_distance(phi8)
    assert n == 0 and abs(float(d) - 0.0557280900008) < 1e-12


# -- ball arithmetic soundness --------------------------------------------------------------


@settings(max_examples=1000)
@given(rationals, rationals, st.integers(1, 100))
def test_ball_arithmetic_is_sound(a, b, prec):
    x, y = RealScalar.exact(a, prec), RealScalar.exact(b, prec)
    assert (x + y).contains(a + b)
    assert (x - y).contains(a - b)
    assert (x * y).contains(a * b)
    if abs(y.mid) > y.rad:
        assert (x / y).contains(a / b)
    assert abs(x).contains(abs(a))


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10**6, max_denominator=10**6), st.integers(8, 200))
def test_sqrt_log_exp_are_sound(a, prec):
    x = RealScalar.exact(a, prec)
    assert ball_contains_mp(x.sqrt(), mpmath.sqrt(mp_frac(a)))
    if x.lower > 0:
        assert ball_contains_mp(x.log(), mpmath.log(mp_frac(a)))
    else:
        with pytest.raises(ValueError):
            x.log()
    if a < 50:
        assert ball_contains_mp(x.exp(), mpmath.exp(mp_frac(a)))


surds = st.builds(
    lambda a, b, d: QuadraticNumber(Fraction(a), Fraction(b), d),
    st.fractions(-20, 20, max_denominator=50),
    st.fractions(-20, 20, max_denominator=50).filter(lambda v: v != 0),
    st.sampled_from([2, 3, 5, 6, 7, 10, 13, 17, 19, 101]),
)


@given(surds, st.integers(16, 200), st.integers(1, 200))
def test_refinement_is_monotone(x, p1, extra):
    lo, hi = x.ball(p1), x.ball(p1 + extra)
    assert hi.radius <= lo.radius
    assert lo.overlaps(hi)
    exact = mpmath.mpf(x.a.numerator) / x.a.denominator + \
        mpmath.mpf(x.b.numerator) / x.b.denominator * mpmath.sqrt(x.d)
    assert ball_contains_mp(hi, exact)


def test_floor_of_surd():
    assert real_floor(parse_real("100*sqrt(2)")) == 141
    assert real_floor(parse_real("-sqrt(2)")) == -2


# -- parsing and policy ---------------------------------------------------------------------


def test_parse_grammar():
    assert parse_real("(1+sqrt(5))/2") == GOLDEN
    assert parse_real("golden") == GOLDEN
    assert parse_real("sqrt(2)") == SQRT2
    lit = parse_real("0.7234567890123")
    assert isinstance(lit, DecimalLiteral)
    assert lit.digits == 13 and lit.as_fraction() == Fraction("0.7234567890123")
    assert lit.irrational is None
    assert abs(parse_real("e").approx() - 2.718281828459045) < 1e-15
    assert parse_real("-3/7").as_fraction() == Fraction(-3, 7)
    assert split_pair("sqrt(2),(1+2)/3") == ("sqrt(2)", "(1+2)/3")


@pytest.mark.parametrize("text", ["sqrt(", "1/2+", "foo", "sqrt(e)", "1/0", "", "e*e", "sqrt(-2)"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_real(text)


def test_decide_exhausts():
    with pytest.raises(PrecisionExhausted):
        decide(lambda bits: None, PrecisionPolicy(16, 64))
    seen = []
    assert decide(lambda bits: seen.append(bits) or (bits if bits >= 64 else None), PrecisionPolicy(16, 256)) == 64
    assert seen == [16, 32, 64]


def test_max_bits_env(monkeypatch):
    monkeypatch.setenv(MAX_BITS_ENV, "512")
    assert PrecisionPolicy().max_bits == 512
