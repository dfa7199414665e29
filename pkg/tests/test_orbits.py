import itertools
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coprime_approx.matrices import UnimodMatrix
from coprime_approx.oracle import Envelope, verify_theorem1
from coprime_approx.orbits import (
    Annulus,
    count_by_ball_filter,
    count_in_annulus,
    density_exponent_bruteforce,
    density_exponent_estimate,
    enumerate_ball,
    exhaustive_ball,
    iter_ball,
    near_matrices,
    orbit_hits,
    theorem1_via_orbit,
)
from coprime_approx.precision import SQRT2, TargetProblem, parse_real


@pytest.fixture(autouse=True)
def _mp_precision():
    with mpmath.workdps(40):
        yield


X = ("sqrt(2)", "1")
TARGET = ("0.7", "0.7")


def four_loop(T):
    r = range(-T, T + 1)
    return {(a, b, c, d) for a, b, c, d in itertools.product(r, r, r, r) if a * d - b * c == 1}


def test_ball_of_radius_one():
    mats = list(enumerate_ball(1))
    assert len(mats) == 20
    assert len(four_loop(1)) == 20


@pytest.mark.parametrize("T", [1, 2, 3, 4, 5, 6])
def test_enumeration_is_complete(T):
    mats = [g.as_tuple() for g in enumerate_ball(T)]
    assert len(mats) == len(set(mats))
    assert set(mats) == four_loop(T) == exhaustive_ball(T)
    assert UnimodMatrix.identity().as_tuple() in mats


def test_enumeration_order():
    keys = [g.sort_key() for g in enumerate_ball(8)]
    assert keys == sorted(keys)
    assert {g.as_tuple() for g in iter_ball(8)} == {g.as_tuple() for g in enumerate_ball(8)}


def test_ball_grows_quadratically():
    ratios = [sum(1 for _ in iter_ball(T)) / T**2 for T in (50, 100, 200)]
    assert abs(ratios[2] - ratios[1]) < 0.1 * ratios[2]


def _mp_point(pair):
    out = []
    for t in pair:
        v = parse_real(t)
        out.append(mpmath.sqrt(2) if v == SQRT2 else mpmath.mpf(v.as_fraction().numerator) / v.as_fraction().denominator)
    return out


def _mp_dist(g, x, y):
    a, b, c, d = g
    return max(abs(a * x[0] + b * x[1] - y[0]), abs(c * x[0] + d * x[1] - y[1]))


def test_near_matrices_superset():
    x, y = _mp_point(X), _mp_point(("0.3", "-0.45"))
    got = set(near_matrices(X, ("0.3", "-0.45"), 0.25, 40))
    truth = {g for g in four_loop(40) if _mp_dist(g, x, y) <= 0.25}
    assert truth <= got


def test_orbit_hits_identity_target():
    hits = orbit_hits(X, X, 3, 100).hits
    assert UnimodMatrix.identity() in [h.gamma for h in hits]


def test_orbit_hits_empty_below_first_norm():
    assert orbit_hits(X, ("50", "50"), 3, Fraction(1, 2)).hits == []


def test_orbit_hits_diagonal_target():
    res = orbit_hits(X, TARGET, 2000, Fraction(1, 2))
    assert len(res.hits) == 35 and res.undecided == []
    x, y = _mp_point(X), _mp_point(TARGET)
    for h in res.hits:
        assert h.gamma.det() == 1
        assert _mp_dist(h.gamma.as_tuple(), x, y) <= mpmath.mpf(h.norm) ** -0.5


def test_orbit_hits_match_brute_force():
    x, y = _mp_point(X), _mp_point(TARGET)
    got = {h.gamma.as_tuple() for h in orbit_hits(X, TARGET, 25, Fraction(1, 3)).hits}
    ref = {g for g in four_loop(25) if _mp_dist(g, x, y) <= mpmath.mpf(max(map(abs, g))) ** (-mpmath.mpf(1) / 3)}
    assert got == ref


def test_coprime_solutions_via_orbit():
    prob = TargetProblem.parse("sqrt(2)", "0.7")
    sols = theorem1_via_orbit(prob, 600)
    assert sols
    env = Envelope.theorem1(prob)
    rows = {(r.p, r.q) for r in verify_theorem1(prob, 600).rows}
    for s in sols:
        assert s.gamma.det() == 1
        for r in (s.first, s.second):
            assert math.gcd(r.p, r.q) == 1
            assert env.holds(r.p, r.q, prob)
            assert (r.p, r.q) in rows


def test_annulus_counting_matches_filters():
    x = X
    om = Annulus(Fraction(1), Fraction(2))
    rows = count_in_annulus(x, om, [1, 30, 120])
    # x itself has sup norm sqrt(2), so norm-one matrices already contribute
    assert rows[0].M == 12
    members, undecided = count_by_ball_filter(x, om, 120)
    assert rows[2].M == members and undecided == 0
    xm = _mp_point(X)
    ref = 0
    for a, b, c, d in four_loop(30):
        n = max(abs(a * xm[0] + b * xm[1]), abs(c * xm[0] + d * xm[1]))
        ref += 1 <= n <= 2
    assert rows[1].M == ref
    assert rows[1].ratio == pytest.approx(ref / 30)


def test_annulus_zero_for_small_T():
    rows = count_in_annulus(X, Annulus(Fraction(5), Fraction(6)), [1])
    assert rows[0].M == 0


def test_annulus_log_measure():
    assert Annulus(Fraction(1), Fraction(2)).log_measure() == 8.0


@pytest.mark.parametrize("fn", [
    lambda: count_in_annulus(("1", "2"), Annulus(Fraction(1), Fraction(2)), [10]),
    lambda: density_exponent_estimate(("3/7", "1"), ("1", "1"), 50),
])
def test_rational_slope_is_rejected(fn):
    with pytest.raises(ValueError):
        fn()


@settings(max_examples=6)
@given(st.integers(-2000, 2000), st.integers(-2000, 2000))
def test_density_estimate_matches_brute_force(u, v):
    y = (Fraction(u, 1000), Fraction(v, 1000))
    fast = density_exponent_estimate(X, y, 30)
    slow = density_exponent_bruteforce(X, y, 30)
    assert [r.gamma for r in fast.records if r.norm >= 6] == [r.gamma for r in slow.records if r.norm >= 6]
    if slow.mu_hat is None:
        assert fast.mu_hat is None
    else:
        assert fast.mu_hat.overlaps(slow.mu_hat)


def test_exact_hit_is_flagged():
    # (1 1; 0 1) maps (sqrt 2, 1) to (sqrt 2 + 1, 1)
    est = density_exponent_estimate(X, ("sqrt(2)+1", "1"), 20)
    assert UnimodMatrix(1, 1, 0, 1) in est.exact_hits
    assert all(r.distance.lower > 0 for r in est.records)
