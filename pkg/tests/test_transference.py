import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from coprime_approx.arith import primality
from coprime_approx.continued_fractions import expand
from coprime_approx.matrices import UnimodMatrix
from coprime_approx.oracle import Envelope, envelope_solutions
from coprime_approx.precision import GOLDEN, SQRT2, QuadraticNumber, TargetProblem, eval_linear_form, parse_real
from coprime_approx.transference import (
    BoundCase,
    NonPositiveDenominator,
    build_candidates,
    classify_bound,
    coprimality_condition,
    solution_stream,
    theorem3_scan,
    transport_solution,
)


@pytest.fixture(autouse=True)
def _mp_precision():
    with mpmath.workdps(60):
        yield


HALF = parse_real("1/2")


def test_sqrt2_half_step_two():
    cf = expand(SQRT2, 5)
    assert (cf.p(2), cf.q(2), cf.p(3), cf.q(3)) == (7, 5, 17, 12)
    step = build_candidates(cf, HALF, 2)
    assert step.n_choices_k == (-3, -2) and step.n_choices_k1 == (6,)
    nu_k, nu_k1 = step.nu_balls()
    assert nu_k.contains(Fraction(-5, 2)) and nu_k1.contains(6)
    pairs = {(c.p, c.q): c for c in step.candidates}
    assert set(pairs) == {(9, -6), (-8, 6)}
    expected = abs(-6 * mpmath.sqrt(2) + 9 - mpmath.mpf(1) / 2)
    for c in pairs.values():
        assert not c.coprime and not c.degenerate
        assert abs(float(c.error) - float(expected)) < 1e-15
    assert math.gcd(9, 6) == 3 and math.gcd(8, 6) == 2


def test_homogeneous_case_degenerates():
    cf = expand(GOLDEN, 12)
    step = build_candidates(cf, 0, 3)
    assert step.n_choices_k == (0,) and step.n_choices_k1 == (0,)
    assert all(c.degenerate for c in step.candidates)
    assert solution_stream(cf, 0, range(10)) == []


def test_nu_relation():
    # nu_k = (-1)^(k+1) q_k y
    cf = expand(GOLDEN, 12)
    y = Fraction(1, 3)
    for k in range(10):
        step = build_candidates(cf, parse_real("1/3"), k)
        nu_k, nu_k1 = step.nu_balls()
        assert nu_k.contains((-1) ** (k + 1) * cf.q(k) * y)
        assert nu_k1.contains((-1) ** (k + 2) * cf.q(k + 1) * y)


problems = st.builds(
    lambda d, y: (QuadraticNumber(Fraction(0), Fraction(1), d), y),
    st.sampled_from([2, 3, 5, 6, 7, 11, 13, 19, 23, 1009]),
    st.fractions(Fraction(-3), Fraction(3), max_denominator=97),
)


@settings(max_examples=40)
@given(problems, st.integers(0, 20))
def test_candidates_satisfy_bounds(problem, k):
    xi, y = problem
    cf = expand(xi, k + 2)
    step = build_candidates(cf, y, k)
    for c in step.candidates:
        if c.degenerate:
            continue
        assert c.error.upper * abs(c.q) <= 2
        assert classify_bound(step, c) is c.bound_case
        if c.bound_case is BoundCase.SAME_SIGN_21:
            assert c.error.upper < Fraction(1, cf.q(k + 1))
        else:
            assert abs(c.q) < cf.q(k + 1)


def test_coprimality_condition_examples():
    cf = expand(SQRT2, 6)
    ok, witnesses = coprimality_condition(cf, HALF, 2)
    assert not ok and witnesses == []
    five = parse_real("5")
    for k in range(5):
        assert not coprimality_condition(cf, five, k)[0]
    assert solution_stream(cf, five, range(5)) == []


def test_coprimality_condition_direct_case():
    # floor(y q_k) = 2 and floor(y q_(k+1)) = 5 for sqrt(2), y = 0.4, k = 2
    cf = expand(SQRT2, 6)
    ok, witnesses = coprimality_condition(cf, parse_real("2/5"), 2)
    assert ok and ("floor,floor", 2, 4) not in witnesses
    assert ("ceil,ceil", 2, 5) in witnesses or ("floor,ceil", 2, 5) in witnesses


def test_golden_third_stream_is_valid():
    prob = TargetProblem(GOLDEN, parse_real("1/3"))
    cf = expand(prob, 31)
    stream = solution_stream(cf, prob.y, range(30))
    assert len(stream) == 15
    for s in stream:
        assert math.gcd(s.p, s.q) == 1
        assert s.error.upper * abs(s.q) <= 2
    small = [s for s in stream if abs(s.q) <= 2000]
    oracle = envelope_solutions(prob, 2000, Envelope.power(2, 1), coprime_only=True, sign="both")
    found = {(r.p, r.q) for r in oracle.rows}
    assert small and all((s.p, s.q) in found for s in small)


def test_prime_floor_scan():
    prob = TargetProblem(SQRT2, parse_real("0.7"))
    cf = expand(prob, 40)
    rows = theorem3_scan(cf, prob.y, 30)
    for r in rows:
        assert r.floor_yq == math.floor(Fraction(7, 10) * cf.q(r.k))
        if r.is_prime or r.floor_yq == 1:
            for s in r.solutions:
                assert s.coprime and s.error.upper * abs(s.q) <= 2
        else:
            assert r.solutions == ()
    assert any(r.is_prime for r in rows)
    with pytest.raises(ValueError):
        theorem3_scan(cf, parse_real("-0.7"), 5)


def test_primality_7919():
    assert primality(7919) == (True, True)
    assert all(7919 % d for d in range(2, math.isqrt(7919) + 1))


def test_unit_floor_counts_as_coprime():
    # sqrt(2) with y = 0.6: floor(0.6 * q_1) = floor(1.2) = 1
    cf = expand(SQRT2, 10)
    rows = theorem3_scan(cf, parse_real("0.6"), 3)
    unit = [r for r in rows if r.floor_yq == 1]
    assert unit and all(not r.is_prime for r in unit)
    assert any(r.solutions for r in unit)


def _solution(prob, p, q):
    from coprime_approx.transference import SolutionRecord

    return SolutionRecord(p, q, eval_linear_form(p, q, prob), math.gcd(p, q) == 1, BoundCase.ORACLE, "test")


def test_transport_identity():
    prob = TargetProblem(SQRT2, parse_real("0.7"))
    sol = _solution(prob, -1, 1)
    new_prob, new, scale = transport_solution(sol, UnimodMatrix.identity(), prob)
    assert (new.p, new.q) == (-1, 1)
    assert scale.contains(1)
    assert new.error.overlaps(sol.error)


matrices = st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6)).filter(
    lambda t: t[0] != 0 and (1 + t[1] * t[2]) % t[0] == 0
).map(lambda t: UnimodMatrix(t[0], t[1], t[2], (1 + t[1] * t[2]) // t[0]))


@settings(max_examples=60)
@given(matrices, st.integers(-40, 40), st.integers(-40, 40))
def test_transport_round_trip(gamma, p, q):
    assume((p, q) != (0, 0))
    prob = TargetProblem(SQRT2, parse_real("1/3"))
    sol = _solution(prob, p, q)
    try:
        prob2, sol2, scale = transport_solution(sol, gamma, prob)
        prob3, sol3, _ = transport_solution(sol2, gamma.inverse(), prob2)
    except NonPositiveDenominator:
        return
    assert math.gcd(sol2.p, sol2.q) == math.gcd(p, q)
    assert (sol3.p, sol3.q) == (p, q)
    assert sol3.error.overlaps(sol.error)
