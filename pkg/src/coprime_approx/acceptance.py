"""The acceptance suite: fifteen pinned-seed experiments with pass/fail verdicts.

Every criterion returns a :class:`CriterionResult` whose ``details`` are
deterministic for a given seed (no timings), so two runs serialize to
identical bytes.  ``quick=True`` shrinks the sample sizes.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__
from .continued_fractions import KHINTCHINE_LEVY, expand, khintchine_levy_stat, verify_identities
from .io import SCHEMA_VERSION, _plain
from .metrical import (
    PsiSpec,
    borel_cantelli_lower_bound,
    dichotomy_experiment,
    totient_inequality_failures,
    pair_intersection_mc,
    partial_sums,
    strip_measure_exact,
    strip_measure_mc,
)
from .oracle import Envelope, envelope_solutions, verify_theorem1
from .orbits import (
    Annulus,
    count_by_ball_filter,
    count_in_annulus,
    density_exponent_estimate,
    exhaustive_ball,
    iter_ball_tuples,
    theorem1_via_orbit,
)
from .precision import QuadraticNumber, TargetProblem, parse_real
from .transference import BoundViolation, build_candidates, solution_stream

DEFAULT_SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} -- {self.details.get('summary', '')}"

    def as_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed, "details": _plain(self.details)}


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))


def random_surd(rng: np.random.Generator) -> QuadraticNumber:
    """(u + v sqrt(d)) / w with d not a square."""
    while True:
        d = int(rng.integers(2, 200))
        if math.isqrt(d) ** 2 != d:
            break
    u, v, w = int(rng.integers(-50, 51)), int(rng.integers(1, 21)), int(rng.integers(1, 31))
    return QuadraticNumber(Fraction(u, w), Fraction(v, w), d)


def random_literal(rng: np.random.Generator, digits: int, int_max: int = 3, signed: bool = False):
    frac = "".join(str(int(x)) for x in rng.integers(0, 10, size=digits))
    whole = int(rng.integers(0, int_max + 1))
    sign = "-" if signed and rng.integers(0, 2) else ""
    return parse_real(f"{sign}{whole}.{frac}")


def _problems(rng: np.random.Generator, n: int, literal_digits: int = 150) -> list[TargetProblem]:
    out = []
    for i in range(n):
        xi = random_surd(rng) if i % 2 == 0 else random_literal(rng, literal_digits)
        y = random_literal(rng, 12, int_max=1, signed=True)
        out.append(TargetProblem(xi, y))
    return out


# -- criteria ------------------------------------------------------------------------------


def c01_cf_identities(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 1)
    n, K = (20, 40) if quick else (100, 40)
    failures, truncated = [], 0
    for i in range(n):
        xi = random_surd(rng) if i % 2 == 0 else random_literal(rng, 150)
        cf = expand(xi, K + 1)
        if cf.k_max < K + 1:
            truncated += 1
        rep = verify_identities(cf)
        if not rep.ok:
            failures.append({"xi": str(xi), "indices": rep.failures()})
    ok = not failures and truncated == 0
    return CriterionResult(1, "continued-fraction identities", ok, {
        "samples": n, "k_max": K, "failures": failures, "truncated": truncated,
        "summary": f"{n} expansions to k={K}, {len(failures)} failures, {truncated} truncated"})


def c02_khintchine_levy(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 2)
    n, k = (50, 30) if quick else (200, 30)
    vals = []
    for _ in range(n):
        cf = expand(random_literal(rng, 60, int_max=0), k)
        vals.append(float(khintchine_levy_stat(cf, k)))
    mean = statistics.fmean(vals)
    rel = abs(mean - KHINTCHINE_LEVY) / KHINTCHINE_LEVY
    return CriterionResult(2, "Khintchine-Levy mean", rel < 0.05, {
        "samples": n, "k": k, "mean": mean, "target": KHINTCHINE_LEVY, "relative_deviation": rel,
        "summary": f"mean log(q_{k})/{k} = {mean:.5f} vs {KHINTCHINE_LEVY:.5f} (rel. dev. {rel:.4f}, tol 0.05)"})


def c03_transference(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 3)
    n, K = (20, 30) if quick else (100, 30)
    checked, failures = 0, []
    for prob in _problems(rng, n):
        cf = expand(prob, K + 1)
        for k in range(K + 1):
            try:
                step = build_candidates(cf, prob.y, k)
            except BoundViolation as exc:
                failures.append({"problem": prob.description, "k": k, "error": str(exc)})
                continue
            for c in step.candidates:
                if c.degenerate:
                    continue
                checked += 1
                if not (c.error * abs(c.q)).upper <= 2:
                    failures.append({"problem": prob.description, "k": k, "p": c.p, "q": c.q})
    return CriterionResult(3, "transference soundness", not failures, {
        "problems": n, "k_max": K, "candidates_checked": checked, "failures": failures,
        "summary": f"{checked} candidates, {len(failures)} violations of |q|*err <= 2 or of the classified bound"})


def c04_oracle_crosscheck(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 4)
    n, Q = (5, 10**4) if quick else (20, 10**5)
    env = Envelope.power(2, 1)
    mismatches, total = [], 0
    for prob in _problems(rng, n):
        depth = 8
        cf = expand(prob, depth)
        while cf.q(cf.k_max - 1) <= Q and not (cf.truncated or cf.terminal):
            depth *= 2
            cf = expand(prob, depth)
        ks = [k for k in range(cf.k_max) if cf.q(k) <= Q]
        stream = [s for s in solution_stream(cf, prob.y, ks) if abs(s.q) <= Q]
        oracle = {(r.p, r.q) for r in envelope_solutions(prob, Q, env, coprime_only=True).rows}
        total += len(stream)
        for s in stream:
            if (s.p, s.q) not in oracle:
                mismatches.append({"problem": prob.description, "p": s.p, "q": s.q})
    return CriterionResult(4, "oracle cross-check", not mismatches, {
        "problems": n, "Q": Q, "stream_solutions": total, "mismatches": mismatches,
        "summary": f"{total} constructed coprime solutions, {len(mismatches)} missing from the oracle"})


def c05_coprime_bound(seed: int, quick: bool) -> CriterionResult:
    prob = TargetProblem.parse("sqrt(2)", "0.7")
    Qs = [10**3, 10**4, 10**5] if quick else [10**3, 10**4, 10**5, 10**6]
    counts, c = [], None
    for Q in Qs:
        r = verify_theorem1(prob, Q)
        counts.append(r.count)
        c = r.c
    mono = all(a <= b for a, b in zip(counts, counts[1:]))
    ok = mono and counts[-1] >= 5 and abs(float(c) - 3.447) < 1e-3
    return CriterionResult(5, "coprime bound c/sqrt|q|", ok, {
        "Q": Qs, "counts": counts, "c": c,
        "summary": f"c = {float(c):.6f}, counts {counts} (need >= 5 at max Q, nondecreasing)"})


def c06_orbit(seed: int, quick: bool) -> CriterionResult:
    prob = TargetProblem.parse("sqrt(2)", "0.7")
    T = 1000 if quick else 5000
    sols = theorem1_via_orbit(prob, T)
    bad = []
    for s in sols:
        g = s.gamma
        rows_ok = all(r.coprime for r in (s.first, s.second))
        det_ok = s.first.q * s.second.p - s.second.q * s.first.p == 1 and g.det() == 1
        if not (rows_ok and det_ok):
            bad.append(g.as_tuple())
    ok = len(sols) >= 1 and not bad
    return CriterionResult(6, "orbit realization", ok, {
        "T": T, "matrices": len(sols), "bad": bad,
        "first": [s.gamma.as_tuple() for s in sols[:5]],
        "summary": f"{len(sols)} matrices at T={T}, {len(bad)} with a non-primitive row or det != 1"})


def c07_strip_measure(seed: int, quick: bool) -> CriterionResult:
    psi = PsiSpec(Fraction(1, 4), 1)
    n = 10**5 if quick else 10**6
    rows, worst = [], 0.0
    for q in range(1, 31):
        exact = strip_measure_exact(q, psi)
        r = strip_measure_mc(q, psi, n, seed + q)
        z = (r.estimate - float(exact)) / r.std_error
        worst = max(worst, abs(z))
        rows.append({"q": q, "exact": exact, "estimate": r.estimate, "std_error": r.std_error, "z": z})
    return CriterionResult(7, "strip measure", worst <= 4, {
        "samples": n, "rows": rows,
        "summary": f"q=1..30, max |z| = {worst:.2f} (tol 4)"})


def c08_cassels(seed: int, quick: bool) -> CriterionResult:
    psi = PsiSpec(Fraction(1, 4), 1)
    n = 10**5 if quick else 10**6
    rng = _rng(seed, 8)
    pairs: list[tuple[int, int]] = []
    while len(pairs) < 10:
        q, s = (int(v) for v in rng.integers(1, 21, size=2))
        if q != s and (q, s) not in pairs:
            pairs.append((q, s))
    rows, ok = [], True
    for i, (q, s) in enumerate(pairs):
        free = pair_intersection_mc(q, s, psi, n, seed + 100 + i)
        cop = pair_intersection_mc(q, s, psi, n, seed + 200 + i, coprime=True)
        z = (free.estimate - free.bound_4psipsi) / free.std_error if free.std_error else 0.0
        upper = cop.estimate <= cop.bound_4psipsi + 4 * cop.std_error
        ok &= abs(z) <= 4 and upper
        rows.append({"q": q, "s": s, "bound": free.bound_4psipsi, "free": free.estimate, "z": z,
                     "coprime": cop.estimate, "coprime_below_bound": upper})
    worst = max(abs(r["z"]) for r in rows)
    return CriterionResult(8, "pairwise independence", ok, {
        "samples": n, "rows": rows,
        "summary": f"10 pairs, max |z| = {worst:.2f}; coprime version below bound in "
                   f"{sum(r['coprime_below_bound'] for r in rows)}/10"})


def c09_totient_inequality(seed: int, quick: bool) -> CriterionResult:
    psi = PsiSpec(Fraction(1, 2), 1)
    Qs = [10**2, 10**3, 10**4] if quick else [10**2, 10**3, 10**4, 10**5]
    holds = [partial_sums(psi, Q).inequality12_holds for Q in Qs]
    exceptions = totient_inequality_failures(psi, Qs[-1])
    return CriterionResult(9, "totient-sum inequality", all(holds), {
        "Q": Qs, "holds": holds, "exceptions_up_to_max_Q": exceptions,
        "summary": f"holds at {Qs}: {holds}; failing Q <= {Qs[-1]}: {exceptions or 'none'}"})


def c10_borel_cantelli(seed: int, quick: bool) -> CriterionResult:
    psi = PsiSpec(Fraction(1, 2), 1)
    r = borel_cantelli_lower_bound(psi, 10**4)
    return CriterionResult(10, "converse Borel-Cantelli ratio", r.ratio >= 0.20, {
        "Q": 10**4, "ratio": r.ratio, "exceeds_quarter_minus_tol": r.exceeds_quarter,
        "summary": f"ratio at Q=10^4 is {r.ratio:.4f} (need >= 0.20)"})


def c11_dichotomy(seed: int, quick: bool) -> CriterionResult:
    n = 1000 if quick else 10**4
    div = dichotomy_experiment(PsiSpec(1, 1), n, "4..14", seed)
    conv = dichotomy_experiment(PsiSpec(1, Fraction(3, 2)), n, "4..14", seed + 1)
    fd = [r.fraction for r in div]
    fc = [r.fraction for r in conv]
    floor_ok = min(fd) >= 0.2
    slope = float(np.polyfit([r.j for r in conv], np.log(np.maximum(fc, 1e-12)), 1)[0])
    decay_ok = fc[-1] < fc[0] / 2 and slope < 0
    return CriterionResult(11, "windowed dichotomy", floor_ok and decay_ok, {
        "points": n, "divergent": fd, "convergent": fc, "convergent_log_slope": slope,
        "summary": f"divergent min {min(fd):.3f} (need >= 0.2); convergent first {fc[0]:.4f}, "
                   f"last {fc[-1]:.4f}, log-slope {slope:.3f}"})


def c12_annulus(seed: int, quick: bool) -> CriterionResult:
    x = ("sqrt(2)", "1")
    om = Annulus(1, 2)
    Ts = (250, 500) if quick else (1000, 2000)
    rows = count_in_annulus(x, om, list(Ts))
    r1, r2 = rows[0].ratio, rows[1].ratio
    rel = abs(r2 - r1) / r1
    filt, und = count_by_ball_filter(x, om, Ts[0])
    ok = rel < 0.10 and filt == rows[0].M and und == 0 and rows[0].boundary_undecided == 0
    return CriterionResult(12, "annulus counting", ok, {
        "T": list(Ts), "M": [r.M for r in rows], "ratios": [r1, r2], "relative_change": rel,
        "ball_filter_count": filt,
        "summary": f"M/T = {r1:.4f}, {r2:.4f} (change {rel:.4f}, tol 0.10); "
                   f"ball filter {filt} vs row count {rows[0].M}"})


def c13_ball(seed: int, quick: bool) -> CriterionResult:
    Tmax = 6 if quick else 10
    bad = [T for T in range(1, Tmax + 1) if set(iter_ball_tuples(T)) != exhaustive_ball(T)]
    n1 = sum(1 for _ in iter_ball_tuples(1))
    return CriterionResult(13, "ball enumeration", not bad and n1 == 20, {
        "T_max": Tmax, "mismatched_T": bad, "count_T1": n1,
        "summary": f"set equality for T=1..{Tmax}: {'ok' if not bad else bad}; count at T=1 is {n1}"})


def random_annulus_point(rng: np.random.Generator) -> tuple[Fraction, Fraction]:
    while True:
        u, v = (Fraction(int(t), 10**9) for t in rng.integers(-2 * 10**9, 2 * 10**9 + 1, size=2))
        if 1 <= max(abs(u), abs(v)) <= 2:
            return u, v


def c14_density_exponent(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 14)
    n, T = (10, 2000) if quick else (50, 10**4)
    x = ("sqrt(2)", "1")
    vals, outside, no_tail = [], [], []
    for _ in range(n):
        y = random_annulus_point(rng)
        est = density_exponent_estimate(x, y, T)
        if est.mu_hat is None:
            no_tail.append([str(y[0]), str(y[1])])
            continue
        v = float(est.mu_hat)
        vals.append(v)
        if not 0.23 <= v <= 0.65:
            outside.append({"y": [str(y[0]), str(y[1])], "mu_hat": v})
    med = statistics.median(vals) if vals else float("nan")
    ok = bool(vals) and 0.23 <= med <= 0.65
    return CriterionResult(14, "density exponent median", ok, {
        "targets": n, "T": T, "median": med, "values": vals, "outside_band": outside,
        "no_tail_record": no_tail,
        "summary": f"median mu_hat = {med:.4f} over {len(vals)} targets (band [0.23, 0.65]); "
                   f"{len(outside)} individual values outside; {len(no_tail)} without a record "
                   f"of norm >= sqrt(T)"})


CRITERIA: dict[int, Callable[[int, bool], CriterionResult]] = {
    1: c01_cf_identities,
    2: c02_khintchine_levy,
    3: c03_transference,
    4: c04_oracle_crosscheck,
    5: c05_coprime_bound,
    6: c06_orbit,
    7: c07_strip_measure,
    8: c08_cassels,
    9: c09_totient_inequality,
    10: c10_borel_cantelli,
    11: c11_dichotomy,
    12: c12_annulus,
    13: c13_ball,
    14: c14_density_exponent,
}
DETERMINISM = 15


def run_criteria(numbers, seed: int = DEFAULT_SEED, quick: bool = False, echo=None) -> list[CriterionResult]:
    out = []
    for n in numbers:
        r = CRITERIA[n](seed, quick)
        if echo:
            echo(r.line())
        out.append(r)
    return out


def results_document(results: list[CriterionResult], seed: int, quick: bool) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "seed": seed,
        "quick": quick,
        "criteria": [r.as_dict() for r in results],
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def determinism_check(first: str, seed: int, quick: bool, numbers=None) -> CriterionResult:
    """Run the criteria a second time and compare the serialized results byte for byte."""
    numbers = list(numbers or CRITERIA)
    second = results_document(run_criteria(numbers, seed, quick), seed, quick)
    same = first == second
    return CriterionResult(DETERMINISM, "determinism", same, {
        "compared_criteria": numbers, "bytes": len(first.encode()),
        "summary": f"second run {'identical' if same else 'DIFFERS'} ({len(first.encode())} bytes)"})


def reproduce(seed: int = DEFAULT_SEED, quick: bool = False, only: int | None = None,
              echo=print) -> tuple[list[CriterionResult], str]:
    """Run the suite (or one criterion) and return results plus the result document."""
    if only is not None and only != DETERMINISM:
        results = run_criteria([only], seed, quick, echo)
        return results, results_document(results, seed, quick)
    numbers = list(CRITERIA)
    results = run_criteria(numbers, seed, quick, echo)
    doc = results_document(results, seed, quick)
    det = determinism_check(doc, seed, quick, numbers)
    if echo:
        echo(det.line())
    results = results + [det] if only is None else [det]
    return results, results_document(results, seed, quick)
