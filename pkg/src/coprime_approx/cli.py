"""Command-line entry point.

Exit status: 0 on success, 2 for invalid input, 3 when a certified
decision needs more precision than the configured cap.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import acceptance
from .continued_fractions import DepthError, expand, series5_partial_sum, verify_identities
from .io import FORMATS, metadata, render
from .metrical import (
    InvalidPsi,
    PsiSpec,
    dichotomy_experiment,
    pair_intersection_mc,
    strip_measure_exact,
    strip_measure_mc,
)
from .oracle import Envelope, best_solutions, effective_exponent, envelope_solutions
from .orbits import Annulus, count_in_annulus, density_exponent_estimate, orbit_hits
from .precision import PrecisionExhausted, PrecisionPolicy, TargetProblem, parse_real, split_pair
from .precision.reals import DEFAULT_MAX_BITS, DEFAULT_START_BITS, MAX_BITS_ENV
from .transference import build_candidates, solution_stream, theorem3_scan

EXIT_OK, EXIT_INVALID, EXIT_PRECISION = 0, 2, 3


class CLIError(ValueError):
    pass


def _policy(args) -> PrecisionPolicy:
    return PrecisionPolicy(args.bits, args.max_bits)


def _precision_meta(args) -> dict:
    return {"start_bits": args.bits, "max_bits": args.max_bits}


def _problem(args) -> TargetProblem:
    return TargetProblem.parse(args.xi, args.y)


def _point(text: str):
    return tuple(parse_real(t) for t in split_pair(text))


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise CLIError(f"expected a comma-separated list of integers, got {text!r}") from None


# -- subcommands ------------------------------------------------------------------------


def cmd_cf(args):
    cf = expand(parse_real(args.xi), args.depth, _policy(args))
    rep = verify_identities(cf, _policy(args))
    rows = cf.rows()
    extra = {"terminal": cf.terminal, "truncated": cf.truncated, "trust_horizon": cf.trust_horizon,
             "identity_failures": rep.failures()}
    return rows, {"xi": args.xi, "depth": args.depth}, extra


def cmd_construct(args):
    prob = _problem(args)
    policy = _policy(args)
    cf = expand(prob, args.kmax + 1, policy)
    rows = []
    for k in range(min(args.kmax, cf.k_max - 1) + 1):
        step = build_candidates(cf, prob.y, k, policy)
        for c in step.candidates:
            if args.require_coprime and (c.degenerate or not c.coprime):
                continue
            rows.append({"k": k, "n_k": c.n_k, "n_k1": c.n_k1, "p": c.p, "q": c.q, "error": c.error,
                         "coprime": c.coprime, "degenerate": c.degenerate,
                         "bound_case": c.bound_case.value if c.bound_case else ""})
    return rows, {"xi": args.xi, "y": args.y, "kmax": args.kmax, "require_coprime": args.require_coprime}, {
        "trust_horizon": cf.trust_horizon}


def cmd_theorem3(args):
    prob = _problem(args)
    policy = _policy(args)
    cf = expand(prob, args.kmax + 1, policy)
    rows = []
    for r in theorem3_scan(cf, prob.y, args.kmax, policy):
        rows.append({"k": r.k, "q_k": cf.q(r.k), "floor_yq": r.floor_yq, "is_prime": r.is_prime,
                     "certain": r.certain, "series_partial_sum": series5_partial_sum(cf, r.k, 128),
                     "solutions": ";".join(f"{s.p}/{s.q}" for s in r.solutions)})
    return rows, {"xi": args.xi, "y": args.y, "kmax": args.kmax}, {}


def cmd_search(args):
    prob = _problem(args)
    policy = _policy(args)
    if args.psi:
        psi = PsiSpec.parse(args.psi)
        res = envelope_solutions(prob, args.Q, psi.envelope(), coprime_only=args.coprime, sign=args.sign,
                                 policy=policy)
        sols, extra = res.rows, {"undecided": [list(u) for u in res.undecided], "psi": psi.label}
    else:
        undecided: list[int] = []
        sols = best_solutions(prob, args.Q, args.coprime, args.sign, policy=policy, undecided=undecided)
        extra = {"undecided_q": undecided}
    rows = [{"q": s.q, "p": s.p, "error": s.error,
             "effective_exponent": effective_exponent(s.error, abs(s.q)), "coprime": s.coprime} for s in sols]
    return rows, {"xi": args.xi, "y": args.y, "Q": args.Q, "coprime": args.coprime, "sign": args.sign,
                  "psi": args.psi}, extra


def cmd_orbit(args):
    res = orbit_hits(_point(args.x), _point(args.y), args.T, Fraction(args.mu), _policy(args))
    rows = [h.as_row() for h in res.hits]
    return rows, {"x": args.x, "y": args.y, "T": args.T, "mu": args.mu}, {
        "undecided": [g.as_tuple() for g in res.undecided]}


def cmd_count(args):
    a, b = (Fraction(t) for t in split_pair(args.annulus))
    om = Annulus(a, b)
    rows = [r._asdict() for r in count_in_annulus(_point(args.x), om, _int_list(args.T_list), _policy(args))]
    return rows, {"x": args.x, "annulus": args.annulus, "T_list": args.T_list}, {
        "log_measure_of_annulus": om.log_measure()}


def cmd_exponent(args):
    est = density_exponent_estimate(_point(args.x), _point(args.y), args.T, _policy(args))
    rows = [{"a": r.gamma.a, "b": r.gamma.b, "c": r.gamma.c, "d": r.gamma.d, "norm": r.norm,
             "distance": r.distance, "exponent": r.exponent} for r in est.records]
    return rows, {"x": args.x, "y": args.y, "T": args.T}, {
        "mu_hat": est.mu_hat, "exact_hits": [g.as_tuple() for g in est.exact_hits]}


def cmd_measure(args):
    psi = PsiSpec.parse(args.psi)
    rows = []
    for q in _int_list(args.q):
        if args.pair is not None:
            r = pair_intersection_mc(q, args.pair, psi, args.samples, args.seed, args.coprime, args.threads)
            rows.append({"q": q, "s": args.pair, "estimate": r.estimate, "std_error": r.std_error,
                         "bound_4psipsi": r.bound_4psipsi, "coprime": r.coprime})
            continue
        exact = strip_measure_exact(q, psi)
        r = strip_measure_mc(q, psi, args.samples, args.seed, args.threads)
        ex = float(exact)
        rows.append({"q": q, "exact": exact, "exact_float": ex, "estimate": r.estimate, "std_error": r.std_error,
                     "z": (r.estimate - ex) / r.std_error if r.std_error else 0.0})
    return rows, {"q": args.q, "psi": args.psi, "samples": args.samples, "pair": args.pair}, {
        "psi_clamp": "min(psi(q), 1/2)", "rng": "numpy Philox, SeedSequence spawn per chunk"}


def cmd_dichotomy(args):
    psi = PsiSpec.parse(args.psi)
    rows = [r._asdict() for r in dichotomy_experiment(psi, args.points, args.windows, args.seed, args.threads)]
    return rows, {"psi": args.psi, "points": args.points, "windows": args.windows}, {
        "psi_clamp": "min(psi(q), 1/2)", "divergent": psi.divergent, "rng": "numpy Philox"}


def cmd_reproduce(args):
    results, doc = acceptance.reproduce(args.seed, args.quick, args.criterion, echo=print)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(doc)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {failed}" if failed else ""))
    return None


COMMANDS = {
    "cf": cmd_cf, "construct": cmd_construct, "theorem3": cmd_theorem3, "search": cmd_search,
    "orbit": cmd_orbit, "count": cmd_count, "exponent": cmd_exponent, "measure": cmd_measure,
    "dichotomy": cmd_dichotomy, "reproduce": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--emit", choices=FORMATS, default="csv", help="output format (default csv)")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--bits", type=int, default=DEFAULT_START_BITS, help="starting precision in bits")
    common.add_argument("--max-bits", type=int, default=int(os.environ.get(MAX_BITS_ENV, DEFAULT_MAX_BITS)),
                        help=f"precision cap in bits (default from ${MAX_BITS_ENV} or {DEFAULT_MAX_BITS})")
    common.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    common.add_argument("--threads", type=int, default=1, help="worker cap (1 = single-threaded)")

    p = argparse.ArgumentParser(prog="coprime-approx",
                                description="Coprime inhomogeneous approximation: constructions and experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("cf", parents=[common], help="continued fraction and convergents")
    s.add_argument("--xi", required=True)
    s.add_argument("--depth", type=int, required=True)

    for name, hlp in (("construct", "solutions from consecutive convergents"),
                      ("theorem3", "prime-floor scan along the convergents")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--xi", required=True)
        s.add_argument("--y", required=True)
        s.add_argument("--kmax", type=int, required=True)
        if name == "construct":
            s.add_argument("--require-coprime", action="store_true")

    s = sub.add_parser("search", parents=[common], help="brute-force search over all heights")
    s.add_argument("--xi", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--Q", type=int, required=True)
    s.add_argument("--coprime", action="store_true")
    s.add_argument("--psi", help="'c,alpha[,beta]': list every solution within psi instead of the best p per q")
    s.add_argument("--sign", choices=("positive", "negative", "both"), default="positive")

    s = sub.add_parser("orbit", parents=[common], help="shrinking-target hits of an SL(2,Z) orbit")
    s.add_argument("--x", required=True, help="point as 'expr,expr'")
    s.add_argument("--y", required=True)
    s.add_argument("--T", type=int, required=True)
    s.add_argument("--mu", default="1/2")

    s = sub.add_parser("count", parents=[common], help="orbit points in a sup-norm annulus")
    s.add_argument("--x", required=True)
    s.add_argument("--annulus", required=True, help="'a,b' with 0 < a < b")
    s.add_argument("--T-list", dest="T_list", required=True)

    s = sub.add_parser("exponent", parents=[common], help="density exponent estimate")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--T", type=int, required=True)

    s = sub.add_parser("measure", parents=[common], help="strip measures, exact and Monte Carlo")
    s.add_argument("--q", required=True, help="comma-separated heights")
    s.add_argument("--psi", required=True, help="'c,alpha[,beta]'")
    s.add_argument("--samples", type=int, default=10**6)
    s.add_argument("--pair", type=int, help="second height s: estimate the pairwise intersection instead")
    s.add_argument("--coprime", action="store_true", help="with --pair: restrict to coprime p")

    s = sub.add_parser("dichotomy", parents=[common], help="per-window hit fractions for random points")
    s.add_argument("--psi", required=True)
    s.add_argument("--points", type=int, default=10**4)
    s.add_argument("--windows", default="4..14", help="'j0..j1'")

    s = sub.add_parser("reproduce", parents=[common], help="run the acceptance suite")
    s.add_argument("--quick", action="store_true", help="smaller samples, roughly ten times faster")
    s.add_argument("--criterion", type=int, choices=range(1, 16), metavar="N", help="run only criterion N")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # the cap applies to every policy built during this run, then is restored
    previous = os.environ.get(MAX_BITS_ENV)
    os.environ[MAX_BITS_ENV] = str(args.max_bits)
    try:
        if args.bits < 16 or args.max_bits < args.bits:
            raise CLIError("need 16 <= --bits <= --max-bits")
        out = COMMANDS[args.command](args)
        if out is None:
            return EXIT_OK
        rows, inputs, extra = out
        meta = metadata(args.command, inputs, args.seed, _precision_meta(args), extra)
        text = render(rows, args.emit, meta)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except PrecisionExhausted as exc:
        print(f"error: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (InvalidPsi, CLIError, DepthError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    finally:
        if previous is None:
            os.environ.pop(MAX_BITS_ENV, None)
        else:
            os.environ[MAX_BITS_ENV] = previous


if __name__ == "__main__":
    sys.exit(main())
