"""Certified real arithmetic: balls, exact constants, and the target problem."""

from .ball import (
    Ordering,
    PrecisionExhausted,
    RealScalar,
    compare_certified,
    fmt_decimal,
    nearest_integer_distance,
)
from .parse import ParseError, parse_real, split_pair
from .problem import DEFAULT_GUARD_BITS, TargetProblem, eval_linear_form, linear_form
from .reals import (
    E,
    GOLDEN,
    SQRT2,
    DecimalLiteral,
    DerivedReal,
    ECombination,
    ExactReal,
    PrecisionPolicy,
    QuadraticNumber,
    as_quadratic,
    combine,
    decide,
    default_policy,
    mobius,
    real_abs,
    real_ceil,
    real_compare,
    real_floor,
    real_sign,
    scale,
    to_real,
)

__all__ = [
    "DEFAULT_GUARD_BITS",
    "E",
    "GOLDEN",
    "SQRT2",
    "DecimalLiteral",
    "DerivedReal",
    "ECombination",
    "ExactReal",
    "Ordering",
    "ParseError",
    "PrecisionExhausted",
    "PrecisionPolicy",
    "QuadraticNumber",
    "RealScalar",
    "TargetProblem",
    "as_quadratic",
    "combine",
    "compare_certified",
    "decide",
    "default_policy",
    "eval_linear_form",
    "fmt_decimal",
    "linear_form",
    "mobius",
    "nearest_integer_distance",
    "parse_real",
    "real_abs",
    "real_ceil",
    "real_compare",
    "real_floor",
    "real_sign",
    "scale",
    "split_pair",
    "to_real",
]
