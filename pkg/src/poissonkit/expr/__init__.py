"""Exact symbolic kernel: rationals, polynomials, series, expression trees."""

from .normal import InconclusiveError, Verdict, is_zero, numeric_witness, zero_test
from .parser import ParseError, parse
from .poly import MultiPoly
from fractions import Fraction

from .rational import GaussRational, I, Rational, as_scalar, to_fraction
from .series import SeriesError, TruncSeries
from .taylor import TaylorError, series_of, taylor
from .tree import (Add, Const, Div, DomainError, Exp, Expr, Log, Mul, NotPolynomialError, Param,
                   Pow, RPow, Var, add, as_expr, compile_numeric, const, diff, div, evaluate, exp,
                   free_params, free_vars, from_poly, is_polynomial, log, mul, neg, param, positivity_assumptions,
                   power, rpow, sub, subs, to_poly, to_string, var, walk)

__all__ = [
    "Fraction", "InconclusiveError", "Verdict", "is_zero", "numeric_witness", "zero_test", "ParseError", "parse",
    "MultiPoly", "GaussRational", "I", "Rational", "as_scalar", "to_fraction", "SeriesError",
    "TruncSeries", "TaylorError", "series_of", "taylor", "Add", "Const", "Div", "DomainError", "Exp",
    "Expr", "Log", "Mul", "NotPolynomialError", "Param", "Pow", "RPow", "Var", "add", "as_expr",
    "compile_numeric", "const", "diff", "div", "evaluate", "exp", "free_params", "free_vars", "from_poly",
    "is_polynomial", "log", "mul", "neg", "positivity_assumptions", "power", "rpow", "sub", "subs",
    "to_poly", "to_string", "param", "var", "walk",
]
