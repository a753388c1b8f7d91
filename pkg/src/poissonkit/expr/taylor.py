"""Exact Taylor expansion of expression trees into truncated series."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from . import tree as T
from .poly import MultiPoly
from .series import SeriesError, TruncSeries

__all__ = ["taylor", "series_of", "TaylorError"]


class TaylorError(SeriesError):
    """The expression is singular at the center or its expansion leaves Q."""


def _exact_root(c: Fraction, q: Fraction) -> Fraction | None:
    """c**q when it is rational, else None."""
    num, den = q.numerator, q.denominator
    out = []
    for part in (c.numerator, c.denominator):
        r = round(abs(part) ** (1.0 / den))
        hit = None
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** den == abs(part):
                hit = cand
        if hit is None:
            return None
        out.append(hit)
    if c < 0:
        return None
    return Fraction(out[0], out[1]) ** num


def series_of(e: T.Expr, gens: Sequence[str], graded: Sequence[str], order: int,
              shift: Mapping[str, Fraction] | None = None) -> TruncSeries:
    """Series of ``e`` over ``gens``; graded generators are displacements from ``shift``."""
    gens = tuple(gens)
    graded = tuple(graded)
    shift = {k: Fraction(v) for k, v in (shift or {}).items()}
    memo: dict = {}

    def lift(p):
        return TruncSeries(p, order, graded)

    def const(c):
        return lift(MultiPoly.const(gens, c))

    def go(n) -> TruncSeries:
        hit = memo.get(n)
        if hit is not None:
            return hit
        if isinstance(n, T.Const):
            out = const(n.value)
        elif isinstance(n, (T.Var, T.Param)):
            if n.name not in gens:
                raise TaylorError(f"{n.name} is not a series generator")
            out = lift(MultiPoly.gen(gens, n.name)) + shift.get(n.name, 0)
        elif isinstance(n, T.Add):
            out = const(0)
            for a in n.args:
                out = out + go(a)
        elif isinstance(n, T.Mul):
            out = const(1)
            for a in n.args:
                out = out * go(a)
        elif isinstance(n, T.Div):
            try:
                out = go(n.num) * go(n.den).inverse()
            except SeriesError as exc:
                raise TaylorError(f"quotient singular at the center: {exc}") from None
        elif isinstance(n, T.Pow):
            base = go(n.base)
            try:
                out = base ** n.n
            except SeriesError as exc:
                raise TaylorError(f"negative power singular at the center: {exc}") from None
        elif isinstance(n, T.RPow):
            out = _rpow(go(n.base), n.exponent)
        elif isinstance(n, T.Exp):
            try:
                out = go(n.arg).exp()
            except SeriesError as exc:
                raise TaylorError(str(exc)) from None
        elif isinstance(n, T.Log):
            try:
                out = go(n.arg).log()
            except SeriesError as exc:
                raise TaylorError(str(exc)) from None
        else:
            raise TypeError(type(n).__name__)
        memo[n] = out
        return out

    def _rpow(base: TruncSeries, ex: T.Expr) -> TruncSeries:
        c0 = base.constant_part()
        if not c0.is_constant() or c0.constant_term() <= 0:
            raise TaylorError("real power of a base that is not a positive rational at the center")
        c = Fraction(c0.constant_term())
        if isinstance(ex, T.Const):
            q = ex.value
            scale = _exact_root(c, q)
            if scale is None:
                raise TaylorError(f"{c}^({q}) is not rational")
            return (base * (1 / c)).rpow(q) * scale
        # symbolic exponent: exp(ex*log(base)) needs log(c) = 0
        if c != 1:
            raise TaylorError("symbolic exponent on a base whose center value is not 1")
        return (go(ex) * base.log()).exp()

    return go(e)


def taylor(e: T.Expr, center: Mapping[str, object] | None = None, order: int = 2,
           vars: Sequence[str] | None = None) -> TruncSeries:
    """Taylor series of ``e`` about ``center`` up to total degree ``order``.

    The returned series is in the displacement variables (named like the
    state variables); parameters stay as ungraded polynomial coefficients.
    """
    center = {k: Fraction(v) for k, v in (center or {}).items()}
    if vars is None:
        vars = sorted(T.free_vars(e) | set(center))
    vars = tuple(vars)
    params = tuple(sorted(T.free_params(e)))
    return series_of(e, vars + params, vars, order, center)
