"""Degree-truncated multivariate power series.

A :class:`TruncSeries` is a :class:`MultiPoly` plus a truncation order.  The
degree used for truncation is counted only over the *graded* generators
(state variables and the level parameter); family parameters are ungraded
and behave as polynomial coefficients.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from .poly import MultiPoly

__all__ = ["TruncSeries", "SeriesError"]


class SeriesError(ValueError):
    """A series operation is undefined (non-invertible or non-rational constant term)."""


class TruncSeries:
    __slots__ = ("poly", "order", "graded")

    def __init__(self, poly: MultiPoly, order: int, graded: Sequence[str] | None = None):
        graded = tuple(poly.gens if graded is None else graded)
        self.graded = graded
        self.order = int(order)
        self.poly = poly.truncate(self.order, graded)

    # -- helpers ----------------------------------------------------------
    @property
    def gens(self):
        return self.poly.gens

    def _like(self, poly, order=None):
        return TruncSeries(poly, self.order if order is None else order, self.graded)

    def _coerce(self, other):
        if isinstance(other, TruncSeries):
            if other.gens != self.gens or other.graded != self.graded:
                raise ValueError("series over different generators")
            return other
        if isinstance(other, MultiPoly):
            return TruncSeries(other, self.order, self.graded)
        try:
            return TruncSeries(MultiPoly.const(self.gens, other), self.order, self.graded)
        except TypeError:
            return NotImplemented

    def constant_part(self) -> MultiPoly:
        """Part of degree 0 in the graded generators (may contain parameters)."""
        return self.poly.homogeneous(0, self.graded)

    def valuation(self) -> int:
        if self.poly.is_zero():
            return self.order + 1
        idx = [self.gens.index(g) for g in self.graded]
        return min(sum(e[i] for i in idx) for e in self.poly.terms)

    # -- ring operations --------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncSeries(self.poly + other.poly, min(self.order, other.order), self.graded)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.poly)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self.order, other.order)
        a = self.poly.truncate(order, self.graded)
        b = other.poly.truncate(order, self.graded)
        # drop products that would only be truncated afterwards
        va, vb = self.valuation(), other.valuation()
        a = a.truncate(order - vb, self.graded) if vb <= order else MultiPoly.zero(self.gens)
        b = b.truncate(order - va, self.graded) if va <= order else MultiPoly.zero(self.gens)
        return TruncSeries(a * b, order, self.graded)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self._like(MultiPoly.const(self.gens, 1))
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __eq__(self, other):
        if isinstance(other, TruncSeries):
            return (self.order == other.order and self.graded == other.graded
                    and self.poly == other.poly)
        return NotImplemented

    def __hash__(self):
        return hash((self.poly, self.order, self.graded))

    def truncate(self, order: int) -> "TruncSeries":
        return TruncSeries(self.poly, min(order, self.order), self.graded)

    def diff(self, name: str) -> "TruncSeries":
        order = self.order - 1 if name in self.graded else self.order
        return TruncSeries(self.poly.diff(name), order, self.graded)

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    # -- analytic functions -----------------------------------------------
    def _split_scalar_constant(self, what: str):
        c = self.constant_part()
        if not c.is_constant():
            raise SeriesError(f"{what}: constant term {c} depends on parameters")
        return c.constant_term(), self - c

    def inverse(self) -> "TruncSeries":
        c0, rest = self._split_scalar_constant("inverse")
        if not c0:
            raise SeriesError("inverse: zero constant term")
        u = rest * (-1 / c0)
        total = self._like(MultiPoly.const(self.gens, 1))
        term = total
        for _ in range(self.order):
            term = term * u
            if term.is_zero():
                break
            total = total + term
        return total * (1 / c0)

    def exp(self) -> "TruncSeries":
        c0, rest = self._split_scalar_constant("exp")
        if c0:
            raise SeriesError("exp: constant term must vanish for a rational series")
        total = self._like(MultiPoly.const(self.gens, 1))
        term = total
        for k in range(1, self.order + 1):
            term = term * rest * Fraction(1, k)
            if term.is_zero():
                break
            total = total + term
        return total

    def log(self) -> "TruncSeries":
        c0, rest = self._split_scalar_constant("log")
        if c0 != 1:
            raise SeriesError("log: constant term must equal 1 for a rational series")
        total = self._like(MultiPoly.zero(self.gens))
        term = self._like(MultiPoly.const(self.gens, 1))
        for k in range(1, self.order + 1):
            term = term * rest
            if term.is_zero():
                break
            total = total + term * Fraction((-1) ** (k + 1), k)
        return total

    def rpow(self, q: Fraction) -> "TruncSeries":
        """(1 + v)**q for a rational exponent q by the binomial series."""
        q = Fraction(q)
        if q.denominator == 1:
            return self ** int(q)
        c0, rest = self._split_scalar_constant("power")
        if c0 != 1:
            raise SeriesError("fractional power: constant term must equal 1")
        total = self._like(MultiPoly.const(self.gens, 1))
        term = total
        coef = Fraction(1)
        for k in range(1, self.order + 1):
            coef = coef * (q - k + 1) / k
            term = term * rest
            if term.is_zero():
                break
            total = total + term * coef
        return total

    def compose(self, mapping: Mapping[str, "TruncSeries"]) -> "TruncSeries":
        """Substitute series for graded generators.

        Substitutes must be series over this series' generators; those
        replacing graded generators need positive valuation so that the
        result is determined up to ``order``.
        """
        order = self.order
        polys = {}
        for name, s in mapping.items():
            if name in self.graded and s.valuation() < 1:
                raise SeriesError(f"substitute for {name} must have zero constant term")
            order = min(order, s.order) if name in self.graded else order
            polys[name] = s.poly
        poly = self.poly.compose(polys, self.gens, truncate=(order, self.graded))
        return TruncSeries(poly, order, self.graded)

    def __str__(self):
        return f"{self.poly} + O({self.order + 1})"

    def __repr__(self):
        return f"TruncSeries({self.poly}, order={self.order}, graded={self.graded})"

