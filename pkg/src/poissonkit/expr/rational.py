"""Exact scalar fields: the rationals and the Gaussian rationals Q(i).

Rationals are plain :class:`fractions.Fraction` values; :class:`GaussRational`
adds the imaginary unit needed once a planar field is complexified.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational as _RationalABC

Rational = Fraction

__all__ = ["Rational", "GaussRational", "I", "as_scalar", "to_fraction"]


def to_fraction(value) -> Fraction:
    """Coerce an int/Fraction/decimal string to a Fraction (never a float)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, _RationalABC):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


class GaussRational:
    """Complex number ``re + i*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = to_fraction(re)
        self.im = to_fraction(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussRational(other, 0)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GaussRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GaussRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussRational(self.re * other, self.im * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GaussRational(self.re * other.re - self.im * other.im,
                             self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        num = self * other.conjugate()
        return GaussRational(num.re / norm, num.im / norm)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers in Q(i)")
        if n < 0:
            return GaussRational(1) / (self ** -n)
        result = GaussRational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugate(self) -> "GaussRational":
        return GaussRational(self.re, -self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __eq__(self, other):
        if isinstance(other, GaussRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*I"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re} {sign} {abs(self.im)}*I)"


I = GaussRational(0, 1)


def as_scalar(value):
    """Normalize a coefficient: real Gaussian values collapse to Fraction."""
    if isinstance(value, GaussRational):
        return value.re if value.im == 0 else value
    if isinstance(value, bool):
        raise TypeError("bool is not a coefficient")
    return to_fraction(value)
