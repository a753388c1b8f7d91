"""Sparse multivariate polynomials with exact coefficients.

Terms live in a dict mapping dense exponent tuples (one slot per generator)
to nonzero coefficients in Q or Q(i).  Parameters of a family are ordinary
generators here; only the caller decides which generators are "state" ones.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .rational import GaussRational, as_scalar

__all__ = ["MultiPoly"]

_SCALARS = (int, Fraction, GaussRational)


def _add_exps(a, b):
    return tuple(x + y for x, y in zip(a, b))


class MultiPoly:
    """Immutable sparse polynomial over named generators."""

    __slots__ = ("gens", "terms", "_hash")

    def __init__(self, gens: Sequence[str], terms: Mapping | None = None):
        self.gens = tuple(gens)
        clean = {}
        if terms:
            n = len(self.gens)
            for exps, c in terms.items():
                if len(exps) != n:
                    raise ValueError(f"exponent {exps} does not match {n} generators")
                c = as_scalar(c)
                if c:
                    clean[tuple(exps)] = c
        self.terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def _raw(cls, gens, terms):
        obj = cls.__new__(cls)
        obj.gens = gens
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, gens):
        return cls(gens)

    @classmethod
    def const(cls, gens, value):
        gens = tuple(gens)
        return cls(gens, {(0,) * len(gens): value})

    @classmethod
    def gen(cls, gens, name: str):
        gens = tuple(gens)
        exps = [0] * len(gens)
        exps[gens.index(name)] = 1
        return cls(gens, {tuple(exps): 1})

    @property
    def nvars(self) -> int:
        return len(self.gens)

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def is_real(self) -> bool:
        return all(not isinstance(c, GaussRational) for c in self.terms.values())

    def free_gens(self) -> set[str]:
        used = set()
        for exps in self.terms:
            for name, e in zip(self.gens, exps):
                if e:
                    used.add(name)
        return used

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            if other.gens != self.gens:
                raise ValueError(f"generator mismatch: {self.gens} vs {other.gens}")
            return other
        if isinstance(other, _SCALARS) and not isinstance(other, bool):
            return MultiPoly.const(self.gens, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = as_scalar(s)
            else:
                out.pop(e, None)
        return MultiPoly._raw(self.gens, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.gens, {e: -c for e, c in self.terms.items()})

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
        if isinstance(other, _SCALARS) and not isinstance(other, bool):
            other = as_scalar(other)
            if not other:
                return MultiPoly._raw(self.gens, {})
            return MultiPoly._raw(self.gens, {e: as_scalar(c * other) for e, c in self.terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _add_exps(e1, e2)
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return MultiPoly._raw(self.gens, {e: as_scalar(c) for e, c in out.items()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        """Division by a nonzero scalar only."""
        if isinstance(other, MultiPoly):
            if not other.is_constant() or other.is_zero():
                raise ZeroDivisionError("polynomial division needs a nonzero constant divisor")
            other = other.constant_term()
        if isinstance(other, _SCALARS):
            if not other:
                raise ZeroDivisionError("division by zero")
            inv = 1 / (other if isinstance(other, GaussRational) else Fraction(other))
            return self * inv
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = MultiPoly.const(self.gens, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.gens == other.gens and self.terms == other.terms
        if isinstance(other, _SCALARS) and not isinstance(other, bool):
            return self.terms == MultiPoly.const(self.gens, other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.gens, frozenset(self.terms.items())))
        return self._hash

    # -- structure --------------------------------------------------------
    def _indices(self, over: Iterable[str] | None):
        if over is None:
            return tuple(range(self.nvars))
        return tuple(self.gens.index(n) for n in over)

    def degree(self, over: Iterable[str] | None = None) -> int:
        """Total degree counted over the given generators (all by default); -1 for zero."""
        idx = self._indices(over)
        if not self.terms:
            return -1
        return max(sum(e[i] for i in idx) for e in self.terms)

    def degree_in(self, name: str) -> int:
        i = self.gens.index(name)
        return max((e[i] for e in self.terms), default=-1)

    def homogeneous(self, d: int, over: Iterable[str] | None = None) -> "MultiPoly":
        idx = self._indices(over)
        return MultiPoly._raw(self.gens, {e: c for e, c in self.terms.items()
                                          if sum(e[i] for i in idx) == d})

    def truncate(self, order: int, over: Iterable[str] | None = None) -> "MultiPoly":
        idx = self._indices(over)
        return MultiPoly._raw(self.gens, {e: c for e, c in self.terms.items()
                                          if sum(e[i] for i in idx) <= order})

    def coefficients(self, over: Sequence[str]) -> dict[tuple, "MultiPoly"]:
        """Split into {exponents over `over`: coefficient polynomial in the other gens}."""
        idx = self._indices(over)
        rest = tuple(i for i in range(self.nvars) if i not in idx)
        rest_gens = tuple(self.gens[i] for i in rest)
        out: dict[tuple, dict] = {}
        for e, c in self.terms.items():
            key = tuple(e[i] for i in idx)
            out.setdefault(key, {})[tuple(e[i] for i in rest)] = c
        return {k: MultiPoly._raw(rest_gens, v) for k, v in out.items()}

    def embed(self, gens: Sequence[str]) -> "MultiPoly":
        """Re-express over a generator list containing every generator actually used."""
        gens = tuple(gens)
        if gens == self.gens:
            return self
        pos = {n: i for i, n in enumerate(gens)}
        out = {}
        for e, c in self.terms.items():
            new = [0] * len(gens)
            for name, k in zip(self.gens, e):
                if k:
                    if name not in pos:
                        raise ValueError(f"generator {name!r} missing from target {gens}")
                    new[pos[name]] = k
            out[tuple(new)] = c
        return MultiPoly._raw(gens, out)

    def rename(self, mapping: Mapping[str, str]) -> "MultiPoly":
        return MultiPoly._raw(tuple(mapping.get(g, g) for g in self.gens), dict(self.terms))

    def diff(self, name: str) -> "MultiPoly":
        i = self.gens.index(name)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            if k:
                ne = e[:i] + (k - 1,) + e[i + 1:]
                out[ne] = as_scalar(c * k)
        return MultiPoly._raw(self.gens, out)

    def compose(self, mapping: Mapping[str, "MultiPoly"], gens: Sequence[str] | None = None,
                truncate: tuple[int, Sequence[str]] | None = None) -> "MultiPoly":
        """Substitute polynomials for generators.

        Unmapped generators are carried over unchanged; the result lives over
        ``gens`` (default: the common gens of the substitutes).  ``truncate``
        = (order, graded gens) drops high-degree terms after every product.
        """
        if gens is None:
            sample = next(iter(mapping.values()), None)
            gens = sample.gens if sample is not None else self.gens
        gens = tuple(gens)
        subs = []
        for name in self.gens:
            if name in mapping:
                subs.append(mapping[name].embed(gens))
            else:
                subs.append(MultiPoly.gen(gens, name))

        def clip(p):
            return p.truncate(truncate[0], truncate[1]) if truncate else p

        powers: list[dict[int, MultiPoly]] = [{0: MultiPoly.const(gens, 1), 1: clip(s)} for s in subs]

        def power(i, k):
            table = powers[i]
            if k not in table:
                table[k] = clip(power(i, k - 1) * table[1])
            return table[k]

        result = MultiPoly.zero(gens)
        for e, c in self.terms.items():
            term = MultiPoly.const(gens, c)
            for i, k in enumerate(e):
                if k:
                    term = clip(term * power(i, k))
            result = result + term
        return clip(result)

    def subs(self, mapping: Mapping[str, object]) -> "MultiPoly":
        """Substitute scalars or same-gens polynomials; gens are kept."""
        full = {}
        for name, val in mapping.items():
            if name not in self.gens:
                continue
            full[name] = val if isinstance(val, MultiPoly) else MultiPoly.const(self.gens, val)
        return self.compose(full, self.gens) if full else self

    def map_coeffs(self, fn) -> "MultiPoly":
        return MultiPoly(self.gens, {e: fn(c) for e, c in self.terms.items()})

    def conjugate(self) -> "MultiPoly":
        return self.map_coeffs(lambda c: c.conjugate() if isinstance(c, GaussRational) else c)

    def real_part(self) -> "MultiPoly":
        return self.map_coeffs(lambda c: c.re if isinstance(c, GaussRational) else c)

    def imag_part(self) -> "MultiPoly":
        return self.map_coeffs(lambda c: c.im if isinstance(c, GaussRational) else 0)

    def leading_term(self):
        """Lexicographic leading (exponents, coefficient)."""
        e = max(self.terms)
        return e, self.terms[e]

    def divmod(self, divisor: "MultiPoly"):
        """Lex-order division by a single polynomial: (quotient, remainder).

        With one divisor the remainder is unique, so ``remainder == 0`` decides
        divisibility (over the coefficient field).
        """
        divisor = self._coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lead_e, lead_c = divisor.leading_term()
        q = MultiPoly.zero(self.gens)
        r = MultiPoly.zero(self.gens)
        p = self
        while not p.is_zero():
            e, c = p.leading_term()
            if all(a >= b for a, b in zip(e, lead_e)):
                mono = MultiPoly._raw(self.gens, {tuple(a - b for a, b in zip(e, lead_e)): as_scalar(c / lead_c)})
                q = q + mono
                p = p - mono * divisor
            else:
                lt = MultiPoly._raw(self.gens, {e: c})
                r = r + lt
                p = p - lt
        return q, r

    def content(self) -> Fraction:
        """Positive rational gcd of the (real) coefficients."""
        from math import gcd
        nums, dens = 0, 1
        for c in self.terms.values():
            c = c if isinstance(c, Fraction) else Fraction(c)
            nums = gcd(nums, c.numerator)
            dens = dens * c.denominator // gcd(dens, c.denominator)
        return Fraction(nums, dens) if nums else Fraction(0)

    def evaluate(self, point: Mapping[str, complex | float]):
        """Numeric value (float or complex) at a full assignment of generators."""
        total = 0
        vals = [point[g] for g in self.gens]
        for e, c in self.terms.items():
            term = complex(c) if isinstance(c, GaussRational) else float(c)
            for v, k in zip(vals, e):
                if k:
                    term *= v ** k
            total += term
        return total

    # -- printing ---------------------------------------------------------
    def sorted_terms(self):
        """Terms by descending total degree then lexicographic exponents."""
        return sorted(self.terms.items(), key=lambda t: (-sum(t[0]), tuple(-k for k in t[0])))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(g if k == 1 else f"{g}^{k}" for g, k in zip(self.gens, e) if k)
            if isinstance(c, GaussRational):
                coef = f"({c.re} + ({c.im})*I)" if c.re else f"({c.im})*I"
                parts.append(f"{coef}*{mono}" if mono else coef)
                continue
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = str(a) if a.denominator == 1 else f"{a}"
            elif a == 1:
                body = mono
            elif a.denominator == 1:
                body = f"{a}*{mono}"
            else:
                body = f"({a})*{mono}"
            parts.append((sign, body))
        out = ""
        for i, p in enumerate(parts):
            if isinstance(p, str):
                out += (" + " if i else "") + p
                continue
            sign, body = p
            if i == 0:
                out = ("-" if sign == "-" else "") + body
            else:
                out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"MultiPoly({self.gens}, {self})"
