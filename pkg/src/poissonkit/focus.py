"""Complexification and focus quantities of planar families with linear part (-x2, x1)."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import expr as E
from .expr import I, MultiPoly
from .fields import VectorField
from .level import PlanarFamily

__all__ = [
    "ComplexSystem", "FocusReport", "LinearPartError", "complexify", "focus_quantities",
    "center_conditions_check", "planar_polys", "DEFAULT_K",
]

DEFAULT_K = 3
HALF = Fraction(1, 2)


class LinearPartError(ValueError):
    """The planar field is not of the form (-x2 + ..., x1 + ...)."""


@dataclass(frozen=True)
class ComplexSystem:
    """dz/dt = i z + F(z, w), dw/dt = -i w + conj(F) with w = conj(z)."""

    F: MultiPoly
    params: tuple[str, ...]

    @property
    def F_conj(self) -> MultiPoly:
        """z <-> w swap with conjugated coefficients."""
        return F_bar(self.F)

    def to_real(self, vars=("x1", "x2")):
        """(R, S) over vars + params recovered from z = x1 + i x2."""
        gens = tuple(vars) + self.params
        x1, x2 = (MultiPoly.gen(gens, v) for v in vars)
        G = self.F + MultiPoly.gen(self.F.gens, "z") * I
        real = G.compose({"z": x1 + x2 * I, "w": x1 - x2 * I}, gens)
        return real.real_part(), real.imag_part()


def F_bar(F: MultiPoly) -> MultiPoly:
    swapped = {(e[1], e[0]) + e[2:]: c for e, c in F.terms.items()}
    return MultiPoly(F.gens, swapped).conjugate()


@dataclass(frozen=True)
class FocusReport:
    quantities: tuple[MultiPoly, ...]
    k: int
    params: tuple[str, ...]
    note: str = ("g_j is the coefficient of (zw)^(j+1) in X(H) with H = zw + ..., "
                 "resonant coefficients h_jj (j >= 2) fixed to 0; raw values, no ideal reduction")
    extra: dict = field(default_factory=dict, compare=False)

    def vanishing(self) -> list[bool]:
        return [g.is_zero() for g in self.quantities]

    def as_exprs(self) -> list[E.Expr]:
        return [E.from_poly(g, params=self.params) for g in self.quantities]


def planar_polys(Z, vars=None):
    """(R, S, vars, params) with R, S MultiPoly over vars + params."""
    if isinstance(Z, PlanarFamily):
        gens = Z.gens
        return Z.polys[0], Z.polys[1], tuple(Z.vars), tuple(g for g in gens if g not in Z.vars)
    if isinstance(Z, VectorField):
        if Z.dim != 2:
            raise LinearPartError("focus quantities need a planar field")
        gens = tuple(Z.vars) + tuple(Z.params)
        try:
            R, S = (E.to_poly(c, gens) for c in Z.components)
        except E.NotPolynomialError as exc:
            raise LinearPartError(f"planar field must be polynomial: {exc}") from None
        return R, S, tuple(Z.vars), tuple(Z.params)
    if isinstance(Z, (tuple, list)) and len(Z) == 2 and all(isinstance(p, MultiPoly) for p in Z):
        R, S = Z
        vars = tuple(vars or R.gens[:2])
        return R, S, vars, tuple(g for g in R.gens if g not in vars)
    raise TypeError(f"cannot read a planar family from {type(Z).__name__}")


def complexify(Z, vars=None) -> ComplexSystem:
    R, S, (x1, x2), params = planar_polys(Z, vars)
    gens = R.gens
    for name, p, want in (("first", R, MultiPoly.gen(gens, x2) * -1), ("second", S, MultiPoly.gen(gens, x1))):
        if not p.homogeneous(0, (x1, x2)).is_zero():
            raise LinearPartError(f"{name} component does not vanish at the origin")
        lin = p.homogeneous(1, (x1, x2))
        if lin != want:
            raise LinearPartError(f"{name} component has linear part {lin}, expected {want}")
    cgens = ("z", "w") + params
    z, w = MultiPoly.gen(cgens, "z"), MultiPoly.gen(cgens, "w")
    sub = {x1: (z + w) * HALF, x2: (w - z) * (I * HALF)}
    Rc = R.compose(sub, cgens)
    Sc = S.compose(sub, cgens)
    F = Rc + Sc * I - z * I
    return ComplexSystem(F, params)


def _homog_parts(p: MultiPoly, over):
    parts: dict[int, MultiPoly] = {}
    idx = [p.gens.index(g) for g in over]
    buckets: dict[int, dict] = {}
    for e, c in p.terms.items():
        buckets.setdefault(sum(e[i] for i in idx), {})[e] = c
    for d, terms in buckets.items():
        parts[d] = MultiPoly._raw(p.gens, terms)
    return parts


def focus_quantities(C: ComplexSystem, k: int = DEFAULT_K) -> FocusReport:
    """g_1..g_k with X(H) = sum g_j (zw)^(j+1), H = zw + higher terms."""
    if k < 1:
        raise ValueError("k must be at least 1")
    gens = C.F.gens
    zw = ("z", "w")
    Fp = _homog_parts(C.F, zw)
    Fb = _homog_parts(C.F_conj, zw)
    if any(d < 2 for d in Fp):
        raise LinearPartError("F must contain only nonlinear terms")
    zero = MultiPoly.zero(gens)
    pgens = tuple(x for x in gens if x not in zw)
    H = {2: MultiPoly.gen(gens, "z") * MultiPoly.gen(gens, "w")}
    gs = []
    for n in range(3, 2 * k + 3):
        T = zero
        for d in range(2, n):
            m = n - d + 1
            Hd = H[d]
            if Hd.is_zero() or (m not in Fp and m not in Fb):
                continue
            T = T + Fp.get(m, zero) * Hd.diff("z") + Fb.get(m, zero) * Hd.diff("w")
        new = {}
        g = MultiPoly.zero(pgens)
        for (p, q), c in T.coefficients(zw).items():
            if p == q:
                g = c
                continue
            # i(p - q) h_pq + T_pq = 0
            factor = I * Fraction(1, p - q)
            for e, v in c.terms.items():
                new[(p, q) + e] = v * factor
        H[n] = MultiPoly(gens, new)
        if n % 2 == 0:
            gs.append(g)
    out = []
    for j, g in enumerate(gs, start=1):
        if not g.is_real():
            raise ArithmeticError(f"g_{j} has a nonzero imaginary part: {g.imag_part()}")
        out.append(g.real_part())
    return FocusReport(tuple(out), k, C.params)


def center_conditions_check(Z, conditions: Mapping[str, object], k: int = DEFAULT_K, vars=None):
    """Substitute parameter conditions, recompute g_1..g_k and return (verdict, report)."""
    R, S, vs, params = planar_polys(Z, vars)
    remaining = tuple(p for p in params if p not in conditions)
    extra = []
    subs = {}
    for name, val in conditions.items():
        if name not in params:
            raise KeyError(f"unknown parameter {name!r}")
        if isinstance(val, str):
            val = E.parse(val, (), params)
        val = E.as_expr(val)
        for p in sorted(E.free_params(val)):
            if p not in remaining and p not in extra:
                extra.append(p)
        subs[name] = val
    new_params = remaining + tuple(extra)
    gens = vs + new_params
    polys = {n: E.to_poly(v, gens) for n, v in subs.items()}
    R2 = R.compose(polys, gens)
    S2 = S.compose(polys, gens)
    report = focus_quantities(complexify((R2, S2), vs), k)
    if all(report.vanishing()):
        return f"consistent with center to order {k}", report
    return "focus certified", report
