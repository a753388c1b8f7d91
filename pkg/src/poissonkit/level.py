"""Reduction of a 3D field with a first integral D to the planar family on {D = h}."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import expr as E
from .expr import MultiPoly, TruncSeries, Verdict
from .expr.taylor import series_of
from .fields import VectorField, is_first_integral

__all__ = [
    "LevelFunction", "PlanarFamily", "BranchEigenvalues", "ReductionError",
    "implicit_level_function", "restrict_to_level", "branch_eigenvalues", "DEFAULT_ORDER",
]

DEFAULT_ORDER = 8
LEVEL = "h"


class ReductionError(ValueError):
    """A precondition of the level-set reduction failed."""


@dataclass(frozen=True)
class LevelFunction:
    """x3 = phi(x1, x2; h) solving D(x1, x2, phi) = h."""

    phi: TruncSeries
    order: int
    D: E.Expr
    vars: tuple[str, str, str]
    params: tuple[str, ...]
    exact: bool

    def as_expr(self) -> E.Expr:
        return E.from_poly(self.phi.poly, params=self.params + (LEVEL,))


@dataclass(frozen=True)
class PlanarFamily:
    """Z_h components as polynomials over (x1, x2, h) + params.

    When ``exact`` the polynomials are the true restriction; otherwise they are
    truncated at total degree ``order`` in (x1, x2, h).
    """

    polys: tuple[MultiPoly, MultiPoly]
    vars: tuple[str, str]
    params: tuple[str, ...]
    order: int
    exact: bool
    level: LevelFunction | None = None

    @property
    def gens(self):
        return self.polys[0].gens

    def as_field(self) -> VectorField:
        """The family as a planar field whose parameters include the level h."""
        ps = self.params + (LEVEL,)
        comps = tuple(E.from_poly(p, params=ps) for p in self.polys)
        used = set().union(*(E.free_params(c) for c in comps))
        return VectorField(self.vars, tuple(p for p in ps if p in used or p == LEVEL), comps)

    def series(self, i: int) -> TruncSeries:
        return TruncSeries(self.polys[i], self.order, self.vars + (LEVEL,))


@dataclass(frozen=True)
class BranchEigenvalues:
    """Eigenvalues re(h) ± i·omega(h) along the singularity branch x*(h)."""

    real_part: TruncSeries
    omega: TruncSeries
    branch: tuple[TruncSeries, TruncSeries]
    order: int


def _names(vars3):
    if len(vars3) != 3:
        raise ReductionError("level reduction needs exactly three state variables")
    if LEVEL in vars3:
        raise ReductionError(f"state variable named {LEVEL!r} clashes with the level parameter")
    return tuple(vars3)


def implicit_level_function(D, order: int = DEFAULT_ORDER, vars=("x1", "x2", "x3"),
                            params=None) -> LevelFunction:
    """Series phi with D(x1, x2, phi(x1, x2, h)) = h up to total degree ``order``."""
    D = E.as_expr(D)
    x1, x2, x3 = _names(vars)
    params = tuple(sorted(E.free_params(D))) if params is None else tuple(params)
    if LEVEL in params:
        raise ReductionError(f"parameter named {LEVEL!r} clashes with the level parameter")
    src_gens = (x1, x2, x3) + params
    Ds = series_of(D, src_gens, (x1, x2, x3), order)
    if not Ds.constant_part().is_zero():
        raise ReductionError(f"D does not vanish at the origin (D(0) = {Ds.constant_part()})")
    lin = Ds.poly.homogeneous(1, (x1, x2, x3))
    a_poly = lin.coefficients((x3,)).get((1,))
    if a_poly is None or a_poly.is_zero():
        raise ReductionError("degenerate level function: d/dx3 D(0) = 0")
    if not a_poly.is_constant():
        raise ReductionError("d/dx3 D(0) depends on parameters; normalize it to a rational first")
    a = Fraction(a_poly.constant_term())
    rest = Ds.poly - MultiPoly.gen(src_gens, x3) * a

    tgt = (x1, x2, LEVEL) + params
    graded = (x1, x2, LEVEL)
    h = MultiPoly.gen(tgt, LEVEL)
    phi = MultiPoly.zero(tgt)
    for _ in range(order + 1):
        G = rest.compose({x3: phi}, tgt, truncate=(order, graded))
        new = ((h - G) / a).truncate(order, graded)
        if new == phi:
            break
        phi = new
    series = TruncSeries(phi, order, graded)
    check = Ds.poly.compose({x3: phi}, tgt, truncate=(order, graded))
    if check != h.truncate(order, graded):
        raise ReductionError("fixed-point iteration did not satisfy the defining identity")
    exact = False
    if E.is_polynomial(D):
        Dp = E.to_poly(D, src_gens)
        exact = Dp.compose({x3: phi}, tgt) == h
    return LevelFunction(series, order, D, (x1, x2, x3), params, exact)


def _linear_part_ok(Y: VectorField):
    x1, x2, x3 = Y.vars
    gens = tuple(Y.vars) + tuple(Y.params)
    want = [MultiPoly.gen(gens, x2) * -1, MultiPoly.gen(gens, x1), MultiPoly.zero(gens)]
    for i, (c, w) in enumerate(zip(Y.components, want)):
        s = series_of(c, gens, Y.vars, 1)
        if not s.constant_part().is_zero():
            raise ReductionError(f"component {i + 1} does not vanish at the origin")
        lin = s.poly.homogeneous(1, Y.vars)
        if lin != w:
            raise ReductionError(
                f"linear part of component {i + 1} is {lin}, expected {w} (normalize to (-x2, x1, 0))")


def restrict_to_level(Y: VectorField, D, order: int = DEFAULT_ORDER) -> PlanarFamily:
    """Z_h = (Y1, Y2) with x3 := phi(x1, x2; h)."""
    D = E.as_expr(D)
    x1, x2, x3 = _names(Y.vars)
    verdict = is_first_integral(Y, D)
    if verdict is not Verdict.TRUE:
        raise ReductionError(f"D is not certified as a first integral (verdict: {verdict})")
    _linear_part_ok(Y)
    params = tuple(Y.params)
    extra = E.free_params(D) - set(params)
    if extra:
        raise ReductionError(f"D uses parameters not declared by the field: {sorted(extra)}")
    lf = implicit_level_function(D, order, Y.vars, params)
    src = (x1, x2, x3) + params
    tgt = (x1, x2, LEVEL) + params
    graded = (x1, x2, LEVEL)

    all_poly = lf.exact and all(E.is_polynomial(c) for c in Y.components)
    if all_poly:
        exact_phi = lf.phi.poly
        polys = tuple(E.to_poly(c, src).compose({x3: exact_phi}, tgt) for c in Y.components)
    else:
        polys = tuple(series_of(c, src, (x1, x2, x3), order).poly.compose(
            {x3: lf.phi.poly}, tgt, truncate=(order, graded)) for c in Y.components)

    # dx3/dt along the reduced flow must match F3 on the level set
    phi = lf.phi.poly
    lhs = polys[2].truncate(order - 1, graded)
    rhs = (phi.diff(x1) * polys[0] + phi.diff(x2) * polys[1]).truncate(order - 1, graded)
    if lhs != rhs:
        raise ReductionError("reduced dynamics leave the level set (consistency check failed)")
    return PlanarFamily((polys[0], polys[1]), (x1, x2), params, order, all_poly, lf)


def branch_eigenvalues(Z: PlanarFamily, order: int | None = None) -> BranchEigenvalues:
    """Singularity branch x*(h) and eigenvalues of the Jacobian along it, as series in h."""
    order = Z.order if order is None else min(order, Z.order)
    x1, x2 = Z.vars
    gens = Z.gens
    graded = (x1, x2, LEVEL)
    P, Q = (p.truncate(order, graded) for p in Z.polys)
    lin = [p.homogeneous(1, (x1, x2)).subs({LEVEL: 0}) for p in (P, Q)]
    lin0 = [p.homogeneous(0, (LEVEL,)) for p in lin]
    if lin0 != [MultiPoly.gen(gens, x2) * -1, MultiPoly.gen(gens, x1)]:
        raise ReductionError("linear part at h = 0 is not (-x2, x1)")

    hg = (LEVEL,) + tuple(g for g in gens if g not in (x1, x2, LEVEL))
    # nonlinear remainder N = Z - (-x2, x1); x* solves x1 = -N2(x*), x2 = N1(x*)
    N1 = P + MultiPoly.gen(gens, x2)
    N2 = Q - MultiPoly.gen(gens, x1)
    s1 = s2 = MultiPoly.zero(hg)
    for _ in range(order + 1):
        m = {x1: s1, x2: s2}
        n1 = N1.compose(m, hg, truncate=(order, (LEVEL,)))
        n2 = N2.compose(m, hg, truncate=(order, (LEVEL,)))
        new1, new2 = -n2, n1
        if (new1, new2) == (s1, s2):
            break
        s1, s2 = new1, new2
    m = {x1: s1, x2: s2}
    jac = [[p.diff(v).compose(m, hg, truncate=(order, (LEVEL,))) for v in (x1, x2)] for p in (P, Q)]
    ser = lambda p: TruncSeries(p, order, (LEVEL,))
    tr = ser(jac[0][0] + jac[1][1])
    dt = ser(jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0])
    half = tr * Fraction(1, 2)
    disc = dt - half * half
    c0 = disc.constant_part()
    if not c0.is_constant() or c0.constant_term() <= 0:
        raise ReductionError("non-monodromic branch: eigenvalues at h = 0 are not purely imaginary")
    c = Fraction(c0.constant_term())
    if c != 1:
        raise ReductionError("eigenvalue modulus at h = 0 is not normalized to 1")
    omega = disc.rpow(Fraction(1, 2))
    return BranchEigenvalues(half, omega, (ser(s1), ser(s2)), order)
