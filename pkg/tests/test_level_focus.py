"""Level-set reduction, branch eigenvalues, complexification and focus quantities."""

from fractions import Fraction

import pytest
import sympy as sp

from oracles import X, Y as Yv, guckenheimer_holmes, lyapunov_eta2
from poissonkit import expr as E
from poissonkit.expr import MultiPoly
from poissonkit.fields import VectorField
from poissonkit.focus import (LinearPartError, center_conditions_check, complexify, focus_quantities)
from poissonkit.level import (ReductionError, branch_eigenvalues, implicit_level_function,
                              restrict_to_level)

V2 = ("x1", "x2")
V3 = ("x1", "x2", "x3")
EX1 = VectorField.parse(["-x2", "x1 + a*x1^2 + b*x1*x3", "c*x1*x2"], V3, ("a", "b", "c"))


def test_example1_level_function_exact():
    lf = implicit_level_function(EX1.expr("x3 + c/2*x1^2"), order=6, vars=V3)
    assert lf.exact
    want = E.parse("h - c/2*x1^2", V3, ("c", "h"))
    assert E.zero_test(E.sub(lf.as_expr(), want)) is E.Verdict.TRUE


def test_level_function_series_frozen():
    lf = implicit_level_function(E.parse("x3 + x3^2 + x1*x2", V3), order=4)
    assert not lf.exact
    assert str(lf.phi.poly) == ("-x1^2*x2^2 - 6*x1*x2*h^2 - 5*h^4 + 2*x1*x2*h + 2*h^3 - x1*x2 - h^2 + h")


def test_level_function_errors():
    with pytest.raises(ReductionError):
        implicit_level_function(E.parse("x1 + x3^2", V3))
    with pytest.raises(ReductionError):
        implicit_level_function(E.parse("1 + x3", V3))
    with pytest.raises(ReductionError):
        implicit_level_function(E.parse("c*x3", V3, ("c",)))


def test_example1_reduced_family_and_branch():
    Z = restrict_to_level(EX1, EX1.expr("x3 + c/2*x1^2"), order=6)
    assert Z.exact
    assert [str(p) for p in Z.polys] == ["-x2", "-(1/2)*x1^3*b*c + x1^2*a + x1*h*b + x1"]
    be = branch_eigenvalues(Z, 4)
    assert be.real_part.is_zero()
    # omega = sqrt(1 + b h)
    co = be.omega.poly.coefficients(("h",))
    b = MultiPoly.gen(be.omega.gens, "b").coefficients(("h",))[(0,)]
    assert co[(1,)] == b * Fraction(1, 2)
    assert co[(4,)] == b ** 4 * Fraction(-5, 128)


def test_restrict_rejects_non_integral_and_linear_part():
    with pytest.raises(ReductionError):
        restrict_to_level(EX1, EX1.expr("x3"))
    bad = VectorField.parse(["x2", "x1", "0"], V3)
    with pytest.raises(ReductionError):
        restrict_to_level(bad, E.parse("x3", V3))


def test_complexify_examples():
    assert complexify(VectorField.parse(["-x2", "x1"], V2)).F.is_zero()
    C = complexify(VectorField.parse(["-x2 + x1^2", "x1"], V2))
    z, w = (MultiPoly.gen(C.F.gens, v) for v in ("z", "w"))
    assert C.F == (z + w) ** 2 * Fraction(1, 4)
    with pytest.raises(LinearPartError):
        complexify(VectorField.parse(["x2", "x1"], V2))


def test_complexify_round_trip():
    Z = VectorField.parse(["-x2 + a*x1^2 - x1*x2^2", "x1 + 3*x2^2 + x1^3"], V2, ("a",))
    R, S = complexify(Z).to_real()
    gens = ("x1", "x2", "a")
    assert R == E.to_poly(Z.components[0], gens)
    assert S == E.to_poly(Z.components[1], gens)


def test_rotation_all_focus_quantities_vanish():
    rep = focus_quantities(complexify(VectorField.parse(["-x2", "x1"], V2)), 4)
    assert rep.vanishing() == [True] * 4


def _sym(expr_text):
    return sp.sympify(expr_text.replace("^", "**"))


@pytest.mark.parametrize("f, g", [
    ("x1^2", "x2^2"),
    ("x1^2 - x1*x2 + 2*x2^3", "3*x1*x2 + x1^3"),
    ("x1*x2 + x1^3", "-2*x1^2 + x2^2 - x1*x2^2"),
    ("5*x2^2 - x1^2*x2", "x1^2 + 7*x2^3"),
])
def test_g1_against_real_lyapunov_oracles(f, g):
    Z = VectorField.parse([f"-x2 + {f}", f"x1 + {g}"], V2)
    g1 = focus_quantities(complexify(Z), 1).quantities[0]
    fs, gs = _sym(f), _sym(g)
    eta2 = lyapunov_eta2(fs, gs)
    assert sp.Rational(str(g1.constant_term())) == 2 * eta2
    assert eta2 == guckenheimer_holmes(fs, gs)


def test_ej3_g1_symbolic_against_oracle():
    A, B, C, Ee, F, h = sp.symbols("A B C E F h")
    f = A * X**2 + B * X * Yv + h * X**3 + C * Yv**3
    g = F * X**2 + h * X * Yv + Ee * Yv**2
    assert sp.expand(2 * lyapunov_eta2(f, g) - sp.Rational(1, 4) * (A * B + 3 * h - h * Ee - h * F - 2 * A * F)) == 0


def test_center_conditions_ej2():
    ps = ("B1", "B2", "C")
    Pt = "(-x2 - C*x1*x2 + B1*(x1^2 + x2^2)*(-x1^2 + x3))"
    Y = VectorField.parse([Pt, "x1 + B2*x1*x2*(-x1^2 + x3)", f"2*x1*{Pt}"], V3, ps)
    Z = restrict_to_level(Y, E.parse("x3 - x1^2", V3))
    generic = focus_quantities(complexify(Z), 3)
    assert str(generic.quantities[0]) == "-(1/2)*h*B1*C"
    for cond in ({"B1": 0}, {"C": 0}):
        verdict, rep = center_conditions_check(Z, cond, 3)
        assert verdict == "consistent with center to order 3"
        assert rep.vanishing() == [True, True, True]
    verdict, _ = center_conditions_check(Z, {"B2": 0}, 1)
    assert verdict == "focus certified"
    with pytest.raises(KeyError):
        center_conditions_check(Z, {"nope": 0})


def test_real_coefficients_only():
    rep = focus_quantities(complexify(VectorField.parse(["-x2 + x1^2 + x2^3", "x1 - x1*x2"], V2)), 3)
    assert all(g.is_real() for g in rep.quantities)
