"""Lie derivatives, multipliers, diffeomorphisms and singularity classes."""

from fractions import Fraction

import pytest

from poissonkit import expr as E
from poissonkit.expr import Verdict
from poissonkit.fields import (Diffeo, NoClosedFormInverse, VectorField, classify_singularity, divergence,
                               is_divergence_free, is_first_integral, is_inverse_jacobi_multiplier,
                               lie_derivative, pullback, pushforward, transform_multiplier)

V2 = ("x1", "x2")
V3 = ("x1", "x2", "x3")
LV = VectorField.parse(["x1*(l1 + c*x2 + x3)", "x2*(l2 + x1 + a*x3)", "x3*(l3 + b*x1 + x2)"], V3,
                       ("l1", "l2", "l3", "a", "b", "c"))
ISO = VectorField.parse(["-x2 - 4/3*x1^2", "x1*(1 - 16/3*x2)"], V2)
CNP = VectorField.parse(["-x2 + mu*x1", "x1 + mu*x2"], V2, ("mu",))


def test_undeclared_symbol_rejected():
    with pytest.raises(ValueError):
        VectorField(V2, (), (E.parse("x1", V2), E.parse("a", V2, ("a",))))


def test_lie_derivative_and_divergence():
    Y = VectorField.parse(["-x2", "x1"], V2)
    assert E.zero_test(lie_derivative(Y, E.parse("x1^2 + x2^2", V2))) is Verdict.TRUE
    assert E.zero_test(E.sub(divergence(CNP), E.parse("2*mu", V2, ("mu",)))) is Verdict.TRUE


@pytest.mark.parametrize("Y, V", [
    (LV, "x1*x2*x3"),
    (ISO, "(3 - 16*x2)*(9 - 24*x2 + 32*x1^2)"),
    (CNP, "x1^2 + x2^2"),
])
def test_known_multipliers(Y, V):
    assert is_inverse_jacobi_multiplier(Y, Y.expr(V)) is Verdict.TRUE


def test_non_multiplier_and_zero_function():
    assert is_inverse_jacobi_multiplier(ISO, ISO.expr("x1")) is Verdict.FALSE
    with pytest.raises(ValueError):
        is_inverse_jacobi_multiplier(ISO, 0)


def test_divergence_free_cases():
    fam = VectorField.parse(["-x2", "x1 + a0*x1^2 + a1*x1*x3 + a2*x3^2 + x2*(b0*x1 + b1*x3)",
                             "c0*x1^2 + c1*x2^2 + c2*x3^2 + c3*x1*x2 + c4*x1*x3 + c5*x2*x3"], V3,
                            ("a0", "a1", "a2", "b0", "b1", "c0", "c1", "c2", "c3", "c4", "c5"))
    cond = fam.subs({"b0": E.neg(E.param("c4")), "b1": E.mul(-2, E.param("c2")), "c5": 0})
    assert is_divergence_free(cond) is Verdict.TRUE
    assert is_divergence_free(fam) is Verdict.FALSE
    assert is_divergence_free(LV) is Verdict.FALSE


def test_first_integral_lv_under_predicate():
    Y = LV.subs({"a": E.parse("-1/(b*c)", (), ("b", "c")), "l3": E.parse("l2*b + l1/c", (), ("l1", "l2", "b", "c"))})
    I1 = Y.expr("x1^(1/c)*x2^b/x3")
    assert is_first_integral(Y, I1) is Verdict.TRUE
    assert is_first_integral(LV, LV.expr("x1^(1/c)*x2^b/x3")) is Verdict.FALSE


def test_transform_identity_and_constant_jacobian():
    V = ISO.expr("x1^2 + 3*x2")
    ident = Diffeo.identity(V2)
    assert E.zero_test(E.sub(transform_multiplier(V, ident, 1), V)) is Verdict.TRUE
    scale = Diffeo(V2, (E.parse("2*x1", V2), E.parse("3*x2 + x1", V2)))
    assert E.zero_test(E.sub(transform_multiplier(1, scale, 1), E.const(Fraction(1, 6)))) is Verdict.TRUE


def test_triangular_inverse():
    phi = Diffeo(V2, (E.parse("x1 + x2^2", V2), E.parse("2*x2", V2)))
    inv = phi.inverse()
    back = [E.subs(t, dict(zip(V2, phi.targets))) for t in inv.targets]
    assert all(E.zero_test(E.sub(b, E.var(v))) is Verdict.TRUE for b, v in zip(back, V2))
    with pytest.raises(NoClosedFormInverse):
        Diffeo(V2, (E.parse("x1 + x2^2", V2), E.parse("x2 + x1^2", V2))).inverse()


def test_pushforward_examples():
    rot = VectorField.parse(["-x2", "x1"], V2)
    turn = Diffeo(V2, (E.parse("-x2", V2), E.parse("x1", V2)))
    out = pushforward(rot, turn)
    assert all(E.zero_test(E.sub(a, b)) is Verdict.TRUE for a, b in zip(out.components, rot.components))
    same = pushforward(ISO, Diffeo.identity(V2))
    assert all(E.zero_test(E.sub(a, b)) is Verdict.TRUE for a, b in zip(same.components, ISO.components))


def test_pushforward_graph_map_flattens_first_integral():
    # (x1, x2, D) with D a first integral sends the third component to zero
    Y = VectorField.parse(["-x2", "x1 + a*x1^2 + b*x1*x3", "c*x1*x2"], V3, ("a", "b", "c"))
    D = Y.expr("x3 + c/2*x1^2")
    out = pushforward(Y, Diffeo(V3, (E.var("x1"), E.var("x2"), D)))
    assert E.zero_test(out.components[2]) is Verdict.TRUE
    assert E.zero_test(E.sub(out.components[0], Y.expr("-x2"))) is Verdict.TRUE


def test_transform_law_on_example():
    Y = VectorField.parse(["-x2 + x1^2/2", "x1 - x1*x2"], V2)
    H = Y.expr("x1^2/2 + x2^2/2 - x1^2*x2/2")
    assert is_first_integral(Y, H) is Verdict.TRUE
    phi = Diffeo(V2, (E.parse("x1 + x2^3", V2), E.parse("x2", V2)))
    eta = E.parse("2 + x1^2", V2)
    W = transform_multiplier(1, phi, eta)
    assert is_inverse_jacobi_multiplier(pullback(Y, phi, eta), W) is Verdict.TRUE


def test_classify_singularity():
    Y = VectorField.parse(["-x2", "x1 + a*x1^2 + b*x1*x3", "c*x1*x2"], V3, ("a", "b", "c"))
    info = classify_singularity(Y, (0, 0, 0), {"a": 1.0, "b": 2.0, "c": -1.0})
    assert info.classification == "zero-hopf" and info.omega == pytest.approx(1.0)
    lin = VectorField.parse(["x1", "x2", "x3"], V3)
    assert classify_singularity(lin, (0, 0, 0)).classification == "other"
    saddle = VectorField.parse(["x1", "-x2", "0"], V3)
    assert classify_singularity(saddle, (0, 0, 0)).classification == "zero-saddle"
    with pytest.raises(ValueError):
        classify_singularity(VectorField.parse(["1", "x2", "x3"], V3), (0, 0, 0))
    assert classify_singularity(VectorField.parse(["1", "x2", "x3"], V3), (0, 0, 0), strict=False).classification == "regular"


def test_ej3_origin_is_zero_hopf():
    Pt = "(-x2 + A*x1^2 + B*x1*x2 + C*x2^3 + x1^3*x3 - x1^3*x2^2 - x1^5)"
    Qt = "(x1 + F*x1^2 + E*x2^2 - x1^3*x2 - x1*x2^3 + x1*x2*x3)"
    Y = VectorField.parse([Pt, Qt, f"2*(x1*{Pt} + x2*{Qt})"], V3, ("A", "B", "C", "E", "F"))
    pv = dict(A=0.3, B=-1.0, C=2.0, E=0.5, F=1.5)
    assert classify_singularity(Y, (0, 0, 0), pv).classification == "zero-hopf"
