"""Structure matrices, cross-product construction, line integrals, sign partitions."""

import math
from fractions import Fraction

import numpy as np
import pytest

from poissonkit import expr as E
from poissonkit.expr import Verdict
from poissonkit.fields import VectorField
from poissonkit.poisson import (ClosednessError, StructureMatrix, cross_product_field, functionally_independent,
                                hamiltonian_line_integral, partition_domain, planar_structure_from_multiplier,
                                structure_matrix_3d, verify_poisson)

V2 = ("x1", "x2")
V3 = ("x1", "x2", "x3")
ISO = VectorField.parse(["-x2 - 4/3*x1^2", "x1*(1 - 16/3*x2)"], V2)
ISO_V = E.parse("(3 - 16*x2)*(9 - 24*x2 + 32*x1^2)", V2)


def iso_h(x, y):
    return math.log(abs(-3 + 16 * y) / (18 + 64 * x * x - 48 * y) ** 2) / 384


def m(rows, vars=V3, params=()):
    return StructureMatrix(vars, tuple(tuple(E.parse(x, vars, params) for x in r) for r in rows))


def same(a, b):
    return E.zero_test(E.sub(a, b)) is Verdict.TRUE


def test_structure_matrix_checks():
    J = m([["0", "x3", "-x2"], ["-x3", "0", "x1"], ["x2", "-x1", "0"]])
    assert J.antisymmetry() is Verdict.TRUE and J.jacobi() is Verdict.TRUE
    bad = m([["0", "1", "0"], ["-1", "0", "x2"], ["0", "-x2", "0"]])
    assert bad.antisymmetry() is Verdict.TRUE
    assert bad.jacobi() is Verdict.FALSE
    asym = m([["0", "1", "0"], ["1", "0", "0"], ["0", "0", "0"]])
    assert asym.antisymmetry() is Verdict.FALSE


def test_structure_matrix_orientation():
    # J grad H1 = eta (grad H2 x grad H1)
    J = structure_matrix_3d(E.parse("x3", V3), 1)
    assert [str(J[i, j]) for i in range(3) for j in range(3)] == ["0", "-1", "0", "1", "0", "0", "0", "0", "0"]
    got = J.apply_gradient(E.parse("x1", V3))
    assert [str(g) for g in got] == ["0", "1", "0"]


def test_example1_d0_cross_product_and_matrix():
    ps = ("a", "b", "c")
    Y = VectorField.parse(["-x2", "x1 + a*x1^2 + b*x1*x3", "c*x1*x2"], V3, ps)
    H = Y.expr("-12*x2^2 - x1^2*(8*a*x1 + 3*(4 + b*c*x1^2 + 4*b*x3))")
    D = Y.expr("x3 + c/2*x1^2")
    eta = E.const(Fraction(-1, 24))
    Z = cross_product_field(H, D, eta, V3, ps)
    assert all(same(a, b) for a, b in zip(Z.components, Y.components))
    J = structure_matrix_3d(D, eta)
    want = m([["0", "1/24", "0"], ["-1/24", "0", "c*x1/24"], ["0", "-c*x1/24", "0"]], V3, ("c",))
    assert all(same(J[i, j], want[i, j]) for i in range(3) for j in range(3))
    cert = verify_poisson(J, H, Y, [D])
    assert cert.valid and set(cert.summary().values()) == {"true"}


def test_example1_published_d0_matrix_has_opposite_sign():
    ps = ("a", "b", "c")
    Y = VectorField.parse(["-x2", "x1 + a*x1^2 + b*x1*x3", "c*x1*x2"], V3, ps)
    H = Y.expr("-12*x2^2 - x1^2*(8*a*x1 + 3*(4 + b*c*x1^2 + 4*b*x3))")
    flipped = m([["0", "-1/24", "0"], ["1/24", "0", "-c*x1/24"], ["0", "c*x1/24", "0"]], V3, ("c",))
    assert verify_poisson(flipped, H, Y).checks["field-match"] is Verdict.FALSE


def test_example1_d_nonzero():
    ps = ("a", "b", "c", "d")
    Y = VectorField.parse(["-x2", "x1 + a*x1^2 + b*x1*x3", "c*x1*x2 + d*x2*x3"], V3, ps)
    D = Y.expr("c/d^2 + (-c/d^2 + c/d*x1 + x3)*exp(d*x1)")
    H = Y.expr("b*c*(-6 + d^2*x1^2*(3 + 2*d*x1)) - d^4*(x1^2*(3 + 2*a*x1) + 3*x2^2) + 6*b*d^2*(1 + d*x1)*x3")
    eta = Y.expr("-exp(-d*x1)/(6*d^4)")
    Z = cross_product_field(H, D, eta, V3, ps)
    assert all(same(a, b) for a, b in zip(Z.components, Y.components))
    assert verify_poisson(structure_matrix_3d(D, eta), H, Y, [D]).valid


def test_verify_poisson_reports_failures():
    Y = VectorField.parse(["-x2", "x1", "0"], V3)
    J = m([["0", "1", "0"], ["-1", "0", "0"], ["0", "0", "0"]])
    good = verify_poisson(J, E.parse("-(x1^2 + x2^2)/2", V3), Y, [E.parse("x3", V3)])
    assert good.valid
    bad = verify_poisson(J, E.parse("x1^2", V3), Y, [E.parse("x1", V3)])
    assert not bad.valid
    assert bad.checks["field-match"] is Verdict.FALSE
    assert bad.checks["casimir-annihilation"] is Verdict.FALSE


def test_planar_structure_from_multiplier():
    J = planar_structure_from_multiplier(ISO_V)
    assert J.jacobi() is Verdict.TRUE and J.antisymmetry() is Verdict.TRUE
    with pytest.raises(ValueError):
        planar_structure_from_multiplier(E.parse("x1 - x1", V2))


def test_functional_independence():
    assert functionally_independent(E.parse("x1*x2", V3), E.parse("x3", V3), V3)
    assert not functionally_independent(E.parse("x1*x2", V3), E.parse("x1^2*x2^2 + 1", V3), V3)


def test_line_integral_rotation_sign():
    rot = VectorField.parse(["-x2", "x1"], V2)
    val = hamiltonian_line_integral(rot, 1, (0, 0), (0.3, -0.4))
    assert val == pytest.approx(-(0.3 ** 2 + 0.4 ** 2) / 2, abs=1e-12)


def test_line_integral_rejects_non_closed_form():
    with pytest.raises(ClosednessError):
        hamiltonian_line_integral(ISO, E.parse("x1", V2), (0.1, 0.1), (0.2, 0.1))


def test_line_integral_isochronous_closed_form():
    rng = np.random.default_rng(7)
    for _ in range(5):
        p = (rng.uniform(-1, 1), rng.uniform(-1, 0.18))
        val = hamiltonian_line_integral(ISO, ISO_V, (0, 0), p)
        assert val == pytest.approx(iso_h(*p) - iso_h(0, 0), abs=1e-9)


def test_line_integral_path_independence():
    p = (0.4, -0.6)
    one = hamiltonian_line_integral(ISO, ISO_V, (0, 0), p, tol=1e-10)
    two = hamiltonian_line_integral(ISO, ISO_V, (0, 0), p, tol=1e-10, path=[(0, 0), (0, -0.6), p])
    assert abs(one - two) <= 2e-10


def test_line_integral_routes_around_zero():
    rot = VectorField.parse(["-x2", "x1"], V2)
    r2 = E.parse("x1^2 + x2^2", V2)
    # H = -log r for this pair; the straight polyline would cross the origin
    val = hamiltonian_line_integral(rot, r2, (0.5, 0), (-0.5, 0.1))
    assert val == pytest.approx(-math.log(math.hypot(0.5, 0.1) / 0.5), abs=1e-8)


def test_partition_isochronous():
    P = partition_domain(ISO_V, grid=200)
    assert len(P.regions) == 3
    assert sorted(r.sign for r in P.regions) == [-1, 1, 1]
    assert sorted(f for f, _ in P.factors) == ["16*x2 - 3", "32*x1^2 - 24*x2 + 9"]
    assert P.region_of((0, 0)) != P.region_of((0, 0.25)) != P.region_of((0, 0.9))


def test_partition_isolated_zero():
    P = partition_domain(E.parse("x1^2 + x2^2", V2), grid=101)
    assert len(P.regions) == 1
    assert len(P.isolated_zeros) == 1
    assert np.hypot(*P.isolated_zeros[0]) < 1e-5
