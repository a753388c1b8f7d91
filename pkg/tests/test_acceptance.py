"""Acceptance criteria 1-8, one PASS/FAIL line each.

Run under pytest (lines are repeated in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import math
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from acceptance_log import record  # noqa: E402
from poissonkit import expr as E  # noqa: E402
from poissonkit.expr import MultiPoly, Verdict  # noqa: E402
from poissonkit.fields import VectorField, is_first_integral, is_inverse_jacobi_multiplier  # noqa: E402
from poissonkit.focus import center_conditions_check, complexify, focus_quantities  # noqa: E402
from poissonkit.level import implicit_level_function, restrict_to_level  # noqa: E402
from poissonkit.numeric import (Annulus, PiecewiseExpr, PiecewiseField, integrate,  # noqa: E402
                                invariant_curve_check, measure_preservation_check, random_bumps,
                                weak_multiplier_residual)
from poissonkit.poisson import (cross_product_field, hamiltonian_line_integral, partition_domain,  # noqa: E402
                                structure_matrix_3d, verify_poisson)

V2 = ("x1", "x2")
V3 = ("x1", "x2", "x3")
HERE = os.path.dirname(os.path.abspath(__file__))


def _same(a, b):
    return E.zero_test(E.sub(a, b)) is Verdict.TRUE


def _positive_multiple(p: MultiPoly, q: MultiPoly):
    """lambda > 0 with p = lambda*q, else None."""
    if p.is_zero() or q.is_zero():
        return None
    e, c = next(iter(q.terms.items()))
    lam = Fraction(p.terms.get(e, 0)) / Fraction(c)
    return lam if lam > 0 and p == q * lam else None


# -- criterion 1 -------------------------------------------------------------------------

def criterion_1():
    ps = ("A", "B", "C", "E", "F")
    Pt = "(-x2 + A*x1^2 + B*x1*x2 + C*x2^3 + x1^3*x3 - x1^3*x2^2 - x1^5)"
    Qt = "(x1 + F*x1^2 + E*x2^2 - x1^3*x2 - x1*x2^3 + x1*x2*x3)"
    Y = VectorField.parse([Pt, Qt, f"2*(x1*{Pt} + x2*{Qt})"], V3, ps)
    start = time.perf_counter()
    Z = restrict_to_level(Y, Y.expr("x3 - x1^2 - x2^2"))
    g1 = focus_quantities(complexify(Z), 1).quantities[0]
    elapsed = time.perf_counter() - start
    gens = g1.gens
    target = E.to_poly(E.parse("1/4*(A*B + (3 - 2*A - E)*h - h^2)", (), gens), gens)
    lam = _positive_multiple(g1, target)
    ok = lam is not None and elapsed < 10
    diff = E.to_poly(E.parse("1/4*(h - F)*(h + 2*A)", (), gens), gens)
    detail = (f"g1 = {g1}; target (1/4)[AB + (3-2A-E)h - h^2]; "
              f"{'factor ' + str(lam) if lam else 'no positive rational factor'}; {elapsed:.2f}s")
    if not ok:
        # the reduced family carries F*x1^2 in its second component, so g1 keeps F
        assert g1 - target == diff
        detail += ("; g1 - target = (1/4)(h - F)(h + 2A): the x1^2 coefficient of the reduced second "
                   "component is F, and the target follows only when it is replaced by h")
    return ok, detail


# -- criterion 2 -------------------------------------------------------------------------

def criterion_2():
    ps = ("B1", "B2", "C")
    Pt = "(-x2 - C*x1*x2 + B1*(x1^2 + x2^2)*(-x1^2 + x3))"
    Y = VectorField.parse([Pt, "x1 + B2*x1*x2*(-x1^2 + x3)", f"2*x1*{Pt}"], V3, ps)
    start = time.perf_counter()
    Z = restrict_to_level(Y, Y.expr("x3 - x1^2"))
    generic = focus_quantities(complexify(Z), 3)
    checks = {}
    for name in ("B1", "C"):
        verdict, rep = center_conditions_check(Z, {name: 0}, 3)
        checks[name] = all(rep.vanishing())
    elapsed = time.perf_counter() - start
    ok = checks["B1"] and checks["C"] and not generic.quantities[0].is_zero() and elapsed < 60
    return ok, (f"g1..g3 vanish under B1=0: {checks['B1']}, under C=0: {checks['C']}; "
                f"generic g1 = {generic.quantities[0]}; {elapsed:.2f}s")


# -- criterion 3 -------------------------------------------------------------------------

def criterion_3():
    full = ("l1", "l2", "l3", "a", "b", "c")
    Y = VectorField.parse(["x1*(l1 + c*x2 + x3)", "x2*(l2 + x1 + a*x3)", "x3*(l3 + b*x1 + x2)"], V3, full)
    # abc = -1 and l3 = l2*b - l1*a*b, solved for a and l3 (then -a*b = 1/c)
    pred = {"a": E.parse("-1/(b*c)", (), ("b", "c")), "l3": E.parse("l2*b + l1/c", (), ("l1", "l2", "b", "c"))}
    Yp = Y.subs(pred)
    sub = lambda t: E.subs(E.parse(t, V3, full), pred)
    I1 = sub("x1^(1/c)*x2^b/x3")
    I2 = sub("-x1 + c*x2 - a*c*x3 - l2*log(x1) + l1*log(x2)")
    H = sub("a*b*x1 + x2 - a*x3 + l3*log(x2) - l2*log(x3)")
    V = E.parse("x1*x2*x3", V3)
    J = structure_matrix_3d(I1, E.div(sub("c*x1*x2*x3"), I1))
    cert = verify_poisson(J, H, Yp, [I1])
    res = {
        "Y(I1)": is_first_integral(Yp, I1),
        "Y(I2)": is_first_integral(Yp, I2),
        "V multiplier": is_inverse_jacobi_multiplier(Y, V),
        **cert.checks,
    }
    ok = all(v is Verdict.TRUE for v in res.values())
    return ok, ", ".join(f"{k}={v}" for k, v in res.items())


# -- criterion 4 -------------------------------------------------------------------------

def criterion_4():
    ps = ("a", "b", "c", "d")
    Y = VectorField.parse(["-x2", "x1 + a*x1^2 + b*x1*x3", "c*x1*x2 + d*x2*x3"], V3, ps)
    Y0 = Y.subs({"d": 0})
    D0 = Y0.expr("x3 + c/2*x1^2")
    lf = implicit_level_function(D0, order=6, vars=V3)
    phi_ok = lf.exact and _same(lf.as_expr(), E.parse("h - c/2*x1^2", V3, ("c", "h")))
    H0 = Y0.expr("-12*x2^2 - x1^2*(8*a*x1 + 3*(4 + b*c*x1^2 + 4*b*x3))")
    Z = cross_product_field(H0, D0, E.const(Fraction(-1, 24)), V3, Y0.params)
    field_ok = all(_same(p, q) for p, q in zip(Z.components, Y0.components))
    D = Y.expr("c/d^2 + (-c/d^2 + c/d*x1 + x3)*exp(d*x1)")
    H = Y.expr("b*c*(-6 + d^2*x1^2*(3 + 2*d*x1)) - d^4*(x1^2*(3 + 2*a*x1) + 3*x2^2) + 6*b*d^2*(1 + d*x1)*x3")
    eta = Y.expr("-exp(-d*x1)/(6*d^4)")
    cert = verify_poisson(structure_matrix_3d(D, eta), H, Y, [D])
    ok = phi_ok and field_ok and cert.valid
    return ok, (f"phi exact for d=0: {phi_ok}; cross product with eta=-1/24 reproduces the field: {field_ok}; "
                f"d!=0 certificate {cert.summary()}")


# -- criterion 5 -------------------------------------------------------------------------

def _iso_h(x, y):
    return math.log((3 - 16 * y) / (18 + 64 * x * x - 48 * y) ** 2) / 384


def criterion_5():
    Y = VectorField.parse(["-x2 - 4/3*x1^2", "x1*(1 - 16/3*x2)"], V2)
    V = Y.expr("(3 - 16*x2)*(9 - 24*x2 + 32*x1^2)")
    eq3 = is_inverse_jacobi_multiplier(Y, V)
    part = partition_domain(V, ((-1.0, 1.0), (-1.0, 1.0)), grid=200)
    rng = np.random.default_rng(42)
    pts = []
    while len(pts) < 20:
        p = (rng.uniform(-1, 1), rng.uniform(-1, 1))
        if 3 - 16 * p[1] > 0:
            pts.append(p)
    line_err = max(abs(hamiltonian_line_integral(Y, V, (0.0, 0.0), p) - (_iso_h(*p) - _iso_h(0, 0))) for p in pts)
    tr = integrate(Y, (0.05, 0.0), 2 * math.pi)
    hs = np.array([_iso_h(x, y) for x, y in tr.x])
    flow_err = float(np.max(np.abs(hs - hs[0])))
    ok = eq3 is Verdict.TRUE and len(part.regions) == 3 and line_err <= 1e-8 and flow_err <= 1e-8
    return ok, (f"V multiplier identity: {eq3}; regions on [-1,1]^2: {len(part.regions)}; "
                f"line-integral max error over 20 points: {line_err:.2e}; H variation along orbit: {flow_err:.2e}")


# -- criterion 6 -------------------------------------------------------------------------

def criterion_6():
    lv = VectorField.parse(["x1*(l1 + c*x2 + x3)", "x2*(l2 + x1 + a*x3)", "x3*(l3 + b*x1 + x2)"], V3,
                           ("l1", "l2", "l3", "a", "b", "c"))
    # a point of the integrable family (abc = -1, l3 = l2*b - l1*a*b) whose box trajectories stay bounded
    pv = dict(l1=1.0, l2=-1.0, l3=1.0, a=-0.5, b=-2.0, c=-1.0)
    start = time.perf_counter()
    r1 = measure_preservation_check(lv, E.parse("x1*x2*x3", V3), [(1, 2)] * 3, t=1.0, samples=10_000,
                                    tol=1e-10, seed=42, params=pv)
    t1 = time.perf_counter() - start
    cnp = VectorField.parse(["-x2 + mu*x1", "x1 + mu*x2"], V2, ("mu",))
    start = time.perf_counter()
    r2 = measure_preservation_check(cnp, E.parse("x1^2 + x2^2", V2), Annulus((0.0, 0.0), 0.5, 1.5), t=1.0,
                                    samples=10_000, tol=1e-10, seed=42, params={"mu": 0.1})
    t2 = time.perf_counter() - start
    ok = r1.drift <= 1e-5 and r2.drift <= 1e-5 and t1 < 60 and t2 < 60
    return ok, (f"LV drift {r1.drift:.2e} ({t1:.2f}s); rotation-expansion field on annulus drift "
                f"{r2.drift:.2e} ({t2:.2f}s)")


# -- criterion 7 -------------------------------------------------------------------------

def _oscillator(eps):
    vs = ("x", "y")
    plus = VectorField.parse(["-1", f"2*x + {eps}*y"], vs)
    minus = VectorField.parse(["1", f"2*x + {eps}*y"], vs)
    F = PiecewiseField(E.parse("y", vs), plus, minus)
    W = PiecewiseExpr(E.parse("y", vs), E.parse(f"exp(-{eps}*x)", vs), E.parse(f"exp({eps}*x)", vs))
    return F, W


def criterion_7():
    bumps = random_bumps(10, seed=42)
    worst = {}
    for eps in ("0", "1/10"):
        F, W = _oscillator(eps)
        worst[eps] = max(abs(weak_multiplier_residual(F, W, b)) for b in bumps)
    F, _ = _oscillator("1/10")
    invariant = invariant_curve_check(F, "y")
    vs = ("x", "y")
    rot = VectorField.parse(["-y", "x"], vs)
    control = max(abs(weak_multiplier_residual(rot, PiecewiseExpr(E.parse("x", vs), 1, 2), b)) for b in bumps)
    ok = all(v <= 1e-6 for v in worst.values()) and invariant and control > 1e-4
    detail = (f"max |residual| eps=0: {worst['0']:.2e}, eps=0.1: {worst['1/10']:.2e}; "
              f"invariant_curve_check(y=0): {invariant}; negative control max {control:.2e}")
    if not ok:
        lie = [E.to_string(E.subs(c, {"y": 0})) for c in (F.plus.components[1], F.minus.components[1])]
        detail += (f"; on y=0 both sides have dy/dt = {lie[0]}, so orbits cross the line and W, which jumps "
                   "there for eps != 0, cannot satisfy the weak identity")
    return ok, detail


# -- criterion 8 -------------------------------------------------------------------------

def criterion_8():
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           os.path.join(HERE, "test_properties.py")], capture_output=True, text=True,
                          cwd=os.path.dirname(HERE))
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()[-200:]
    return proc.returncode == 0, f"property suites (>= 100 seeded instances each): {tail}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(n):
    ok, detail = CRITERIA[n - 1]()
    record(n, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k, fn in enumerate(CRITERIA, start=1):
        ok, detail = fn()
        record(k, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
