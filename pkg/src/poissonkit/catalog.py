"""Registry of worked example systems with their known multipliers, first
integrals, Hamiltonians, structure matrices and parameter predicates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from . import expr as E
from .expr import Expr, Verdict
from .fields import VectorField, is_divergence_free, is_first_integral, is_inverse_jacobi_multiplier
from .focus import complexify, focus_quantities
from .level import LEVEL, restrict_to_level
from .numeric.piecewise import PiecewiseExpr, PiecewiseField
from .poisson import StructureMatrix, cross_product_field, verify_poisson

__all__ = [
    "Known", "Predicate", "CatalogEntry", "get", "names", "foliation_conditions", "foliation_label",
    "search_foliation_counterexample", "FOLIATION_PARAMS",
]

V3 = ("x1", "x2", "x3")
V2 = ("x1", "x2")


@dataclass(frozen=True)
class Predicate:
    """Parameter restriction given as explicit substitutions."""

    name: str
    subs: Mapping[str, Expr]
    description: str = ""


@dataclass(frozen=True)
class Known:
    """A stored object and how to check it.

    kind: multiplier, first-integral, planar-first-integral, poisson, level-function,
    reduced-family, cross-product, focus-g1, side-multipliers, weak-multiplier.
    """

    kind: str
    value: object
    provenance: str
    requires: tuple[str, ...] = ()
    region: str | None = None
    refs: Mapping[str, object] = field(default_factory=dict)
    note: str = ""


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    field: VectorField | PiecewiseField
    known: Mapping[str, Known]
    predicates: Mapping[str, Predicate] = field(default_factory=dict)
    disputed: Mapping[str, Known] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @property
    def vars(self):
        return tuple(self.field.vars)

    @property
    def params(self):
        return tuple(self.field.params)

    def substitutions(self, requires) -> dict[str, Expr]:
        out: dict[str, Expr] = {}
        for name in requires:
            out.update(self.predicates[name].subs)
        return out

    def field_under(self, requires=()):
        m = self.substitutions(requires)
        if not m:
            return self.field
        if isinstance(self.field, PiecewiseField):
            F = self.field
            return PiecewiseField(E.subs(F.gamma, m), F.plus.subs(m), F.minus.subs(m))
        return self.field.subs(m)

    def expr_under(self, e, requires=()):
        m = self.substitutions(requires)
        return E.subs(e, m) if m else e

    def verify(self, name: str) -> Verdict:
        item = self.known.get(name) or self.disputed.get(name)
        if item is None:
            raise KeyError(f"{self.name} has no known object {name!r}")
        return _VERIFIERS[item.kind](self, item)

    def verify_all(self) -> dict[str, Verdict]:
        return {k: self.verify(k) for k in self.known}


# -- verification dispatch -----------------------------------------------------------

def _sub_matrix(J: StructureMatrix, m):
    if not m:
        return J
    return StructureMatrix(J.vars, tuple(tuple(E.subs(x, m) for x in row) for row in J.entries))


def _v_multiplier(entry, k):
    Y = entry.field_under(k.requires)
    return is_inverse_jacobi_multiplier(Y, entry.expr_under(k.value, k.requires))


def _v_first_integral(entry, k):
    return is_first_integral(entry.field_under(k.requires), entry.expr_under(k.value, k.requires))


def _v_poisson(entry, k):
    m = entry.substitutions(k.requires)
    J = _sub_matrix(k.value, m)
    H = entry.expr_under(entry.known[k.refs["H"]].value, k.requires)
    cas = [entry.expr_under(entry.known[c].value, k.requires) for c in k.refs.get("casimirs", ())]
    cert = verify_poisson(J, H, entry.field_under(k.requires), cas)
    out = Verdict.TRUE
    for v in cert.checks.values():
        out = out & v
    return out


def _v_level_function(entry, k):
    D = entry.expr_under(entry.known[k.refs["D"]].value, k.requires)
    x3 = entry.vars[2]
    return E.zero_test(E.sub(E.subs(D, {x3: k.value}), E.param(LEVEL)))


def _reduced(entry, k):
    Y = entry.field_under(k.requires)
    D = entry.expr_under(entry.known[k.refs["D"]].value, k.requires)
    return restrict_to_level(Y, D, k.refs.get("order", 8))


def _v_reduced_family(entry, k):
    Z = _reduced(entry, k)
    if not Z.exact:
        return Verdict.INCONCLUSIVE
    gens = Z.gens
    want = [E.to_poly(entry.expr_under(c, k.requires), gens) for c in k.value]
    return Verdict.of(list(Z.polys) == want)


def _planar(entry, k) -> VectorField:
    fam = entry.known[k.refs["family"]]
    comps = tuple(entry.expr_under(c, k.requires) for c in fam.value)
    params = set().union(*(E.free_params(c) for c in comps))
    return VectorField(entry.vars[:2], tuple(sorted(params)), comps)


def _v_planar_first_integral(entry, k):
    return is_first_integral(_planar(entry, k), entry.expr_under(k.value, k.requires))


def _v_cross_product(entry, k):
    H = entry.expr_under(entry.known[k.refs["H"]].value, k.requires)
    D = entry.expr_under(entry.known[k.refs["D"]].value, k.requires)
    eta = entry.expr_under(k.value, k.requires)
    Y = entry.field_under(k.requires)
    Z = cross_product_field(H, D, eta, Y.vars, Y.params)
    out = Verdict.TRUE
    for a, b in zip(Z.components, Y.components):
        out = out & E.zero_test(E.sub(a, b))
    return out


def _v_focus(entry, k):
    Z = _reduced(entry, entry.known[k.refs["family"]])
    g = focus_quantities(complexify(Z), 1).quantities[0]
    return Verdict.of(g == E.to_poly(k.value, g.gens))


def _v_side_multipliers(entry, k):
    F = entry.field_under(k.requires)
    W: PiecewiseExpr = k.value
    m = entry.substitutions(k.requires)
    return (is_inverse_jacobi_multiplier(F.plus, E.subs(W.plus, m))
            & is_inverse_jacobi_multiplier(F.minus, E.subs(W.minus, m)))


_VERIFIERS: dict[str, Callable] = {
    "multiplier": _v_multiplier,
    "first-integral": _v_first_integral,
    "planar-first-integral": _v_planar_first_integral,
    "poisson": _v_poisson,
    "level-function": _v_level_function,
    "reduced-family": _v_reduced_family,
    "cross-product": _v_cross_product,
    "focus-g1": _v_focus,
    "side-multipliers": _v_side_multipliers,
}


# -- builders -------------------------------------------------------------------------

def _p(text, vars=V3, params=()):
    return E.parse(text, vars, params)


def _matrix(rows, vars, params):
    return StructureMatrix(tuple(vars), tuple(tuple(_p(x, vars, params) for x in r) for r in rows))


def _lotka_volterra():
    ps = ("l1", "l2", "l3", "a", "b", "c")
    Y = VectorField.parse(["x1*(l1 + c*x2 + x3)", "x2*(l2 + x1 + a*x3)", "x3*(l3 + b*x1 + x2)"], V3, ps)
    P = lambda t: _p(t, V3, ps)
    integrable = Predicate("integrable", {"a": _p("-1/(b*c)", (), ("b", "c")), "l3": _p("l2*b + l1/c", (), ("l1", "l2", "b", "c"))},
                           "abc = -1 and l3 = l2*b - l1*a*b, solved for a and l3")
    divfree = Predicate("divergence-free", {"a": E.const(-1), "b": E.const(-1), "c": E.const(-1),
                                            "l3": _p("-l1 - l2", (), ("l1", "l2"))},
                        "l1 + l2 + l3 = 0 and a = b = c = -1")
    I1 = P("x1^(1/c)*x2^b/x3")
    known = {
        "V": Known("multiplier", P("x1*x2*x3"), "closed form (Darboux)"),
        "I1": Known("first-integral", I1, "closed form", ("integrable",)),
        "I2": Known("first-integral", P("-x1 + c*x2 - a*c*x3 - l2*log(x1) + l1*log(x2)"), "closed form", ("integrable",)),
        "H": Known("first-integral", P("a*b*x1 + x2 - a*x3 + l3*log(x2) - l2*log(x3)"), "closed form", ("integrable",)),
        "eta": Known("cross-product", E.div(P("c*x1*x2*x3"), I1), "derived: eta = c*x1*x2*x3/I1", ("integrable",),
                     refs={"H": "H", "D": "I1"}),
        "J": Known("poisson", _matrix([["0", "c*x1*x2", "b*c*x1*x3"], ["-c*x1*x2", "0", "-x2*x3"],
                                       ["-b*c*x1*x3", "x2*x3", "0"]], V3, ps),
                   "closed form", ("integrable",), refs={"H": "H", "casimirs": ("I1",)}),
    }
    return CatalogEntry("lotka-volterra-3d", Y, known, {"integrable": integrable, "divergence-free": divfree},
                        notes=("domain x_i > 0; logs and real powers assume positivity",))


def _zero_hopf_1():
    ps = ("a", "b", "c", "d")
    Y = VectorField.parse(["-x2", "x1 + a*x1^2 + b*x1*x3", "c*x1*x2 + d*x2*x3"], V3, ps)
    P = lambda t, extra=(): _p(t, V3, ps + extra)
    d0 = Predicate("d=0", {"d": E.const(0)}, "d = 0 branch")
    h = (LEVEL,)
    known = {
        "D0": Known("first-integral", P("x3 + c/2*x1^2"), "closed form", ("d=0",)),
        "phi0": Known("level-function", P("h - c/2*x1^2", h), "closed form", ("d=0",), refs={"D": "D0"}),
        "Zh0": Known("reduced-family", (P("-x2"), P("x1 + a*x1^2 + b*x1*(h - c/2*x1^2)", h)), "closed form",
                     ("d=0",), refs={"D": "D0"}),
        "Hhat0": Known("planar-first-integral", P("-1/24*x1^2*(12 + 12*b*h + 8*a*x1 - 3*b*c*x1^2) - 1/2*x2^2", h),
                       "closed form", ("d=0",), refs={"family": "Zh0"}),
        "H0": Known("first-integral", P("-12*x2^2 - x1^2*(8*a*x1 + 3*(4 + b*c*x1^2 + 4*b*x3))"), "closed form",
                    ("d=0",)),
        "eta0": Known("cross-product", E.const(Fraction(-1, 24)), "closed form", ("d=0",),
                      refs={"H": "H0", "D": "D0"}),
        "J0": Known("poisson", _matrix([["0", "1/24", "0"], ["-1/24", "0", "c*x1/24"], ["0", "-c*x1/24", "0"]], V3, ps),
                    "corrected sign: the published d = 0 matrix is the negative of this one",
                    ("d=0",), refs={"H": "H0", "casimirs": ("D0",)}),
        "D": Known("first-integral", P("c/d^2 + (-c/d^2 + c/d*x1 + x3)*exp(d*x1)"), "closed form (d != 0)"),
        "phi": Known("level-function", P("(c + exp(-d*x1)*(-c + d^2*h) - c*d*x1)/d^2", h), "closed form (d != 0)",
                     refs={"D": "D"}),
        "H": Known("first-integral", P("b*c*(-6 + d^2*x1^2*(3 + 2*d*x1)) - d^4*(x1^2*(3 + 2*a*x1) + 3*x2^2)"
                                       " + 6*b*d^2*(1 + d*x1)*x3"), "closed form (d != 0)"),
        "eta": Known("cross-product", P("-exp(-d*x1)/(6*d^4)"), "closed form (d != 0)", refs={"H": "H", "D": "D"}),
        "J": Known("poisson", _matrix([["0", "1/(6*d^4)", "0"], ["-1/(6*d^4)", "0", "(c*x1 + d*x3)/(6*d^4)"],
                                       ["0", "-(c*x1 + d*x3)/(6*d^4)", "0"]], V3, ps),
                   "closed form (d != 0)", refs={"H": "H", "casimirs": ("D",)}),
    }
    return CatalogEntry("zero-hopf-example-1", Y, known, {"d=0": d0},
                        notes=("d != 0 objects assume d is nonzero; the series reduction needs d = 0 because "
                               "D has 1/d^2 coefficients",))


def _zero_hopf_2():
    ps = ("B1", "B2", "C")
    Pt = "(-x2 - C*x1*x2 + B1*(x1^2 + x2^2)*(-x1^2 + x3))"
    Y = VectorField.parse([Pt, "x1 + B2*x1*x2*(-x1^2 + x3)", f"2*x1*{Pt}"], V3, ps)
    P = lambda t: _p(t, V3, ps + (LEVEL,))
    preds = {
        "B1=0": Predicate("B1=0", {"B1": E.const(0)}, "first center stratum"),
        "C=0": Predicate("C=0", {"C": E.const(0)}, "second center stratum"),
        "B2=0": Predicate("B2=0", {"B2": E.const(0)}),
        "hamiltonian": Predicate("hamiltonian", {"C": E.const(0), "B2": _p("-2*B1", (), ("B1",))},
                                 "C = 2*B1 + B2 = 0, where div of the reduced family vanishes"),
    }
    known = {
        "D": Known("first-integral", _p("x3 - x1^2"), "closed form"),
        "Zh": Known("reduced-family", (P("-x2 - C*x1*x2 + B1*h*(x1^2 + x2^2)"), P("x1 + B2*h*x1*x2")),
                    "closed form", refs={"D": "D"}),
        "Hhat_B1": Known("planar-first-integral",
                         P("(1 + C*x1)^(2*B2^2*h^2)*(1 + B2*h*x2)^(2*C^2)*exp(-2*B2*C*h*(B2*h*x1 + C*x2))"),
                         "closed form", ("B1=0",), refs={"family": "Zh"}),
        "Hhat_C": Known("planar-first-integral",
                        P("(-B2 - B1*(2*B1^2 - 3*B1*B2 + B2^2)*h^2*x1^2 - 2*B1*B2*h*x2 + B1^2*(-2*B1 + B2)*h^2*x2^2)"
                          "*(1 + B2*h*x2)^(-2*B1/B2)"),
                        "closed form (B2 != 0)", ("C=0",), refs={"family": "Zh"}),
        "Hhat_C_B2": Known("planar-first-integral", P("(x1^2 + x2^2)*exp(-2*B1*h*x2)"), "closed form",
                           ("C=0", "B2=0"), refs={"family": "Zh"}),
    }
    return CatalogEntry("zero-hopf-example-2", Y, known, preds)


EJ3_G1 = "1/4*(A*B + 3*h - h*E - h*F - 2*A*F)"
EJ3_G1_PUBLISHED = "1/4*(A*B + (3 - 2*A - E)*h - h^2)"


def _zero_hopf_3():
    ps = ("A", "B", "C", "E", "F")
    Pt = "(-x2 + A*x1^2 + B*x1*x2 + C*x2^3 + x1^3*x3 - x1^3*x2^2 - x1^5)"
    Qt = "(x1 + F*x1^2 + E*x2^2 - x1^3*x2 - x1*x2^3 + x1*x2*x3)"
    Y = VectorField.parse([Pt, Qt, f"2*(x1*{Pt} + x2*{Qt})"], V3, ps)
    P = lambda t: _p(t, V3, ps + (LEVEL,))
    known = {
        "D": Known("first-integral", _p("x3 - x1^2 - x2^2"), "closed form"),
        "Zh": Known("reduced-family", (P("-x2 + A*x1^2 + B*x1*x2 + h*x1^3 + C*x2^3"),
                                       P("x1 + F*x1^2 + h*x1*x2 + E*x2^2")),
                    "corrected: the published reduced family shows h*x1^2 where F*x1^2 belongs",
                    refs={"D": "D"}),
        "g1": Known("focus-g1", P(EJ3_G1), "derived by the reduction and focus pipeline",
                    refs={"family": "Zh"},
                    note=f"the published value {EJ3_G1_PUBLISHED} is this polynomial with F replaced by h"),
    }
    return CatalogEntry("zero-hopf-example-3", Y, known, {"F=h": Predicate("F=h", {"F": E.param(LEVEL)})})


def _isochronous():
    Y = VectorField.parse(["-x2 - 4/3*x1^2", "x1*(1 - 16/3*x2)"], V2)
    V = _p("(3 - 16*x2)*(9 - 24*x2 + 32*x1^2)", V2)
    regions = {
        "H3": ("3 - 16*x2 > 0", "1/384*log((3 - 16*x2)/(18 + 64*x1^2 - 48*x2)^2)"),
        "H2": ("3 - 16*x2 < 0 < 9 - 24*x2 + 32*x1^2", "1/384*log((-3 + 16*x2)/(18 + 64*x1^2 - 48*x2)^2)"),
        "H1": ("9 - 24*x2 + 32*x1^2 < 0", "1/384*log((-3 + 16*x2)/(-18 - 64*x1^2 + 48*x2)^2)"),
    }
    known = {"V": Known("multiplier", V, "closed form")}
    J = StructureMatrix(V2, ((E.const(0), V), (E.neg(V), E.const(0))))
    for name, (reg, text) in regions.items():
        known[name] = Known("first-integral", _p(text, V2), "closed form, absolute value resolved per region",
                            region=reg)
        known["J" + name[1]] = Known("poisson", J, "structure matrix V*[[0, 1], [-1, 0]]", region=reg,
                                     refs={"H": name})
    return CatalogEntry("isochronous-loud", Y, known)


def _focus_not_poisson():
    Y = VectorField.parse(["-x2 + mu*x1", "x1 + mu*x2"], V2, ("mu",))
    known = {
        "V": Known("multiplier", _p("x1^2 + x2^2", V2), "closed form"),
        "H": Known("first-integral", _p("-1/2*(x1^2 + x2^2)", V2), "closed form", ("mu=0",)),
        "J": Known("poisson", _matrix([["0", "1"], ["-1", "0"]], V2, ()), "canonical", ("mu=0",), refs={"H": "H"}),
    }
    return CatalogEntry("focus-not-poisson", Y, known, {"mu=0": Predicate("mu=0", {"mu": E.const(0)})})


def _berrone_giacomini():
    Y = VectorField.parse(["1/2*(-x2 + x1*(1 - x1^2 - x2^2))", "1/2*(x1 + x2*(1 - x1^2 - x2^2))", "x3"], V3)
    known = {"V": Known("multiplier", _p("(x1^2 + x2^2)^2"), "closed form")}
    disputed = {
        "V2": Known("multiplier", _p("x3"), "published claim; fails the multiplier identity"),
        "I1": Known("first-integral", _p("x3/(x1^2 + x2^2)^2"), "published claim; not a first integral"),
    }
    return CatalogEntry("berrone-giacomini-3d", Y, known, disputed=disputed,
                        notes=("x3 is not an inverse Jacobi multiplier of this field, so the quotient is not "
                               "a first integral; kept as disputed objects",))


def _rotation():
    Y = VectorField.parse(["-x2", "x1"], V2)
    known = {
        "V": Known("multiplier", E.const(1), "trivial"),
        "H": Known("first-integral", _p("-1/2*(x1^2 + x2^2)", V2), "trivial"),
        "J": Known("poisson", _matrix([["0", "1"], ["-1", "0"]], V2, ()), "canonical", refs={"H": "H"}),
    }
    return CatalogEntry("rotation", Y, known)


FOLIATION_PARAMS = ("a0", "a1", "a2", "b0", "b1", "c0", "c1", "c2", "c3", "c4", "c5")


def _foliation_family():
    ps = FOLIATION_PARAMS
    Y = VectorField.parse([
        "-x2",
        "x1 + a0*x1^2 + a1*x1*x3 + a2*x3^2 + x2*(b0*x1 + b1*x3)",
        "c0*x1^2 + c1*x2^2 + c2*x3^2 + c3*x1*x2 + c4*x1*x3 + c5*x2*x3",
    ], V3, ps)
    cond = Predicate("conddiv0", {"b0": E.neg(E.param("c4")), "b1": _p("-2*c2", (), ("c2",)), "c5": E.const(0)},
                     "b0 + c4 = b1 + 2*c2 = c5 = 0")
    return CatalogEntry("quadratic-foliation-family", Y, {"V": Known("multiplier", E.const(1), "divergence-free case",
                                                                      ("conddiv0",))},
                        {"conddiv0": cond})


def _oscillator():
    vs = ("x", "y")
    plus = VectorField.parse(["-1", "2*x + eps*y"], vs, ("eps",))
    minus = VectorField.parse(["1", "2*x + eps*y"], vs, ("eps",))
    F = PiecewiseField(E.parse("y", vs), plus, minus)
    W = PiecewiseExpr(E.parse("y", vs), E.parse("exp(-eps*x)", vs, ("eps",)), E.parse("exp(eps*x)", vs, ("eps",)))
    known = {"W": Known("side-multipliers", W, "closed form: exp(-+eps*x) on each half plane")}
    return CatalogEntry("nonsmooth-oscillator", F, known, {"eps=0": Predicate("eps=0", {"eps": E.const(0)})},
                        notes=("y = 0 is crossed transversally (Lie derivative 2x on the line), so the weak "
                               "multiplier identity only holds where W is continuous across it (eps = 0)",))


_BUILDERS = {
    "lotka-volterra-3d": _lotka_volterra,
    "zero-hopf-example-1": _zero_hopf_1,
    "zero-hopf-example-2": _zero_hopf_2,
    "zero-hopf-example-3": _zero_hopf_3,
    "isochronous-loud": _isochronous,
    "focus-not-poisson": _focus_not_poisson,
    "berrone-giacomini-3d": _berrone_giacomini,
    "rotation": _rotation,
    "quadratic-foliation-family": _foliation_family,
    "nonsmooth-oscillator": _oscillator,
}
_CACHE: dict[str, CatalogEntry] = {}


def names() -> list[str]:
    return list(_BUILDERS)


def get(name: str) -> CatalogEntry:
    if name not in _BUILDERS:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(_BUILDERS)}")
    if name not in _CACHE:
        _CACHE[name] = _BUILDERS[name]()
    return _CACHE[name]


# -- foliation conditions --------------------------------------------------------------

def foliation_conditions(values: Mapping[str, object]) -> tuple[str, ...]:
    """Labels among A..E whose structural conditions hold at the (rational) parameter point."""
    v = {k: Fraction(values.get(k, 0)) for k in FOLIATION_PARAMS}
    unknown = set(values) - set(FOLIATION_PARAMS)
    if unknown:
        raise KeyError(f"unknown parameters {sorted(unknown)}")
    z = lambda *ks: all(v[k] == 0 for k in ks)
    a0, a1, a2, b0, b1, c0, c1, c2, c3, c4, c5 = (v[k] for k in FOLIATION_PARAMS)
    out = []
    if z("a2", "b0", "b1", "c0", "c1", "c2", "c4"):
        out.append("A")
    if z("a1", "b0", "b1", "c0", "c1", "c2", "c4"):
        out.append("B")
    if z("a0", "a1", "a2", "b1", "c2") and c1 == -c0 and b0 * c0 * c4 - c0 * c4 ** 2 - c3 * c4 * c5 + c0 * c5 ** 2 == 0:
        out.append("C")
    if z("a0", "a2", "b1", "c0", "c1", "c2", "c5"):
        out.append("D")
    if z("a0", "b0", "b1", "c0", "c1", "c2", "c4"):
        out.append("E")
    return tuple(out)


def foliation_label(values: Mapping[str, object]) -> str:
    """First matching label, or 'none'."""
    labels = foliation_conditions(values)
    return labels[0] if labels else "none"


def search_foliation_counterexample(seed: int = 42, tries: int = 500, values=(-2, -1, 0, 1, 2)):
    """Random small-integer point with conddiv0 holding, divergence zero certified, and no label A..E."""
    rng = np.random.default_rng(seed)
    entry = get("quadratic-foliation-family")
    free = ("a0", "a1", "a2", "c0", "c1", "c2", "c3", "c4")
    for _ in range(tries):
        point = {k: int(rng.choice(values)) for k in free}
        point.update({"b0": -point["c4"], "b1": -2 * point["c2"], "c5": 0})
        if foliation_conditions(point):
            continue
        Y = entry.field.subs({k: E.const(val) for k, val in point.items()})
        if is_divergence_free(Y) is Verdict.TRUE:
            return point
    return None
