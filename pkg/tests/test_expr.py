"""Expression trees, parser, differentiation, zero testing and Taylor expansion."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from poissonkit import expr as E
from poissonkit.expr import ParseError, Verdict

VS = ("x1", "x2", "x3")
PS = ("a", "b", "c")


def p(text):
    return E.parse(text, VS, PS)


@pytest.mark.parametrize("text, shown", [
    ("x1^2*exp(-a*x1)/(1+x2)", "x1^2*exp(-a*x1)/(x2 + 1)"),
    ("-x1 - -x2", "-x1 + x2"),
    ("2^-1", "1/2"),
    ("log(x1)*x2^(1/3)", "log(x1)*x2^(1/3)"),
    ("a-(b-c)", "a - (b - c)"),
    ("x1/(x2/x3)", "x1/(x2/x3)"),
    ("x1**2", "x1^2"),
    ("0.25*x1", "(1/4)*x1"),
    ("-1/x1", "-1/x1"),
    ("a - 3*x2/(x1+1)", "a - 3*x2/(x1 + 1)"),
    ("-x1*x2^(1/3)/x3", "-x1*x2^(1/3)/x3"),
])
def test_parse_and_print(text, shown):
    e = p(text)
    assert E.to_string(e) == shown
    assert p(E.to_string(e)) == e


def test_power_is_right_associative():
    assert p("x1^2^3") == p("x1^8")


def test_decimals_are_exact():
    assert E.evaluate(p("0.1*3"), {}) == pytest.approx(0.3)
    assert p("0.1") == E.const(Fraction(1, 10))


@pytest.mark.parametrize("bad, pos", [("x1 +* x2", 4), ("(x1", 3), ("x1 $ 2", 3), ("zz + 1", 0)])
def test_parse_errors_report_position(bad, pos):
    with pytest.raises(ParseError) as info:
        p(bad)
    assert info.value.position == pos
    assert "^" in str(info.value)


def test_var_and_param_kinds():
    e = p("a*x1 + b")
    assert E.free_vars(e) == {"x1"}
    assert E.free_params(e) == {"a", "b"}


def test_subs_and_evaluate():
    e = E.subs(p("a*x1^2 + x2"), {"a": p("b + 1"), "x2": 3})
    assert E.evaluate(e, {"x1": 2.0}, {"b": 0.5}) == pytest.approx(9.0)


def test_diff_rules():
    e = p("x1^3*exp(a*x1) + log(x2)/x1")
    d = E.diff(e, "x1")
    want = p("3*x1^2*exp(a*x1) + a*x1^3*exp(a*x1) - log(x2)/x1^2")
    assert E.zero_test(E.sub(d, want)) is Verdict.TRUE
    assert E.zero_test(E.sub(E.diff(p("x2^(1/3)"), "x2"), p("1/3*x2^(-2/3)"))) is Verdict.TRUE


@pytest.mark.parametrize("text, verdict", [
    ("exp(a+b) - exp(a)*exp(b)", Verdict.TRUE),
    ("log(x1*x2) - log(x1) - log(x2)", Verdict.TRUE),
    ("x1^(1/2)*x1^(1/2) - x1", Verdict.TRUE),
    ("(x1+1)^2 - x1^2 - 2*x1 - 1", Verdict.TRUE),
    ("x2^(1/3)/x2 - x2^(-2/3)", Verdict.TRUE),
    ("x1^a*x1 - x1^(a+1)", Verdict.TRUE),
    ("(x1*x2)^(1/2) - x1^(1/2)*x2^(1/2)", Verdict.TRUE),
    ("x1^(1/2) - x1^(1/3)", Verdict.FALSE),
    ("exp(x1) - 1 - x1", Verdict.FALSE),
    ("x1/(x1+1) - 1", Verdict.FALSE),
])
def test_zero_test(text, verdict):
    assert E.zero_test(p(text)) is verdict


def test_polynomial_conversion():
    e = p("(x1 + a)^2 - x2/2")
    assert E.is_polynomial(e)
    poly = E.to_poly(e, VS + PS)
    assert E.zero_test(E.sub(E.from_poly(poly, params=PS), e)) is Verdict.TRUE
    with pytest.raises(E.NotPolynomialError):
        E.to_poly(p("1/x1"), VS)


def test_compile_numeric_vectorized():
    import numpy as np
    f = E.compile_numeric(p("a*x1^2 + exp(x2)"))
    out = f({"a": 2.0, "x1": np.array([1.0, 2.0]), "x2": np.array([0.0, 0.0])})
    assert list(out) == [3.0, 9.0]


def test_taylor_of_exp_and_rpow():
    s = E.series_of(p("exp(x1)*(1+x2)^(1/2)"), VS, VS, 3)
    co = s.poly.coefficients(("x1", "x2", "x3"))
    assert co[(1, 1, 0)].constant_term() == Fraction(1, 2)
    assert co[(0, 2, 0)].constant_term() == Fraction(-1, 8)
    assert co[(3, 0, 0)].constant_term() == Fraction(1, 6)


def test_taylor_about_point():
    # displacement variable keeps the name x1
    s = E.taylor(p("log(x1)"), {"x1": 1}, order=3)
    co = s.poly.coefficients(("x1",))
    assert [co[(k,)].constant_term() for k in (1, 2, 3)] == [1, Fraction(-1, 2), Fraction(1, 3)]
    assert (0,) not in co


def test_taylor_rejects_irrational_constant():
    with pytest.raises(E.TaylorError):
        E.series_of(p("(2 + x1)^(1/2)"), VS, VS, 3)


# -- randomized round trip -------------------------------------------------------------

leaf = st.one_of(
    st.sampled_from([E.var(v) for v in VS] + [E.param(q) for q in PS]),
    st.fractions(min_value=-5, max_value=5, max_denominator=7).map(E.const),
)


def _tree(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: E.add(*t)),
        st.tuples(children, children).map(lambda t: E.mul(*t)),
        st.tuples(children, children).map(lambda t: E.sub(*t)),
        st.tuples(children, st.integers(0, 3)).map(lambda t: E.power(*t)),
        children.map(E.neg),
        children.map(E.exp),
    )


trees = st.recursive(leaf, _tree, max_leaves=8)


@given(trees)
def test_print_parse_round_trip(e):
    assert p(E.to_string(e)) == e
