"""Immutable expression trees over state variables and parameters.

Nodes are built through smart constructors (:func:`add`, :func:`mul`, ...)
which flatten, fold constants and drop neutral elements, so that printing
and reparsing reproduces the same tree.  Logarithms and real powers carry
an implicit positivity assumption on their argument/base, which
:func:`positivity_assumptions` reports.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .poly import MultiPoly
from .rational import GaussRational, to_fraction

__all__ = [
    "Expr", "Const", "Var", "Param", "Add", "Mul", "Div", "Pow", "RPow", "Exp", "Log",
    "const", "var", "param", "add", "mul", "div", "neg", "sub", "power", "rpow", "exp", "log",
    "ZERO", "ONE", "diff", "subs", "free_vars", "free_params", "positivity_assumptions",
    "evaluate", "compile_numeric", "to_poly", "from_poly", "is_polynomial", "to_string",
    "DomainError", "NotPolynomialError", "as_expr", "walk",
]


class DomainError(ValueError):
    """Numeric evaluation left the domain of a log or real power."""


class NotPolynomialError(ValueError):
    """The expression is not a polynomial in the requested generators."""


class Expr:
    __slots__ = ("_hash",)

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        return self._key() == other._key()

    def __hash__(self):
        h = getattr(self, "_hash", None)
        if h is None:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_hash", h)
        return h

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    # operators
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, other):
        if isinstance(other, int):
            return power(self, other)
        return rpow(self, as_expr(other))

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"{type(self).__name__}({to_string(self)})"

    @property
    def children(self) -> tuple["Expr", ...]:
        return ()


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", to_fraction(value))

    def _key(self):
        return self.value


class _Symbol(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return self.name


class Var(_Symbol):
    """State variable (differentiated by vector fields)."""

    __slots__ = ()


class Param(_Symbol):
    """Free parameter (zero derivative along the state)."""

    __slots__ = ()


class Add(Expr):
    __slots__ = ("args",)

    def __init__(self, args):
        object.__setattr__(self, "args", tuple(args))

    def _key(self):
        return self.args

    @property
    def children(self):
        return self.args


class Mul(Expr):
    __slots__ = ("args",)

    def __init__(self, args):
        object.__setattr__(self, "args", tuple(args))

    def _key(self):
        return self.args

    @property
    def children(self):
        return self.args


class Div(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num, den):
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def _key(self):
        return (self.num, self.den)

    @property
    def children(self):
        return (self.num, self.den)


class Pow(Expr):
    """Integer power (exponent may be negative)."""

    __slots__ = ("base", "n")

    def __init__(self, base, n: int):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "n", int(n))

    def _key(self):
        return (self.base, self.n)

    @property
    def children(self):
        return (self.base,)


class RPow(Expr):
    """Real power ``base**exponent``; exponent is free of state variables, base assumed > 0."""

    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", exponent)

    def _key(self):
        return (self.base, self.exponent)

    @property
    def children(self):
        return (self.base, self.exponent)


class Exp(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg):
        object.__setattr__(self, "arg", arg)

    def _key(self):
        return self.arg

    @property
    def children(self):
        return (self.arg,)


class Log(Expr):
    """Natural logarithm; argument assumed > 0."""

    __slots__ = ("arg",)

    def __init__(self, arg):
        object.__setattr__(self, "arg", arg)

    def _key(self):
        return self.arg

    @property
    def children(self):
        return (self.arg,)


ZERO = Const(0)
ONE = Const(1)
_MINUS_ONE = Const(-1)


# -- smart constructors ---------------------------------------------------------

def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not an expression")
    if isinstance(value, (int, Fraction, str)):
        return Const(value)
    if isinstance(value, GaussRational) and value.is_real():
        return Const(value.re)
    raise TypeError(f"cannot build an expression from {type(value).__name__}")


def const(value) -> Const:
    return Const(value)


def var(name: str) -> Var:
    return Var(name)


def param(name: str) -> Param:
    return Param(name)


def add(*terms) -> Expr:
    flat: list[Expr] = []
    c = Fraction(0)
    for t in terms:
        t = as_expr(t)
        items = t.args if isinstance(t, Add) else (t,)
        for s in items:
            if isinstance(s, Const):
                c += s.value
            else:
                flat.append(s)
    if c:
        flat.append(Const(c))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(flat)


def mul(*factors) -> Expr:
    flat: list[Expr] = []
    c = Fraction(1)
    for f in factors:
        f = as_expr(f)
        items = f.args if isinstance(f, Mul) else (f,)
        for s in items:
            if isinstance(s, Const):
                c *= s.value
            else:
                flat.append(s)
    if c == 0:
        return ZERO
    if c != 1:
        flat.insert(0, Const(c))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Mul(flat)


def neg(e) -> Expr:
    return mul(_MINUS_ONE, e)


def sub(a, b) -> Expr:
    return add(a, neg(b))


def div(a, b) -> Expr:
    a, b = as_expr(a), as_expr(b)
    if isinstance(b, Const):
        if b.value == 0:
            raise ZeroDivisionError("division by the constant 0")
        return mul(Const(1 / b.value), a)
    if a == ZERO:
        return ZERO
    # keep a negative sign outside the quotient so printing and parsing agree
    if isinstance(a, Const) and a.value < 0:
        return mul(_MINUS_ONE, Div(Const(-a.value), b))
    if isinstance(a, Mul) and isinstance(a.args[0], Const) and a.args[0].value < 0:
        return mul(_MINUS_ONE, Div(mul(Const(-a.args[0].value), *a.args[1:]), b))
    return Div(a, b)


def power(base, n: int) -> Expr:
    base = as_expr(base)
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and n < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return Const(base.value ** n)
    return Pow(base, n)


def rpow(base, exponent) -> Expr:
    base, exponent = as_expr(base), as_expr(exponent)
    if isinstance(exponent, Const) and exponent.value.denominator == 1:
        return power(base, int(exponent.value))
    if free_vars(exponent):
        raise ValueError("real-power exponents must be free of state variables")
    if base == ONE:
        return ONE
    return RPow(base, exponent)


def exp(arg) -> Expr:
    arg = as_expr(arg)
    if arg == ZERO:
        return ONE
    return Exp(arg)


def log(arg) -> Expr:
    arg = as_expr(arg)
    if arg == ONE:
        return ZERO
    if isinstance(arg, Const) and arg.value <= 0:
        raise DomainError(f"log of non-positive constant {arg.value}")
    return Log(arg)


# -- traversal ------------------------------------------------------------------

def walk(e: Expr):
    """Pre-order iteration over all nodes (shared subtrees visited once)."""
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        yield node
        stack.extend(node.children)


def free_vars(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Var)}


def free_params(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Param)}


def positivity_assumptions(e: Expr) -> set[Expr]:
    """Subexpressions assumed positive: log arguments and real-power bases."""
    out = set()
    for n in walk(e):
        if isinstance(n, Log):
            out.add(n.arg)
        elif isinstance(n, RPow):
            out.add(n.base)
    return out


def diff(e: Expr, name: str, _memo: dict | None = None) -> Expr:
    """Derivative with respect to the state variable ``name``."""
    memo = {} if _memo is None else _memo
    return _diff(e, name, memo)


def _diff(e, name, memo):
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, (Const, Param)):
        out = ZERO
    elif isinstance(e, Var):
        out = ONE if e.name == name else ZERO
    elif isinstance(e, Add):
        out = add(*(_diff(a, name, memo) for a in e.args))
    elif isinstance(e, Mul):
        terms = []
        for i, f in enumerate(e.args):
            df = _diff(f, name, memo)
            if df != ZERO:
                terms.append(mul(*e.args[:i], df, *e.args[i + 1:]))
        out = add(*terms)
    elif isinstance(e, Div):
        dn, dd = _diff(e.num, name, memo), _diff(e.den, name, memo)
        if dd == ZERO:
            out = div(dn, e.den)
        else:
            out = div(sub(mul(dn, e.den), mul(e.num, dd)), power(e.den, 2))
    elif isinstance(e, Pow):
        db = _diff(e.base, name, memo)
        out = ZERO if db == ZERO else mul(Const(e.n), power(e.base, e.n - 1), db)
    elif isinstance(e, RPow):
        # u**a = exp(a*log u): derivative u**a * a * u'/u
        db = _diff(e.base, name, memo)
        out = ZERO if db == ZERO else mul(e, e.exponent, div(db, e.base))
    elif isinstance(e, Exp):
        da = _diff(e.arg, name, memo)
        out = ZERO if da == ZERO else mul(e, da)
    elif isinstance(e, Log):
        da = _diff(e.arg, name, memo)
        out = ZERO if da == ZERO else div(da, e.arg)
    else:
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[e] = out
    return out


def subs(e: Expr, mapping: Mapping[str, object]) -> Expr:
    """Replace variables/parameters by expressions (simultaneously)."""
    table = {k: as_expr(v) for k, v in mapping.items()}
    memo: dict = {}

    def go(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        if isinstance(n, _Symbol):
            out = table.get(n.name, n)
        elif isinstance(n, Const):
            out = n
        elif isinstance(n, Add):
            out = add(*(go(a) for a in n.args))
        elif isinstance(n, Mul):
            out = mul(*(go(a) for a in n.args))
        elif isinstance(n, Div):
            out = div(go(n.num), go(n.den))
        elif isinstance(n, Pow):
            out = power(go(n.base), n.n)
        elif isinstance(n, RPow):
            out = rpow(go(n.base), go(n.exponent))
        elif isinstance(n, Exp):
            out = exp(go(n.arg))
        elif isinstance(n, Log):
            out = log(go(n.arg))
        else:
            raise TypeError(type(n).__name__)
        memo[n] = out
        return out

    return go(e)


# -- printing ---------------------------------------------------------------------

def _const_str(v: Fraction, bare: bool = False) -> str:
    if v >= 0 and v.denominator == 1:
        return str(v.numerator)
    body = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return body if bare else f"({body})"


def _is_atom(e) -> bool:
    return (isinstance(e, (_Symbol, Exp, Log))
            or (isinstance(e, Const) and e.value >= 0 and e.value.denominator == 1))


def _looks_negative(e) -> bool:
    if isinstance(e, Const):
        return e.value < 0
    return isinstance(e, Mul) and isinstance(e.args[0], Const) and e.args[0].value < 0


def to_string(e: Expr) -> str:
    """Parseable text; ``parse(to_string(e))`` rebuilds ``e`` exactly."""
    if isinstance(e, Const):
        return _const_str(e.value, bare=True) if e.value >= 0 else "-" + _const_str(-e.value)
    if isinstance(e, _Symbol):
        return e.name
    if isinstance(e, Add):
        out = []
        for i, t in enumerate(e.args):
            if i and _looks_negative(t):
                m = neg(t)
                body = to_string(m)
                out.append(f" - ({body})" if isinstance(m, Add) else " - " + body)
            elif i:
                out.append(" + " + to_string(t))
            else:
                out.append(to_string(t))
        return "".join(out)
    if isinstance(e, Mul):
        args = list(e.args)
        prefix = ""
        if isinstance(args[0], Const):
            c = args.pop(0).value
            if c == -1:
                prefix = "-"
            elif c < 0:
                prefix = "-" + _const_str(-c) + "*"
            else:
                prefix = _const_str(c) + "*"
        parts = []
        for f in args:
            s = to_string(f)
            if isinstance(f, Div) and prefix == "-" and len(args) == 1:
                parts.append(s)
                continue
            if isinstance(f, (Add, Div)):
                s = f"({s})"
            parts.append(s)
        return prefix + "*".join(parts)
    if isinstance(e, Div):
        num = to_string(e.num)
        if isinstance(e.num, Add):
            num = f"({num})"
        den = to_string(e.den)
        if not (_is_atom(e.den) or isinstance(e.den, (Pow, RPow))):
            den = f"({den})"
        return f"{num}/{den}"
    if isinstance(e, (Pow, RPow)):
        base = to_string(e.base)
        if not _is_atom(e.base):
            base = f"({base})"
        if isinstance(e, Pow):
            ex = str(e.n) if e.n >= 0 else f"({e.n})"
        elif isinstance(e.exponent, Const):
            ex = _const_str(e.exponent.value)
        elif isinstance(e.exponent, _Symbol):
            ex = e.exponent.name
        else:
            ex = f"({to_string(e.exponent)})"
        return f"{base}^{ex}"
    if isinstance(e, Exp):
        return f"exp({to_string(e.arg)})"
    if isinstance(e, Log):
        return f"log({to_string(e.arg)})"
    raise TypeError(type(e).__name__)


# -- numerics -------------------------------------------------------------------

def compile_numeric(e: Expr, strict: bool = False) -> Callable[[Mapping[str, object]], object]:
    """Build ``f(env)`` evaluating ``e`` with numpy on scalars or arrays.

    With ``strict`` a log/real-power outside its domain raises
    :class:`DomainError` and a vanishing denominator raises
    :class:`ZeroDivisionError`; otherwise numpy's nan/inf propagate.
    """
    memo: dict = {}

    def build(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        if isinstance(n, Const):
            v = float(n.value)
            fn = lambda env, v=v: v
        elif isinstance(n, _Symbol):
            nm = n.name
            fn = lambda env, nm=nm: env[nm]
        elif isinstance(n, Add):
            subs_ = [build(a) for a in n.args]

            def fn(env, subs_=subs_):
                acc = subs_[0](env)
                for s in subs_[1:]:
                    acc = acc + s(env)
                return acc
        elif isinstance(n, Mul):
            subs_ = [build(a) for a in n.args]

            def fn(env, subs_=subs_):
                acc = subs_[0](env)
                for s in subs_[1:]:
                    acc = acc * s(env)
                return acc
        elif isinstance(n, Div):
            fa, fb = build(n.num), build(n.den)

            def fn(env, fa=fa, fb=fb):
                d = fb(env)
                if strict and np.any(np.asarray(d) == 0):
                    raise ZeroDivisionError("denominator vanishes")
                with np.errstate(divide="ignore", invalid="ignore"):
                    return fa(env) / d
        elif isinstance(n, Pow):
            fb, k = build(n.base), n.n

            def fn(env, fb=fb, k=k):
                b = fb(env)
                if k < 0:
                    if strict and np.any(np.asarray(b) == 0):
                        raise ZeroDivisionError("negative power of zero")
                    with np.errstate(divide="ignore", invalid="ignore"):
                        return 1.0 / b ** (-k)
                return b ** k
        elif isinstance(n, RPow):
            fb, fe = build(n.base), build(n.exponent)

            def fn(env, fb=fb, fe=fe):
                b = fb(env)
                if strict and np.any(np.asarray(b) <= 0):
                    raise DomainError("real power of a non-positive base")
                with np.errstate(invalid="ignore", divide="ignore"):
                    return np.power(np.asarray(b, dtype=float), fe(env))
        elif isinstance(n, Exp):
            fa = build(n.arg)
            fn = lambda env, fa=fa: np.exp(fa(env))
        elif isinstance(n, Log):
            fa = build(n.arg)

            def fn(env, fa=fa):
                a = fa(env)
                if strict and np.any(np.asarray(a) <= 0):
                    raise DomainError("log of a non-positive value")
                with np.errstate(invalid="ignore", divide="ignore"):
                    return np.log(a)
        else:
            raise TypeError(type(n).__name__)
        memo[n] = fn
        return fn

    return build(e)


def evaluate(e: Expr, point: Mapping[str, float], params: Mapping[str, float] | None = None) -> float:
    """IEEE double value at a point; raises on domain errors."""
    env = dict(params or {})
    env.update(point)
    missing = (free_vars(e) | free_params(e)) - set(env)
    if missing:
        raise KeyError(f"no value for {sorted(missing)}")
    return float(compile_numeric(e, strict=True)(env))


# -- polynomial bridge --------------------------------------------------------------

def is_polynomial(e: Expr) -> bool:
    try:
        to_poly(e, sorted(free_vars(e) | free_params(e)))
    except NotPolynomialError:
        return False
    return True


def to_poly(e: Expr, gens: Iterable[str]) -> MultiPoly:
    """Exact polynomial over ``gens``; divisions only by nonzero constants."""
    gens = tuple(gens)
    memo: dict = {}

    def go(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        if isinstance(n, Const):
            out = MultiPoly.const(gens, n.value)
        elif isinstance(n, _Symbol):
            if n.name not in gens:
                raise NotPolynomialError(f"{n.name} is not a generator")
            out = MultiPoly.gen(gens, n.name)
        elif isinstance(n, Add):
            out = MultiPoly.zero(gens)
            for a in n.args:
                out = out + go(a)
        elif isinstance(n, Mul):
            out = MultiPoly.const(gens, 1)
            for a in n.args:
                out = out * go(a)
        elif isinstance(n, Div):
            d = go(n.den)
            if not d.is_constant() or d.is_zero():
                raise NotPolynomialError("division by a non-constant")
            out = go(n.num) / d.constant_term()
        elif isinstance(n, Pow):
            if n.n < 0:
                b = go(n.base)
                if not b.is_constant() or b.is_zero():
                    raise NotPolynomialError("negative power of a non-constant")
                out = MultiPoly.const(gens, Fraction(1) / b.constant_term() ** (-n.n))
            else:
                out = go(n.base) ** n.n
        else:
            raise NotPolynomialError(f"{type(n).__name__} node is not polynomial")
        memo[n] = out
        return out

    return go(e)


def from_poly(p: MultiPoly, params: Iterable[str] = ()) -> Expr:
    """Expression tree of a real polynomial; generators in ``params`` become Param nodes."""
    params = set(params)
    syms = [Param(g) if g in params else Var(g) for g in p.gens]
    terms = []
    for e, c in p.sorted_terms():
        if isinstance(c, GaussRational):
            raise ValueError("complex coefficients cannot become real expressions")
        factors = [Const(c)]
        for s, k in zip(syms, e):
            if k:
                factors.append(power(s, k))
        terms.append(mul(*factors))
    return add(*terms)
