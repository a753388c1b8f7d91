"""Three-valued zero test for expression trees.

The test rewrites real powers as ``exp(e*log u)``, splits logarithms of
products/quotients/powers (each factor is assumed positive, the same domain
assumption that already guards the log), and then treats the remaining
distinct ``exp`` and ``log`` nodes as fresh indeterminates.  The expression
becomes a rational function; its numerator is grouped by the combined
exponential factor of each monomial (so ``exp(u)*exp(v)`` and ``exp(u+v)``
land in one class, and integer multiples of logs are pulled out as powers),
and each class coefficient must vanish identically.

A symbolic "zero" is a proof.  A symbolic "nonzero" is only trusted when a
numeric witness confirms it; otherwise the answer is inconclusive.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction

import numpy as np

from . import tree as T
from .poly import MultiPoly

__all__ = ["Verdict", "zero_test", "is_zero", "InconclusiveError", "numeric_witness"]


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    INCONCLUSIVE = "inconclusive"

    def __str__(self):
        return self.value

    @classmethod
    def of(cls, flag: bool) -> "Verdict":
        return cls.TRUE if flag else cls.FALSE

    def __and__(self, other: "Verdict") -> "Verdict":
        if Verdict.FALSE in (self, other):
            return Verdict.FALSE
        if Verdict.INCONCLUSIVE in (self, other):
            return Verdict.INCONCLUSIVE
        return Verdict.TRUE


class InconclusiveError(ArithmeticError):
    """The normalizer could neither prove nor refute identical vanishing."""


# -- preprocessing ------------------------------------------------------------------

def _small_factor(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n and p < 100_000:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _log_of_const(v: Fraction) -> T.Expr:
    terms = []
    for p, k in _small_factor(v.numerator).items():
        terms.append(T.mul(k, T.Log(T.Const(p))))
    for p, k in _small_factor(v.denominator).items():
        terms.append(T.mul(-k, T.Log(T.Const(p))))
    return T.add(*terms)


def _preprocess(e: T.Expr) -> T.Expr:
    memo: dict = {}

    def go(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        if isinstance(n, (T.Const, T.Var, T.Param)):
            out = n
        elif isinstance(n, T.Add):
            out = T.add(*(go(a) for a in n.args))
        elif isinstance(n, T.Mul):
            out = T.mul(*(go(a) for a in n.args))
        elif isinstance(n, T.Div):
            out = T.div(go(n.num), go(n.den))
        elif isinstance(n, T.Pow):
            out = T.power(go(n.base), n.n)
        elif isinstance(n, T.RPow):
            out = T.exp(T.mul(go(n.exponent), split_log(go(n.base))))
        elif isinstance(n, T.Exp):
            out = T.exp(go(n.arg))
        elif isinstance(n, T.Log):
            out = split_log(go(n.arg))
        else:
            raise TypeError(type(n).__name__)
        memo[n] = out
        return out

    return go(e)


def split_log(arg: T.Expr) -> T.Expr:
    """log of an already preprocessed argument, expanded over products."""
    if isinstance(arg, T.Const):
        if arg.value <= 0:
            raise T.DomainError(f"log of non-positive constant {arg.value}")
        return _log_of_const(arg.value)
    if isinstance(arg, T.Mul):
        factors = list(arg.args)
        out = []
        if isinstance(factors[0], T.Const):
            c = factors.pop(0).value
            if c < 0:
                # keep the sign with the remaining product
                return T.add(_log_of_const(-c), T.Log(T.neg(T.mul(*factors))))
            out.append(_log_of_const(c))
        out.extend(split_log(f) for f in factors)
        return T.add(*out)
    if isinstance(arg, T.Div):
        return T.sub(split_log(arg.num), split_log(arg.den))
    if isinstance(arg, T.Pow):
        return T.mul(arg.n, split_log(arg.base))
    if isinstance(arg, T.Exp):
        return arg.arg
    return T.Log(arg)


# -- rational-function conversion ---------------------------------------------------

class _Ctx:
    """Growing generator list; every polynomial is kept embedded in ``gens``."""

    def __init__(self, names):
        self.gens = tuple(names)
        self.exp_args: dict[str, tuple] = {}     # exp gen -> (num, den) of its argument
        self.exp_nodes: dict[T.Expr, str] = {}
        self.log_keys: dict[MultiPoly, str] = {}  # primitive polynomial -> log gen
        self.log_args: dict[str, MultiPoly] = {}
        self.memo: dict = {}

    def new_gen(self, prefix):
        name = f"_{prefix}{len(self.gens)}"
        self.gens = self.gens + (name,)
        return name

    def fit(self, p: MultiPoly) -> MultiPoly:
        return p if p.gens == self.gens else p.embed(self.gens)

    def const(self, c):
        return MultiPoly.const(self.gens, c)

    def gen(self, name):
        return MultiPoly.gen(self.gens, name)


def _cancel(num: MultiPoly, den: MultiPoly):
    if den.is_zero():
        raise ZeroDivisionError("identically vanishing denominator")
    if num.is_zero():
        return num, MultiPoly.const(num.gens, 1)
    n = num.nvars
    lo = [min(e[i] for e in num.terms) for i in range(n)]
    lo = [min(lo[i], min(e[i] for e in den.terms)) for i in range(n)]
    if any(lo):
        shift = lambda p: MultiPoly._raw(p.gens, {tuple(a - b for a, b in zip(e, lo)): c
                                                  for e, c in p.terms.items()})
        num, den = shift(num), shift(den)
    if den.is_constant():
        c = den.constant_term()
        return num / c, MultiPoly.const(num.gens, 1)
    return num, den


def _radd(ctx, a, b):
    an, ad = ctx.fit(a[0]), ctx.fit(a[1])
    bn, bd = ctx.fit(b[0]), ctx.fit(b[1])
    if ad == bd:
        return _cancel(an + bn, ad)
    return _cancel(an * bd + bn * ad, ad * bd)


def _rmul(ctx, a, b):
    return _cancel(ctx.fit(a[0]) * ctx.fit(b[0]), ctx.fit(a[1]) * ctx.fit(b[1]))


def _convert(ctx: _Ctx, n: T.Expr):
    hit = ctx.memo.get(n)
    if hit is not None:
        return ctx.fit(hit[0]), ctx.fit(hit[1])
    one = ctx.const(1)
    if isinstance(n, T.Const):
        out = (ctx.const(n.value), one)
    elif isinstance(n, (T.Var, T.Param)):
        out = (ctx.gen(n.name), one)
    elif isinstance(n, T.Add):
        out = (ctx.const(0), one)
        for a in n.args:
            out = _radd(ctx, out, _convert(ctx, a))
    elif isinstance(n, T.Mul):
        out = (one, one)
        for a in n.args:
            out = _rmul(ctx, out, _convert(ctx, a))
    elif isinstance(n, T.Div):
        a = _convert(ctx, n.num)
        b = _convert(ctx, n.den)
        out = _rmul(ctx, a, (b[1], b[0]))
    elif isinstance(n, T.Pow):
        a, b = _convert(ctx, n.base)
        k = abs(n.n)
        out = _cancel(a ** k, b ** k) if n.n > 0 else _cancel(ctx.fit(b) ** k, ctx.fit(a) ** k)
    elif isinstance(n, T.Exp):
        name = ctx.exp_nodes.get(n)
        if name is None:
            arg = _convert(ctx, n.arg)
            name = ctx.new_gen("e")
            ctx.exp_nodes[n] = name
            ctx.exp_args[name] = arg
        out = (ctx.gen(name), ctx.const(1))
    elif isinstance(n, T.Log):
        out = _convert_log(ctx, n)
    else:
        raise TypeError(f"unexpected node {type(n).__name__}")
    ctx.memo[n] = out
    return ctx.fit(out[0]), ctx.fit(out[1])


def _log_gen(ctx, prim: MultiPoly) -> str:
    prim = ctx.fit(prim)
    # keys are stored embedded in the gens current at insertion; compare after embedding
    for key, name in ctx.log_keys.items():
        if ctx.fit(key) == prim:
            return name
    name = ctx.new_gen("l")
    ctx.log_keys[prim] = name
    ctx.log_args[name] = prim
    return name


def _primitive(p: MultiPoly):
    c = p.content()
    return c, p / c


def _convert_log(ctx, n: T.Log):
    num, den = _convert(ctx, n.arg)
    out = (ctx.const(0), ctx.const(1))
    pieces = []
    for poly, sign in ((num, 1), (den, -1)):
        if poly.is_constant():
            c = poly.constant_term()
            if c < 0:
                raise T.DomainError("log of a negative constant factor")
            pieces.append((T.Const(c), sign))
            continue
        c, prim = _primitive(poly)
        if c != 1:
            pieces.append((T.Const(c), sign))
        pieces.append((prim, sign))
    for piece, sign in pieces:
        if isinstance(piece, T.Const):
            v = piece.value
            for p, k in _small_factor(v.numerator).items():
                out = _radd(ctx, out, (ctx.gen(_log_gen(ctx, ctx.const(p))) * (sign * k), ctx.const(1)))
            for p, k in _small_factor(v.denominator).items():
                out = _radd(ctx, out, (ctx.gen(_log_gen(ctx, ctx.const(p))) * (-sign * k), ctx.const(1)))
            continue
        term = (ctx.gen(_log_gen(ctx, piece)) * sign, ctx.const(1))
        out = _radd(ctx, out, term)
    return out


# -- class grouping -----------------------------------------------------------------

def _constant_log_arg(ctx, name):
    """Positive polynomial/prime that ``exp(name)`` reduces to."""
    return ctx.fit(ctx.log_args[name])


def _symbolic_zero(e: T.Expr) -> bool:
    pre = _preprocess(e)
    names = sorted(T.free_vars(pre)) + sorted(T.free_params(pre))
    ctx = _Ctx(names)
    num, _den = _convert(ctx, pre)
    num = ctx.fit(num)
    if num.is_zero():
        return True
    gens = ctx.gens
    exp_idx = [i for i, g in enumerate(gens) if g in ctx.exp_args]
    if not exp_idx:
        return False
    # log gens for constants come from Log(Const(p)) leaves; register them too
    log_idx = {i: g for i, g in enumerate(gens) if g in ctx.log_args}

    classes: list[list] = []   # [S num, S den, (coef num, coef den)]
    one = MultiPoly.const(gens, 1)
    for expo, coef in num.terms.items():
        sn, sd = MultiPoly.zero(gens), one
        for i in exp_idx:
            k = expo[i]
            if k:
                an, ad = ctx.exp_args[gens[i]]
                sn, sd = _radd(ctx, (sn, sd), (ctx.fit(an) * k, ctx.fit(ad)))
        base = tuple(0 if i in exp_idx else k for i, k in enumerate(expo))
        cn, cd = MultiPoly._raw(gens, {base: coef}), one
        if sd.is_constant() and not sn.is_zero():
            # pull the integer part of each log-atom coefficient out of the exponent,
            # leaving a fractional part in [0, 1) so x^(1/3)/x and x^(-2/3) meet
            inv = 1 / sd.constant_term()
            for i, name in log_idx.items():
                unit = tuple(1 if j == i else 0 for j in range(len(gens)))
                c = sn.terms.get(unit)
                if c is None:
                    continue
                k = math.floor(Fraction(c * inv))
                if k == 0:
                    continue
                arg = _constant_log_arg(ctx, name)
                cn, cd = (cn * arg ** k, cd) if k > 0 else (cn, cd * arg ** (-k))
                sn = sn - MultiPoly._raw(gens, {unit: sd.constant_term() * k})
        for cls in classes:
            if (cls[0] * sd - sn * cls[1]).is_zero():
                cls[2] = _radd(ctx, cls[2], (cn, cd))
                break
        else:
            classes.append([sn, sd, (cn, cd)])
    return all(c[2][0].is_zero() for c in classes)


# -- numeric witness ----------------------------------------------------------------

def _magnitude_fn(e: T.Expr):
    """f(env) -> (value, magnitude) where magnitude bounds the roundoff scale."""
    memo: dict = {}

    def build(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        if isinstance(n, T.Const):
            v = float(n.value)
            fn = lambda env, v=v: (v, abs(v))
        elif isinstance(n, (T.Var, T.Param)):
            nm = n.name
            fn = lambda env, nm=nm: (env[nm], np.abs(env[nm]))
        elif isinstance(n, T.Add):
            parts = [build(a) for a in n.args]

            def fn(env, parts=parts):
                v, m = 0.0, 0.0
                for p in parts:
                    pv, pm = p(env)
                    v, m = v + pv, m + pm
                return v, m
        elif isinstance(n, T.Mul):
            parts = [build(a) for a in n.args]

            def fn(env, parts=parts):
                v, m = 1.0, 1.0
                for p in parts:
                    pv, pm = p(env)
                    v, m = v * pv, m * pm
                return v, m
        elif isinstance(n, T.Div):
            fa, fb = build(n.num), build(n.den)

            def fn(env, fa=fa, fb=fb):
                av, am = fa(env)
                bv, _ = fb(env)
                return av / bv, am / np.abs(bv)
        elif isinstance(n, T.Pow):
            fb, k = build(n.base), n.n

            def fn(env, fb=fb, k=k):
                bv, bm = fb(env)
                v = bv ** k if k > 0 else 1.0 / bv ** (-k)
                return v, np.abs(v) * max(1, abs(k)) * np.maximum(1.0, bm / np.maximum(np.abs(bv), 1e-300))
        else:
            # transcendental nodes: propagate the condition of the argument
            f = T.compile_numeric(n)
            kids = [build(c) for c in n.children]

            def fn(env, f=f, kids=kids):
                v = f(env)
                scale = 1.0
                for k in kids:
                    _, km = k(env)
                    scale = scale + km
                return v, np.abs(v) * scale + 1.0
        memo[n] = fn
        return fn

    return build(e)


def _sample_env(names_v, names_p, rng, count):
    env = {}
    for nm in list(names_v) + list(names_p):
        pos = rng.uniform(0.1, 2.0, count)
        mixed = rng.uniform(-2.0, 2.0, count)
        pick = rng.random(count) < 0.5
        env[nm] = np.where(pick, pos, mixed)
    return env


def numeric_witness(e: T.Expr, points: int = 64, rel_tol: float = 1e-8, seed: int = 12345):
    """Look for a sample point where ``e`` is clearly nonzero.

    Returns (found, n_valid): ``found`` is True when some valid point has
    |e| above ``rel_tol`` times the roundoff scale of the tree.
    """
    rng = np.random.default_rng(seed)
    env = _sample_env(sorted(T.free_vars(e)), sorted(T.free_params(e)), rng, points)
    with np.errstate(all="ignore"):
        val, mag = _magnitude_fn(e)(env)
    val = np.broadcast_to(np.asarray(val, dtype=float), (points,))
    mag = np.broadcast_to(np.asarray(mag, dtype=float), (points,))
    ok = np.isfinite(val) & np.isfinite(mag)
    if not ok.any():
        return False, 0
    hit = np.abs(val[ok]) > rel_tol * np.maximum(1.0, mag[ok])
    return bool(hit.any()), int(ok.sum())


def zero_test(e: T.Expr) -> Verdict:
    """Decide identical vanishing: TRUE, FALSE, or INCONCLUSIVE."""
    e = T.as_expr(e)
    if isinstance(e, T.Const):
        return Verdict.of(e.value == 0)
    found, _ = numeric_witness(e, points=16, rel_tol=1e-6)
    if found:
        return Verdict.FALSE
    try:
        if _symbolic_zero(e):
            return Verdict.TRUE
    except (ZeroDivisionError, T.DomainError):
        pass
    found, _ = numeric_witness(e, points=256, rel_tol=1e-9, seed=54321)
    return Verdict.FALSE if found else Verdict.INCONCLUSIVE


def is_zero(e: T.Expr) -> bool:
    """Boolean zero test; raises :class:`InconclusiveError` when undecided."""
    v = zero_test(e)
    if v is Verdict.INCONCLUSIVE:
        raise InconclusiveError(f"cannot decide whether {e} vanishes identically")
    return v is Verdict.TRUE
