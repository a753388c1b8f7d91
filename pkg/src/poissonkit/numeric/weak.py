"""Weak inverse Jacobi multiplier residuals and invariance of switching curves."""

from __future__ import annotations

import warnings
from typing import Mapping

import numpy as np
from scipy import integrate, optimize

from .. import expr as E
from ..expr import Expr
from ..fields import VectorField, divergence, lie_derivative
from .piecewise import BumpTest, PiecewiseExpr, PiecewiseField

__all__ = [
    "QuadratureError", "weak_multiplier_residual", "invariant_curve_check", "curve_samples",
    "random_bumps", "DEFAULT_QUAD_TOL",
]

DEFAULT_QUAD_TOL = 1e-10


class QuadratureError(RuntimeError):
    pass


def _sides(F, W):
    """(gamma or None, {side: (field, W expr)})."""
    gF = F.gamma if isinstance(F, PiecewiseField) else None
    gW = W.gamma if isinstance(W, PiecewiseExpr) else None
    if gF is not None and gW is not None and gF != gW and E.zero_test(E.sub(gF, gW)) is not E.Verdict.TRUE:
        raise ValueError("field and weight are switched across different curves")
    gamma = gF if gF is not None else gW
    if gamma is not None and E.zero_test(gamma) is E.Verdict.TRUE:
        gamma = None
    out = {}
    for s in (1, -1):
        Y = F.side_field(s) if isinstance(F, PiecewiseField) else F
        w = W.side(s) if isinstance(W, PiecewiseExpr) else E.as_expr(W)
        out[s] = (Y, w)
    return gamma, out


def _roots_on(fn, a, b, n=64):
    """Sign changes of fn on [a, b], refined with brentq."""
    ts = np.linspace(a, b, n + 1)
    vs = np.array([fn(t) for t in ts])
    roots = []
    for i in range(n):
        if vs[i] == 0:
            roots.append(ts[i])
        elif vs[i] * vs[i + 1] < 0:
            roots.append(optimize.brentq(fn, ts[i], ts[i + 1], xtol=1e-14, rtol=1e-15))
    return [r for r in roots if a < r < b]


def weak_multiplier_residual(F: VectorField | PiecewiseField, W, phi: BumpTest,
                             quad_tol: float = DEFAULT_QUAD_TOL,
                             params: Mapping[str, float] | None = None) -> float:
    """Integral of W [Y(phi) + 2 phi div Y] over the bump support, split along gamma."""
    vars_ = F.vars
    if len(vars_) != 2:
        raise ValueError("weak residuals are planar")
    gamma, sides = _sides(F, W)
    pv = dict(params or {})
    xn, yn = vars_
    compiled = {}
    for s, (Y, w) in sides.items():
        P, Q = Y.components
        compiled[s] = tuple(E.compile_numeric(e) for e in (P, Q, divergence(Y), E.as_expr(w)))
    gfn = E.compile_numeric(gamma) if gamma is not None else None

    def g(x, y):
        return float(gfn({**pv, xn: x, yn: y}))

    def integrand(y, x, s):
        env = {**pv, xn: x, yn: y}
        P, Q, dv, w = (float(f(env)) for f in compiled[s])
        ph, gx, gy = phi.value_grad(x, y)
        return w * (P * gx + Q * gy + 2.0 * ph * dv)

    cx, cy = phi.center
    r = phi.radius
    inner_tol = quad_tol / (4.0 * r)

    def chord(x):
        s2 = r * r - (x - cx) ** 2
        return (cy - np.sqrt(s2), cy + np.sqrt(s2)) if s2 > 0 else (cy, cy)

    def pieces(x):
        lo, hi = chord(x)
        if hi <= lo:
            return []
        cuts = [lo] + (_roots_on(lambda y: g(x, y), lo, hi) if gfn else []) + [hi]
        out = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            side = 1 if gfn is None or g(x, 0.5 * (a + b)) > 0 else -1
            out.append((a, b, side))
        return out

    def signature(x):
        return tuple(p[2] for p in pieces(x))

    # outer breakpoints where the chord pattern changes (gamma tangent to chords, vertical pieces)
    breaks = []
    if gfn is not None:
        xs = np.linspace(cx - r, cx + r, 257)[1:-1]
        sigs = [signature(x) for x in xs]
        for i in range(len(xs) - 1):
            if sigs[i] != sigs[i + 1]:
                a, b = xs[i], xs[i + 1]
                sa = sigs[i]
                while b - a > 1e-13 * max(1.0, abs(a)):
                    m = 0.5 * (a + b)
                    if signature(m) == sa:
                        a = m
                    else:
                        b = m
                breaks.append(0.5 * (a + b))

    def outer(x):
        total = 0.0
        for a, b, s in pieces(x):
            val, _ = integrate.quad(integrand, a, b, args=(x, s), epsabs=inner_tol, epsrel=0.0, limit=200)
            total += val
        return total

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(outer, cx - r, cx + r, points=breaks or None,
                                      epsabs=quad_tol / 2, epsrel=0.0, limit=400)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature did not converge: {exc}") from None
    return float(val)


def random_bumps(n: int, box=((-1.0, 1.0), (-1.0, 1.0)), radius=(0.2, 0.8), seed: int = 42) -> list[BumpTest]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        c = (rng.uniform(*box[0]), rng.uniform(*box[1]))
        out.append(BumpTest(c, float(rng.uniform(*radius))))
    return out


def curve_samples(gamma: Expr, vars=("x", "y"), box=((-1.0, 1.0), (-1.0, 1.0)), samples: int = 200,
                  params: Mapping[str, float] | None = None) -> np.ndarray:
    """Points on gamma = 0 inside the box, found along horizontal and vertical lines."""
    fn = E.compile_numeric(E.as_expr(gamma))
    pv = dict(params or {})
    xn, yn = vars
    pts = []
    k = max(4, samples // 2)
    for x in np.linspace(*box[0], k):
        pts += [(x, y) for y in _roots_on(lambda y: float(fn({**pv, xn: x, yn: y})), *box[1])]
    for y in np.linspace(*box[1], k):
        pts += [(x, y) for x in _roots_on(lambda x: float(fn({**pv, xn: x, yn: y})), *box[0])]
    return np.array(pts[: 4 * samples]) if pts else np.zeros((0, 2))


def _divides(gamma: Expr, L: Expr, gens) -> bool:
    if not (E.is_polynomial(gamma) and E.is_polynomial(L)):
        return False
    g = E.to_poly(gamma, gens)
    if g.is_constant():
        return False
    _, rem = E.to_poly(L, gens).divmod(g)
    return rem.is_zero()


def invariant_curve_check(F: VectorField | PiecewiseField, gamma, samples: int = 200,
                          box=((-1.0, 1.0), (-1.0, 1.0)), params: Mapping[str, float] | None = None,
                          tol: float = 1e-10, seed: int = 42) -> bool:
    """True when every side field is tangent to gamma = 0 (symbolic divisibility, else sampled)."""
    fields = [F.plus, F.minus] if isinstance(F, PiecewiseField) else [F]
    vars_ = tuple(fields[0].vars)
    params_all = tuple(dict.fromkeys(p for Y in fields for p in Y.params))
    gamma = E.parse(gamma, vars_, params_all) if isinstance(gamma, str) else E.as_expr(gamma)
    params_all += tuple(sorted(E.free_params(gamma) - set(params_all)))
    gens = vars_ + params_all
    Ls = [lie_derivative(Y, gamma) for Y in fields]
    if all(E.zero_test(L) is E.Verdict.TRUE or _divides(gamma, L, gens) for L in Ls):
        return True
    pv = dict(params or {})
    rng = np.random.default_rng(seed)
    for p in params_all:
        pv.setdefault(p, float(rng.uniform(0.5, 1.5)))
    pts = curve_samples(gamma, vars_, box, samples, pv)
    if len(pts) == 0:
        raise ValueError("gamma has no sampled points inside the box")
    grads = [E.compile_numeric(E.diff(gamma, v)) for v in vars_]
    fLs = [E.compile_numeric(L) for L in Ls]
    for x, y in pts:
        env = {**pv, vars_[0]: x, vars_[1]: y}
        gnorm = float(np.hypot(*(float(f(env)) for f in grads)))
        if gnorm < 1e-12:
            raise ValueError(f"degenerate gradient of gamma at ({x}, {y})")
        for fL in fLs:
            if abs(float(fL(env))) > tol * max(1.0, gnorm):
                return False
    return True
