"""Vector-field calculus and multiplier certification."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import expr as E
from .expr import Expr, Verdict, zero_test

__all__ = [
    "VectorField", "Diffeo", "SingularityInfo", "NoClosedFormInverse",
    "lie_derivative", "divergence", "is_first_integral", "is_inverse_jacobi_multiplier",
    "is_divergence_free", "transform_multiplier", "pushforward", "pullback",
    "classify_singularity", "numeric_check", "det", "inverse_matrix",
]


@dataclass(frozen=True)
class VectorField:
    """Components over ordered state variables; parameters are free symbols."""

    vars: tuple[str, ...]
    params: tuple[str, ...]
    components: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "params", tuple(self.params))
        comps = tuple(E.as_expr(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) != len(self.vars):
            raise ValueError(f"{len(comps)} components for {len(self.vars)} variables")
        declared_v, declared_p = set(self.vars), set(self.params)
        for c in comps:
            extra = (E.free_vars(c) - declared_v) | (E.free_params(c) - declared_p)
            if extra:
                raise ValueError(f"component {c} uses undeclared symbols {sorted(extra)}")

    @classmethod
    def parse(cls, components: Sequence[str], vars: Sequence[str], params: Sequence[str] = ()):
        return cls(tuple(vars), tuple(params), tuple(E.parse(c, vars, params) for c in components))

    @property
    def dim(self) -> int:
        return len(self.vars)

    def expr(self, text: str) -> Expr:
        """Parse an expression in this field's variables and parameters."""
        return E.parse(text, self.vars, self.params)

    def subs(self, mapping: Mapping[str, object]) -> "VectorField":
        """Substitute parameters (or variables) and drop substituted parameters."""
        mapping = {k: E.as_expr(v) for k, v in mapping.items()}
        comps = tuple(E.subs(c, mapping) for c in self.components)
        params = [p for p in self.params if p not in mapping]
        for v in mapping.values():
            for p in sorted(E.free_params(v)):
                if p not in params:
                    params.append(p)
        return VectorField(self.vars, tuple(params), comps)

    def scale(self, factor) -> "VectorField":
        f = E.as_expr(factor)
        return VectorField(self.vars, self.params, tuple(E.mul(f, c) for c in self.components))

    def numeric(self, params: Mapping[str, float] | None = None):
        """Vectorized right-hand side ``f(X) -> dX`` for X of shape (n, ...)."""
        fns = [E.compile_numeric(c) for c in self.components]
        pvals = dict(params or {})
        missing = set(self.params) - set(pvals)
        if missing:
            raise KeyError(f"no numeric value for parameters {sorted(missing)}")
        names = self.vars

        def rhs(X):
            env = dict(pvals)
            for i, nm in enumerate(names):
                env[nm] = X[i]
            return np.array([np.broadcast_to(f(env), np.shape(X[0])) for f in fns], dtype=float)

        return rhs

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"


def lie_derivative(Y: VectorField, f) -> Expr:
    f = E.as_expr(f)
    return E.add(*(E.mul(c, E.diff(f, x)) for c, x in zip(Y.components, Y.vars)))


def divergence(Y: VectorField) -> Expr:
    return E.add(*(E.diff(c, x) for c, x in zip(Y.components, Y.vars)))


def is_first_integral(Y: VectorField, f) -> Verdict:
    return zero_test(lie_derivative(Y, f))


def multiplier_residual(Y: VectorField, V) -> Expr:
    V = E.as_expr(V)
    return E.sub(lie_derivative(Y, V), E.mul(V, divergence(Y)))


def is_inverse_jacobi_multiplier(Y: VectorField, V) -> Verdict:
    V = E.as_expr(V)
    if zero_test(V) is Verdict.TRUE:
        raise ValueError("the zero function is not an inverse Jacobi multiplier")
    return zero_test(multiplier_residual(Y, V))


def is_divergence_free(Y: VectorField) -> Verdict:
    direct = zero_test(divergence(Y))
    via_multiplier = is_inverse_jacobi_multiplier(Y, 1)
    if Verdict.INCONCLUSIVE not in (direct, via_multiplier) and direct is not via_multiplier:
        raise RuntimeError("divergence and constant-multiplier checks disagree")
    return direct & via_multiplier


def numeric_check(e: Expr, points: int = 200, tol: float = 1e-9, seed: int = 42,
                  ranges: Mapping[str, tuple[float, float]] | None = None) -> tuple[bool, int]:
    """Sample ``e`` at random points; (all |e| <= tol*scale, number of valid points)."""
    from .expr.normal import _magnitude_fn
    rng = np.random.default_rng(seed)
    names = sorted(E.free_vars(e)) + sorted(E.free_params(e))
    env = {}
    for nm in names:
        lo, hi = (ranges or {}).get(nm, (0.1, 2.0))
        env[nm] = rng.uniform(lo, hi, points)
    with np.errstate(all="ignore"):
        val, mag = _magnitude_fn(e)(env)
    val = np.broadcast_to(np.asarray(val, dtype=float), (points,))
    mag = np.broadcast_to(np.asarray(mag, dtype=float), (points,))
    ok = np.isfinite(val) & np.isfinite(mag)
    n = int(ok.sum())
    if n == 0:
        return False, 0
    return bool(np.all(np.abs(val[ok]) <= tol * np.maximum(1.0, mag[ok]))), n


# -- matrices --------------------------------------------------------------------

def det(M: Sequence[Sequence[Expr]]) -> Expr:
    n = len(M)
    if n == 1:
        return E.as_expr(M[0][0])
    if n == 2:
        return E.sub(E.mul(M[0][0], M[1][1]), E.mul(M[0][1], M[1][0]))
    terms = []
    for j in range(n):
        if M[0][j] == E.Const(0):
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        t = E.mul(M[0][j], det(minor))
        terms.append(t if j % 2 == 0 else E.neg(t))
    return E.add(*terms)


def inverse_matrix(M: Sequence[Sequence[Expr]]):
    """Adjugate over determinant."""
    n = len(M)
    d = det(M)
    if n == 1:
        return [[E.div(1, d)]]
    inv = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(M) if k != i]
            c = det(minor)
            if (i + j) % 2:
                c = E.neg(c)
            inv[j][i] = E.div(c, d)
    return inv


# -- diffeomorphisms ---------------------------------------------------------------

class NoClosedFormInverse(ValueError):
    """The map is not affine or triangular in any variable order."""


@dataclass(frozen=True)
class Diffeo:
    """Map x -> targets(x) in the coordinates ``vars`` (images use the same names)."""

    vars: tuple[str, ...]
    targets: tuple[Expr, ...]
    domain_note: str = "caller asserts a nonvanishing Jacobian"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "targets", tuple(E.as_expr(t) for t in self.targets))
        if len(self.targets) != len(self.vars):
            raise ValueError("a diffeomorphism needs one target per variable")

    @classmethod
    def identity(cls, vars):
        return cls(tuple(vars), tuple(E.Var(v) for v in vars))

    def jacobian(self):
        if "jac" not in self._cache:
            self._cache["jac"] = [[E.diff(t, x) for x in self.vars] for t in self.targets]
        return self._cache["jac"]

    @property
    def jacobian_det(self) -> Expr:
        if "det" not in self._cache:
            self._cache["det"] = det(self.jacobian())
        return self._cache["det"]

    def compose_into(self, e: Expr) -> Expr:
        """e∘Φ."""
        return E.subs(e, dict(zip(self.vars, self.targets)))

    def inverse(self) -> "Diffeo":
        """Closed-form inverse of a map that is triangular (affine in each new variable)."""
        if "inv" in self._cache:
            return self._cache["inv"]
        n = len(self.vars)
        for order in itertools.permutations(range(n)):
            inv = self._triangular_inverse(order)
            if inv is not None:
                self._cache["inv"] = inv
                return inv
        raise NoClosedFormInverse("map is not triangular-affine in any variable order")

    def _triangular_inverse(self, order):
        # component k must be a_k * x_{order[k]} + g_k with a_k, g_k depending on earlier x only
        vars_ = self.vars
        used_targets = set()
        solved: dict[str, Expr] = {}
        for k, vi in enumerate(order):
            x = vars_[vi]
            later = {vars_[j] for j in order[k + 1:]}
            pick = None
            for ti, t in enumerate(self.targets):
                if ti in used_targets:
                    continue
                if E.free_vars(t) & later:
                    if any(zero_test(E.diff(t, y)) is not Verdict.TRUE for y in E.free_vars(t) & later):
                        continue
                a = E.diff(t, x)
                if zero_test(a) is Verdict.TRUE:
                    continue
                if zero_test(E.diff(a, x)) is not Verdict.TRUE:
                    continue
                pick = ti
                break
            if pick is None:
                return None
            used_targets.add(pick)
            t = self.targets[pick]
            a = E.subs(E.diff(t, x), {x: 0})
            g = E.subs(t, {x: 0})
            # zero out later variables that only appear trivially
            zero_later = {y: 0 for y in later}
            a, g = E.subs(a, zero_later), E.subs(g, zero_later)
            earlier = {vars_[j]: solved[vars_[j]] for j in order[:k]}
            y = E.Var(vars_[pick])
            solved[x] = E.div(E.sub(y, E.subs(g, earlier)), E.subs(a, earlier))
        return Diffeo(self.vars, tuple(solved[v] for v in self.vars))


def transform_multiplier(V, phi: Diffeo, eta) -> Expr:
    """η·(V∘Φ)/J_Φ."""
    return E.div(E.mul(eta, phi.compose_into(E.as_expr(V))), phi.jacobian_det)


def pushforward(Y: VectorField, phi: Diffeo, eta=1) -> VectorField:
    """η·(DΦ·Y)∘Φ⁻¹ in the image coordinates (same variable names)."""
    if tuple(phi.vars) != tuple(Y.vars):
        raise ValueError("diffeomorphism and field use different variables")
    inv = phi.inverse()
    back = dict(zip(inv.vars, inv.targets))
    jac = phi.jacobian()
    comps = []
    for row in jac:
        c = E.add(*(E.mul(r, y) for r, y in zip(row, Y.components)))
        comps.append(E.mul(eta, E.subs(c, back)))
    return _with_params(Y, comps)


def pullback(Y: VectorField, phi: Diffeo, eta=1) -> VectorField:
    """η·(DΦ)⁻¹·(Y∘Φ): the field whose multiplier is :func:`transform_multiplier`."""
    inv = inverse_matrix(phi.jacobian())
    moved = [phi.compose_into(c) for c in Y.components]
    comps = [E.mul(eta, E.add(*(E.mul(m, y) for m, y in zip(row, moved)))) for row in inv]
    return _with_params(Y, comps)


def _with_params(Y, comps):
    params = list(Y.params)
    for c in comps:
        for p in sorted(E.free_params(c)):
            if p not in params:
                params.append(p)
    return VectorField(Y.vars, tuple(params), tuple(comps))


# -- singularities ---------------------------------------------------------------

@dataclass(frozen=True)
class SingularityInfo:
    point: tuple[float, ...]
    eigenvalues: tuple[complex, ...]
    classification: str
    omega: float | None = None


def classify_singularity(Y: VectorField, point: Sequence[float], params: Mapping[str, float] | None = None,
                         strict: bool = True, tol: float = 1e-9) -> SingularityInfo:
    """Eigenvalue-based class: zero-hopf, zero-saddle, other (or regular when not strict)."""
    env = dict(params or {})
    env.update(zip(Y.vars, (float(p) for p in point)))
    values = [E.evaluate(c, env) for c in Y.components]
    jac = np.array([[E.evaluate(E.diff(c, x), env) for x in Y.vars] for c in Y.components], dtype=float)
    eig = np.linalg.eigvals(jac)
    eig = tuple(complex(v) for v in sorted(eig, key=lambda z: (abs(z), z.imag)))
    pt = tuple(float(p) for p in point)
    if max(abs(v) for v in values) >= 1e-12:
        if strict:
            raise ValueError(f"field does not vanish at {pt}: {values}")
        return SingularityInfo(pt, eig, "regular")
    if len(eig) == 3:
        zero, rest = eig[0], eig[1:]
        if abs(zero) < tol:
            a, b = rest
            flat = all(abs(z.real) < tol * (1 + abs(z)) for z in rest)
            if flat and abs(a.imag) > tol and abs(a - b.conjugate()) < tol * (1 + abs(a)):
                return SingularityInfo(pt, eig, "zero-hopf", abs(a.imag))
            real = all(abs(z.imag) < tol * (1 + abs(z)) for z in rest)
            if real and abs(a.real) > tol and abs(a.real + b.real) < tol * (1 + abs(a)):
                return SingularityInfo(pt, eig, "zero-saddle")
    return SingularityInfo(pt, eig, "other")
