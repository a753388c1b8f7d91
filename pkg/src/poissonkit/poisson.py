"""Poisson structures: cross-product form in 3D, planar form from a multiplier,
Hamiltonian reconstruction by line integral and multiplier-sign partitions."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import integrate, ndimage, optimize

from . import expr as E
from .expr import Expr, Verdict, zero_test
from .fields import VectorField, numeric_check

__all__ = [
    "StructureMatrix", "PoissonCertificate", "DomainPartition", "Region", "PathError", "ClosednessError",
    "cross_product_field", "structure_matrix_3d", "verify_poisson", "planar_structure_from_multiplier",
    "hamiltonian_line_integral", "partition_domain", "functionally_independent", "default_path",
]


@dataclass(frozen=True)
class StructureMatrix:
    vars: tuple[str, ...]
    entries: tuple[tuple[Expr, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(E.as_expr(x) for x in row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        object.__setattr__(self, "vars", tuple(self.vars))
        n = len(self.vars)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ValueError(f"structure matrix must be {n}x{n}")

    @property
    def n(self) -> int:
        return len(self.vars)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def apply_gradient(self, H) -> list[Expr]:
        """J·∇H."""
        grad = [E.diff(E.as_expr(H), x) for x in self.vars]
        return [E.add(*(E.mul(J, g) for J, g in zip(row, grad))) for row in self.entries]

    def scale(self, factor) -> "StructureMatrix":
        f = E.as_expr(factor)
        return StructureMatrix(self.vars, tuple(tuple(E.mul(f, x) for x in r) for r in self.entries))

    def antisymmetry(self) -> Verdict:
        v = Verdict.TRUE
        for i in range(self.n):
            for j in range(i, self.n):
                v = v & zero_test(E.add(self.entries[i][j], self.entries[j][i]))
                if v is Verdict.FALSE:
                    return v
        return v

    def jacobi_expressions(self) -> list[Expr]:
        J, xs, n = self.entries, self.vars, self.n
        dJ = {}

        def d(l, a, b):
            key = (l, a, b)
            if key not in dJ:
                dJ[key] = E.diff(J[a][b], xs[l])
            return dJ[key]

        out = []
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    terms = []
                    for l in range(n):
                        terms.append(E.mul(J[l][i], d(l, j, k)))
                        terms.append(E.mul(J[l][j], d(l, k, i)))
                        terms.append(E.mul(J[l][k], d(l, i, j)))
                    out.append(E.add(*terms))
        return out

    def jacobi(self) -> Verdict:
        v = Verdict.TRUE
        for e in self.jacobi_expressions():
            v = v & zero_test(e)
            if v is Verdict.FALSE:
                break
        return v

    def __str__(self):
        return "[" + "; ".join(", ".join(str(x) for x in r) for r in self.entries) + "]"


@dataclass(frozen=True)
class PoissonCertificate:
    J: StructureMatrix
    H: Expr
    casimirs: tuple[Expr, ...]
    checks: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return all(v is Verdict.TRUE for v in self.checks.values())

    def summary(self) -> dict[str, str]:
        return {k: str(v) for k, v in self.checks.items()}


def _need3(vars):
    if len(vars) != 3:
        raise ValueError(f"cross-product constructions need 3 state variables, got {len(vars)}")


def _params_of(*exprs):
    ps = set()
    for e in exprs:
        ps |= E.free_params(E.as_expr(e))
    return tuple(sorted(ps))


def cross_product_field(H1, H2, eta, vars=("x1", "x2", "x3"), params: Sequence[str] | None = None) -> VectorField:
    """η·(∇H2 × ∇H1)."""
    _need3(vars)
    H1, H2, eta = E.as_expr(H1), E.as_expr(H2), E.as_expr(eta)
    g1 = [E.diff(H1, x) for x in vars]
    g2 = [E.diff(H2, x) for x in vars]
    cross = [
        E.sub(E.mul(g2[1], g1[2]), E.mul(g2[2], g1[1])),
        E.sub(E.mul(g2[2], g1[0]), E.mul(g2[0], g1[2])),
        E.sub(E.mul(g2[0], g1[1]), E.mul(g2[1], g1[0])),
    ]
    params = _params_of(H1, H2, eta) if params is None else tuple(params)
    return VectorField(tuple(vars), params, tuple(E.mul(eta, c) for c in cross))


def structure_matrix_3d(H2, eta, vars=("x1", "x2", "x3")) -> StructureMatrix:
    """J with J·∇H1 = η·(∇H2 × ∇H1) for every H1; H2 is a Casimir."""
    _need3(vars)
    H2, eta = E.as_expr(H2), E.as_expr(eta)
    d1, d2, d3 = (E.mul(eta, E.diff(H2, x)) for x in vars)
    z = E.Const(0)
    rows = (
        (z, E.neg(d3), d2),
        (d3, z, E.neg(d1)),
        (E.neg(d2), d1, z),
    )
    return StructureMatrix(tuple(vars), rows)


def verify_poisson(J: StructureMatrix, H, Y: VectorField, casimirs: Sequence = ()) -> PoissonCertificate:
    """Antisymmetry, Jacobi identity, J∇H = Y and J∇C = 0 for each Casimir C."""
    if tuple(J.vars) != tuple(Y.vars):
        raise ValueError("structure matrix and field use different variables")
    H = E.as_expr(H)
    checks = {"antisymmetry": J.antisymmetry(), "jacobi": J.jacobi()}
    match = Verdict.TRUE
    for lhs, rhs in zip(J.apply_gradient(H), Y.components):
        match = match & zero_test(E.sub(lhs, rhs))
        if match is Verdict.FALSE:
            break
    checks["field-match"] = match
    cas = Verdict.TRUE
    cs = tuple(E.as_expr(c) for c in casimirs)
    for C in cs:
        for comp in J.apply_gradient(C):
            cas = cas & zero_test(comp)
    checks["casimir-annihilation"] = cas
    return PoissonCertificate(J, H, cs, checks)


def planar_structure_from_multiplier(V, vars=("x1", "x2")) -> StructureMatrix:
    """V·[[0, 1], [-1, 0]]."""
    V = E.as_expr(V)
    if len(vars) != 2:
        raise ValueError("planar structure needs 2 state variables")
    if zero_test(V) is Verdict.TRUE:
        raise ValueError("V vanishes identically")
    return StructureMatrix(tuple(vars), ((E.Const(0), V), (E.neg(V), E.Const(0))))


def functionally_independent(H1, H2, vars, params: Mapping[str, float] | None = None,
                             points: int = 50, seed: int = 42, box=(0.1, 2.0)) -> bool:
    """Rank of [∇H1; ∇H2] equals 2 at every valid random sample point."""
    rng = np.random.default_rng(seed)
    grads = [[E.compile_numeric(E.diff(E.as_expr(H), x)) for x in vars] for H in (H1, H2)]
    env = dict(params or {})
    for v in vars:
        env[v] = rng.uniform(box[0], box[1], points)
    with np.errstate(all="ignore"):
        M = np.array([[np.broadcast_to(g(env), (points,)) for g in row] for row in grads])
    M = np.moveaxis(M, -1, 0)
    ok = np.all(np.isfinite(M), axis=(1, 2))
    if not ok.any():
        return False
    ranks = [np.linalg.matrix_rank(m, tol=1e-9 * max(1.0, np.abs(m).max())) for m in M[ok]]
    return all(r == 2 for r in ranks)


# -- line integral ---------------------------------------------------------------

class ClosednessError(ValueError):
    """div(Y/V) does not vanish, so the line integral depends on the path."""


class PathError(ValueError):
    """No admissible path avoiding the zero set of V was found."""


def default_path(base, target):
    """Axis-parallel polyline base -> (target_x, base_y) -> target."""
    b, t = tuple(map(float, base)), tuple(map(float, target))
    corner = (t[0], b[1])
    pts = [b]
    for p in (corner, t):
        if p != pts[-1]:
            pts.append(p)
    return pts


def _path_ok(Vf, path, sign, thr, samples=400):
    for p, q in zip(path[:-1], path[1:]):
        s = np.linspace(0.0, 1.0, samples)
        x = p[0] + s * (q[0] - p[0])
        y = p[1] + s * (q[1] - p[1])
        v = Vf(x, y)
        if not np.all(np.isfinite(v)) or np.any(np.sign(v) != sign) or np.any(np.abs(v) < thr):
            return False
    return True


def _grid_path(Vf, base, target, sign, thr, box, n=121):
    (x0, x1), (y0, y1) = box
    xs, ys = np.linspace(x0, x1, n), np.linspace(y0, y1, n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    with np.errstate(all="ignore"):
        vals = Vf(X, Y)
    good = np.isfinite(vals) & (np.sign(vals) == sign) & (np.abs(vals) >= thr)

    def nearest(p):
        i = int(np.clip(np.rint((p[0] - x0) / (x1 - x0) * (n - 1)), 0, n - 1))
        j = int(np.clip(np.rint((p[1] - y0) / (y1 - y0) * (n - 1)), 0, n - 1))
        return i, j

    start, goal = nearest(base), nearest(target)
    if not (good[start] and good[goal]):
        return None
    prev = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            break
        i, j = cur
        for nb in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if 0 <= nb[0] < n and 0 <= nb[1] < n and good[nb] and nb not in prev:
                prev[nb] = cur
                queue.append(nb)
    if goal not in prev:
        return None
    cells = []
    cur = goal
    while cur is not None:
        cells.append(cur)
        cur = prev[cur]
    cells.reverse()
    pts = [(xs[i], ys[j]) for i, j in cells]
    # drop interior points on straight runs
    simple = [pts[0]]
    for k in range(1, len(pts) - 1):
        a, b, c = simple[-1], pts[k], pts[k + 1]
        if not ((a[0] == b[0] == c[0]) or (a[1] == b[1] == c[1])):
            simple.append(b)
    simple.append(pts[-1])
    b, t = tuple(map(float, base)), tuple(map(float, target))
    head = default_path(b, simple[0])
    tail = default_path(simple[-1], t)
    path = head + [tuple(map(float, p)) for p in simple[1:-1]] + tail[0:]
    out = [path[0]]
    for p in path[1:]:
        if p != out[-1]:
            out.append(p)
    return out


def hamiltonian_line_integral(Y: VectorField, V, base, target, tol: float = 1e-10,
                              params: Mapping[str, float] | None = None, path=None,
                              box=None, eps: float = 1e-6) -> float:
    """∫ (P dx2 - Q dx1)/V along an admissible axis-parallel polyline from base to target."""
    if Y.dim != 2:
        raise ValueError("line-integral Hamiltonians need a planar field")
    V = E.as_expr(V)
    P, Q = Y.components
    x, y = Y.vars
    closed = E.add(E.diff(E.div(P, V), x), E.diff(E.div(Q, V), y))
    verdict = zero_test(closed)
    if verdict is Verdict.FALSE:
        raise ClosednessError("div(Y/V) does not vanish identically")
    if verdict is Verdict.INCONCLUSIVE and not numeric_check(closed)[0]:
        raise ClosednessError("div(Y/V) could not be certified to vanish")

    pv = dict(params or {})
    fP, fQ, fV = (E.compile_numeric(e) for e in (P, Q, V))

    def Vf(a, b):
        return np.asarray(fV({**pv, x: a, y: b}), dtype=float) * np.ones_like(np.asarray(a, dtype=float))

    base = tuple(map(float, base))
    target = tuple(map(float, target))
    v0, v1 = float(Vf(*base)), float(Vf(*target))
    if v0 == 0 or v1 == 0 or np.sign(v0) != np.sign(v1):
        raise PathError("base and target lie in different sign regions of V")
    sign = np.sign(v0)
    if box is None:
        lo = np.minimum(base, target)
        hi = np.maximum(base, target)
        pad = 0.5 * (hi - lo).max() + 0.5
        box = ((lo[0] - pad, hi[0] + pad), (lo[1] - pad, hi[1] + pad))
    gx = np.linspace(box[0][0], box[0][1], 64)
    gy = np.linspace(box[1][0], box[1][1], 64)
    with np.errstate(all="ignore"):
        scale = np.nanmax(np.abs(Vf(*np.meshgrid(gx, gy, indexing="ij"))))
    thr = eps * max(1.0, float(scale))
    if path is None:
        path = default_path(base, target)
        if not _path_ok(Vf, path, sign, thr):
            path = _grid_path(Vf, base, target, sign, thr, box)
            if path is None or not _path_ok(Vf, path, sign, thr):
                raise PathError("no admissible path avoiding the zero set of V")
    else:
        path = [tuple(map(float, p)) for p in path]
        if path[0] != base or path[-1] != target:
            raise PathError("custom path must start at base and end at target")
        if not _path_ok(Vf, path, sign, thr):
            raise PathError("custom path crosses or approaches the zero set of V")

    total = 0.0
    nseg = max(1, len(path) - 1)
    for p, q in zip(path[:-1], path[1:]):
        dx, dy = q[0] - p[0], q[1] - p[1]

        def f(s, p=p, dx=dx, dy=dy):
            env = {**pv, x: p[0] + s * dx, y: p[1] + s * dy}
            return (float(fP(env)) * dy - float(fQ(env)) * dx) / float(fV(env))

        val, err = integrate.quad(f, 0.0, 1.0, epsabs=tol / nseg, epsrel=0.0, limit=500)
        total += val
    return total


# -- partition ----------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    label: int
    sign: int
    cells: int
    sample: tuple[float, float]


@dataclass(frozen=True)
class DomainPartition:
    V: Expr
    box: tuple[tuple[float, float], tuple[float, float]]
    grid: int
    labels: np.ndarray = field(repr=False, compare=False)
    regions: tuple[Region, ...]
    factors: tuple[tuple[str, int], ...]
    isolated_zeros: tuple[tuple[float, float], ...]

    def region_of(self, point) -> int:
        (x0, x1), (y0, y1) = self.box
        i = int(np.clip(np.rint((point[0] - x0) / (x1 - x0) * (self.grid - 1)), 0, self.grid - 1))
        j = int(np.clip(np.rint((point[1] - y0) / (y1 - y0) * (self.grid - 1)), 0, self.grid - 1))
        return int(self.labels[i, j])


def _factor(V: Expr, vars):
    """Rational factorization of a polynomial V via sympy; empty when V is not polynomial."""
    if not E.is_polynomial(V):
        return ()
    import sympy
    syms = {n: sympy.Symbol(n) for n in list(vars) + sorted(E.free_params(V))}
    text = E.to_string(V).replace("^", "**")
    poly = sympy.sympify(text, locals=syms)
    _, facs = sympy.factor_list(poly)
    return tuple((str(f).replace("**", "^"), int(m)) for f, m in facs)


def partition_domain(V, box=((-1.0, 1.0), (-1.0, 1.0)), grid: int = 200, vars=("x1", "x2"),
                     params: Mapping[str, float] | None = None) -> DomainPartition:
    """Sign regions of V on a grid (flood fill) plus factors and isolated zeros."""
    V = E.as_expr(V)
    fV = E.compile_numeric(V)
    pv = dict(params or {})
    (x0, x1), (y0, y1) = box
    xs, ys = np.linspace(x0, x1, grid), np.linspace(y0, y1, grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    with np.errstate(all="ignore"):
        vals = np.asarray(fV({**pv, vars[0]: X, vars[1]: Y}), dtype=float) * np.ones_like(X)
    scale = max(1.0, float(np.nanmax(np.abs(vals))))
    thr = 1e-12 * scale
    labels = np.zeros(vals.shape, dtype=int)
    regions = []
    next_label = 1
    for sgn in (1, -1):
        mask = np.isfinite(vals) & (sgn * vals > thr)
        lab, count = ndimage.label(mask)
        for k in range(1, count + 1):
            cells = lab == k
            labels[cells] = next_label
            idx = np.argwhere(cells)[len(np.argwhere(cells)) // 2]
            regions.append(Region(next_label, sgn, int(cells.sum()), (float(xs[idx[0]]), float(ys[idx[1]]))))
            next_label += 1

    # isolated zeros: local minima of |V| near zero with one strict sign on a small circle
    absval = np.where(np.isfinite(vals), np.abs(vals), np.inf)
    local_min = ndimage.minimum_filter(absval, size=3) == absval
    cand = np.argwhere(local_min & (absval < 1e-3 * scale))
    h = max((x1 - x0), (y1 - y0)) / (grid - 1)
    found: list[tuple[float, float]] = []
    f2 = lambda p: float(fV({**pv, vars[0]: p[0], vars[1]: p[1]})) ** 2
    for i, j in cand[:200]:
        res = optimize.minimize(f2, x0=[xs[i], ys[j]], method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-30, "maxiter": 2000})
        p = res.x
        if abs(float(fV({**pv, vars[0]: p[0], vars[1]: p[1]}))) > 1e-10 * scale:
            continue
        ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        ring = np.asarray(fV({**pv, vars[0]: p[0] + 2 * h * np.cos(ang), vars[1]: p[1] + 2 * h * np.sin(ang)}))
        if np.all(ring > 0) or np.all(ring < 0):
            if all(np.hypot(p[0] - q[0], p[1] - q[1]) > 2 * h for q in found):
                found.append((float(p[0]), float(p[1])))
    return DomainPartition(V, ((float(x0), float(x1)), (float(y0), float(y1))), grid, labels,
                           tuple(regions), _factor(V, vars), tuple(found))
