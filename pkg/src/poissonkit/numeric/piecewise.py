"""Piecewise fields and functions switched across a curve g = 0, and bump test functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .. import expr as E
from ..expr import Expr
from ..fields import VectorField

__all__ = ["PiecewiseField", "PiecewiseExpr", "BumpTest"]


@dataclass(frozen=True)
class PiecewiseField:
    """``plus`` where gamma > 0, ``minus`` where gamma < 0."""

    gamma: Expr
    plus: VectorField
    minus: VectorField

    def __post_init__(self):
        object.__setattr__(self, "gamma", E.as_expr(self.gamma))
        if tuple(self.plus.vars) != tuple(self.minus.vars):
            raise ValueError("both sides must use the same state variables")
        stray = E.free_vars(self.gamma) - set(self.plus.vars)
        if stray:
            raise ValueError(f"gamma uses unknown variables {sorted(stray)}")

    @property
    def vars(self):
        return self.plus.vars

    @property
    def params(self):
        return tuple(dict.fromkeys(tuple(self.plus.params) + tuple(self.minus.params)))

    def side_field(self, side: int) -> VectorField:
        return self.plus if side > 0 else self.minus

    def gamma_numeric(self, params: Mapping[str, float] | None = None):
        fn = E.compile_numeric(self.gamma)
        pv, names = dict(params or {}), self.vars

        def g(x):
            return float(fn({**pv, **{n: x[i] for i, n in enumerate(names)}}))
        return g

    def gamma_gradient_numeric(self, params: Mapping[str, float] | None = None):
        fns = [E.compile_numeric(E.diff(self.gamma, v)) for v in self.vars]
        pv, names = dict(params or {}), self.vars

        def dg(x):
            env = {**pv, **{n: x[i] for i, n in enumerate(names)}}
            return np.array([float(f(env)) for f in fns])
        return dg


@dataclass(frozen=True)
class PiecewiseExpr:
    """``plus`` where gamma > 0, ``minus`` where gamma < 0; may jump across gamma."""

    gamma: Expr
    plus: Expr
    minus: Expr

    def __post_init__(self):
        for k in ("gamma", "plus", "minus"):
            object.__setattr__(self, k, E.as_expr(getattr(self, k)))

    @classmethod
    def smooth(cls, e, gamma=0) -> "PiecewiseExpr":
        e = E.as_expr(e)
        return cls(E.as_expr(gamma), e, e)

    def side(self, sign: int) -> Expr:
        return self.plus if sign > 0 else self.minus


@dataclass(frozen=True)
class BumpTest:
    """phi(p) = exp(-1/(1 - rho^2)) with rho = |p - center|/radius, zero for rho >= 1."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise ValueError("bump radius must be positive")

    def _u(self, x, y):
        return ((x - self.center[0]) ** 2 + (y - self.center[1]) ** 2) / self.radius ** 2

    def value(self, x, y):
        u = np.asarray(self._u(x, y), dtype=float)
        out = np.zeros_like(u)
        m = u < 1
        out[m] = np.exp(-1.0 / (1.0 - u[m]))
        return out if out.ndim else float(out)

    def grad(self, x, y):
        u = np.asarray(self._u(x, y), dtype=float)
        phi = np.asarray(self.value(x, y), dtype=float)
        w = np.zeros_like(u)
        m = u < 1
        w[m] = -phi[m] / (1.0 - u[m]) ** 2 * 2.0 / self.radius ** 2
        gx = w * (np.asarray(x) - self.center[0])
        gy = w * (np.asarray(y) - self.center[1])
        if gx.ndim == 0:
            return float(gx), float(gy)
        return gx, gy

    def value_grad(self, x: float, y: float) -> tuple[float, float, float]:
        """Scalar (phi, dphi/dx, dphi/dy)."""
        dx, dy = x - self.center[0], y - self.center[1]
        r2 = self.radius * self.radius
        u = (dx * dx + dy * dy) / r2
        if u >= 1.0:
            return 0.0, 0.0, 0.0
        ph = math.exp(-1.0 / (1.0 - u))
        w = -2.0 * ph / ((1.0 - u) ** 2 * r2)
        return ph, w * dx, w * dy

    def straddles(self, gamma_fn) -> bool:
        """True when gamma changes sign on the support (sampled)."""
        ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        rad = np.linspace(0, self.radius * 0.999, 16)
        A, R = np.meshgrid(ang, rad)
        vals = gamma_fn(self.center[0] + R * np.cos(A), self.center[1] + R * np.sin(A))
        return bool(np.nanmin(vals) < 0 < np.nanmax(vals))
