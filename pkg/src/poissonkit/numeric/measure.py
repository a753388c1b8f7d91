"""Monte-Carlo check that the measure dx/V is transported by the flow (Liouville form)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .. import expr as E
from ..fields import VectorField, divergence
from .ode import IntegrationError, integrate_batch

__all__ = ["Box", "Annulus", "MeasureReport", "EscapeError", "measure_preservation_check", "DEFAULT_SEED"]

DEFAULT_SEED = 42


class EscapeError(IntegrationError):
    """A sampled trajectory left the guard box."""


@dataclass(frozen=True)
class Box:
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "bounds", tuple((float(a), float(b)) for a, b in self.bounds))

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def volume(self) -> float:
        return float(np.prod([b - a for a, b in self.bounds]))

    def sample(self, rng, n):
        return np.array([rng.uniform(a, b, n) for a, b in self.bounds])

    def guard(self, factor=10.0):
        lo = np.array([a for a, _ in self.bounds])
        hi = np.array([b for _, b in self.bounds])
        mid, half = (lo + hi) / 2, (hi - lo) / 2 * factor + 1.0
        return mid - half, mid + half


@dataclass(frozen=True)
class Annulus:
    """Planar annulus r_in < |x - center| < r_out."""

    center: tuple[float, float]
    r_in: float
    r_out: float

    dim = 2

    @property
    def volume(self) -> float:
        return float(np.pi * (self.r_out ** 2 - self.r_in ** 2))

    def sample(self, rng, n):
        r = np.sqrt(rng.uniform(self.r_in ** 2, self.r_out ** 2, n))
        a = rng.uniform(0, 2 * np.pi, n)
        return np.array([self.center[0] + r * np.cos(a), self.center[1] + r * np.sin(a)])

    def guard(self, factor=10.0):
        c = np.array(self.center, dtype=float)
        return c - factor * self.r_out - 1.0, c + factor * self.r_out + 1.0


@dataclass(frozen=True)
class MeasureReport:
    drift: float
    initial: float
    transported: float
    samples: int
    seed: int
    t: float
    tol: float

    def passed(self, threshold: float) -> bool:
        return self.drift <= threshold


def _region(region):
    if isinstance(region, (Box, Annulus)):
        return region
    return Box(tuple(region))


def measure_preservation_check(Y: VectorField, V, region, t: float = 1.0, samples: int = 10_000,
                               tol: float = 1e-10, seed: int = DEFAULT_SEED,
                               params: Mapping[str, float] | None = None,
                               guard: Sequence | None = None) -> MeasureReport:
    """Relative drift |I_t - I_0| / I_0 of the integral of 1/V over the region and its image."""
    region = _region(region)
    if region.dim != Y.dim:
        raise ValueError(f"region has dimension {region.dim}, field has {Y.dim}")
    V = E.as_expr(V)
    pv = dict(params or {})
    rng = np.random.default_rng(seed)
    X0 = region.sample(rng, samples)
    fV = E.compile_numeric(V)
    fdiv = E.compile_numeric(divergence(Y))
    rhs = Y.numeric(pv)
    names = Y.vars

    def env(X):
        return {**pv, **{n: X[i] for i, n in enumerate(names)}}

    with np.errstate(all="ignore"):
        V0 = np.broadcast_to(np.asarray(fV(env(X0)), dtype=float), (samples,))
    if not np.all(np.isfinite(V0)) or np.any(V0 <= 0):
        raise ValueError("V must be finite and positive on the sampled region")
    I0 = region.volume * float(np.mean(1.0 / V0))
    if t == 0:
        return MeasureReport(0.0, I0, I0, samples, seed, 0.0, tol)

    lo, hi = (np.asarray(g, dtype=float) for g in (guard if guard is not None else region.guard()))
    n = Y.dim

    def aug(Z):
        X = Z[:n]
        dX = rhs(X)
        d = np.broadcast_to(np.asarray(fdiv(env(X)), dtype=float), X.shape[1:])
        return np.concatenate([dX, d[None, :]], axis=0)

    def check(Z):
        X = Z[:n]
        if np.any(X < lo[:, None]) or np.any(X > hi[:, None]) or not np.all(np.isfinite(Z)):
            raise EscapeError("a sampled trajectory left the guard box")

    Z0 = np.concatenate([X0, np.zeros((1, samples))], axis=0)
    Zt = integrate_batch(aug, Z0, t, tol, guard=check)
    Xt, S = Zt[:n], Zt[n]
    with np.errstate(all="ignore"):
        Vt = np.broadcast_to(np.asarray(fV(env(Xt)), dtype=float), (samples,))
    It = region.volume * float(np.mean(np.exp(S) / Vt))
    return MeasureReport(abs(It - I0) / abs(I0), I0, It, samples, seed, float(t), tol)
