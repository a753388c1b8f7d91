"""Dormand-Prince 5(4) integration, batched for smooth fields and event-aware
for piecewise fields switched across a curve g = 0."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ..fields import VectorField
from .piecewise import PiecewiseField

__all__ = [
    "Trajectory", "EventRecord", "IntegrationError", "StepSizeUnderflow", "SlidingModeError",
    "TooManyEvents", "integrate", "integrate_batch", "dopri_step",
]

# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_ERR = _B5 - _B4


class IntegrationError(RuntimeError):
    pass


class StepSizeUnderflow(IntegrationError):
    pass


class SlidingModeError(IntegrationError):
    """Both side fields point toward the switching curve; Filippov sliding is not supported."""


class TooManyEvents(IntegrationError):
    """Event count exceeded; chattering or sliding suspected."""


@dataclass(frozen=True)
class EventRecord:
    t: float
    x: np.ndarray
    from_side: int
    to_side: int


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray  # shape (len(t), dim)
    events: list[EventRecord] = field(default_factory=list)
    steps: int = 0
    rejected: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.x[-1]


def dopri_step(f: Callable, t: float, y: np.ndarray, h: float, k0: np.ndarray | None = None):
    """One step; returns (y5, error estimate, last stage) with FSAL last stage = f(t+h, y5)."""
    ks = [f(t, y) if k0 is None else k0]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
        ks.append(f(t + _C[i] * h, yi))
    y5 = y + h * sum(b * k for b, k in zip(_B5, ks) if b != 0.0)
    err = h * sum(e * k for e, k in zip(_ERR, ks) if e != 0.0)
    return y5, err, ks[-1]


def _err_norm(err, y0, y1, tol):
    scale = tol + tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.max(np.abs(err) / scale)) if np.size(err) else 0.0


def _initial_step(f, t, y, tol, direction):
    f0 = f(t, y)
    d0 = np.max(np.abs(y)) + 1e-12
    d1 = np.max(np.abs(f0)) + 1e-12
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-4
    return direction * min(h, 0.1), f0


def _advance(f, t, y, t_end, tol, h, k0, max_steps, on_accept=None, stats=None):
    """Generic adaptive loop; on_accept(t0, y0, t1, y1, h) may return a truncation (t*, y*) to stop."""
    direction = 1.0 if t_end >= t else -1.0
    steps = rejected = 0
    while direction * (t_end - t) > 0:
        if steps + rejected > max_steps:
            raise IntegrationError("maximum step count exceeded")
        if direction * (t + h - t_end) > 0:
            h = t_end - t
        y1, err, k1 = dopri_step(f, t, y, h, k0)
        en = _err_norm(err, y, y1, tol)
        if not np.all(np.isfinite(y1)):
            en = np.inf
        if en <= 1.0:
            t1 = t + h if abs(t_end - (t + h)) > 1e-15 * max(1.0, abs(t_end)) else t_end
            steps += 1
            stop = on_accept(t, y, t1, y1, h) if on_accept else None
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            if stop is not None:
                if stats is not None:
                    stats[0] += steps
                    stats[1] += rejected
                return stop, h * fac
            t, y, k0 = t1, y1, k1
            h *= fac
        else:
            rejected += 1
            h *= max(0.1, 0.9 * en ** -0.2) if np.isfinite(en) else 0.1
            k0 = k0  # stage 0 is still valid after a rejection
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            raise StepSizeUnderflow(f"step size underflow at t = {t}")
    if stats is not None:
        stats[0] += steps
        stats[1] += rejected
    return (t, y), h


def integrate_batch(rhs: Callable, X0: np.ndarray, t_end: float, tol: float = 1e-10,
                    max_steps: int = 200000, guard: Callable | None = None) -> np.ndarray:
    """Integrate many initial states at once with a common step; X0 has shape (dim, N).

    ``rhs(X)`` is autonomous and vectorized over the trailing axis.  ``guard(X)`` may
    raise to abort on escape.
    """
    X0 = np.asarray(X0, dtype=float)
    if t_end == 0:
        return X0.copy()
    f = lambda t, y: rhs(y)
    h, k0 = _initial_step(f, 0.0, X0, tol, 1.0 if t_end > 0 else -1.0)

    def check(t0, y0, t1, y1, h):
        if guard is not None:
            guard(y1)
        return None

    (t, y), _ = _advance(f, 0.0, X0, t_end, tol, h, k0, max_steps, on_accept=check)
    return y


def _side(gval: float) -> int:
    return 1 if gval > 0 else (-1 if gval < 0 else 0)


def integrate(F: VectorField | PiecewiseField, x0, t_end: float, tol: float = 1e-10,
              params: Mapping[str, float] | None = None, max_events: int = 1000,
              max_steps: int = 1_000_000, event_tol: float = 1e-12) -> Trajectory:
    """Adaptive DOPRI5 trajectory; for piecewise input the field is switched at each
    crossing of gamma = 0, located by bisection in time to ``event_tol``."""
    x0 = np.asarray(x0, dtype=float)
    if isinstance(F, VectorField):
        rhs = F.numeric(params)
        f = lambda t, y: rhs(y)
        ts, xs = [0.0], [x0.copy()]

        def record(t0, y0, t1, y1, h):
            ts.append(t1)
            xs.append(y1.copy())

        h, k0 = _initial_step(f, 0.0, x0, tol, 1.0 if t_end >= 0 else -1.0)
        stats = [0, 0]
        if t_end != 0:
            _advance(f, 0.0, x0, t_end, tol, h, k0, max_steps, on_accept=record, stats=stats)
        return Trajectory(np.array(ts), np.array(xs), [], stats[0], stats[1])
    if not isinstance(F, PiecewiseField):
        raise TypeError("integrate expects a VectorField or a PiecewiseField")
    return _integrate_piecewise(F, x0, t_end, tol, params, max_events, max_steps, event_tol)


def _integrate_piecewise(F: PiecewiseField, x0, t_end, tol, params, max_events, max_steps, event_tol):
    rhs = {1: F.plus.numeric(params), -1: F.minus.numeric(params)}
    g = F.gamma_numeric(params)
    dg = F.gamma_gradient_numeric(params)
    direction = 1.0 if t_end >= 0 else -1.0

    def entering_side(x):
        grad = dg(x)
        sp = direction * float(np.dot(grad, rhs[1](x)))
        sm = direction * float(np.dot(grad, rhs[-1](x)))
        if sp > 0 and sm > 0:
            return 1
        if sp < 0 and sm < 0:
            return -1
        if sp <= 0 and sm >= 0:
            raise SlidingModeError(f"sliding mode on gamma at x = {x.tolist()}")
        raise SlidingModeError(f"repelling (escaping) sliding region at x = {x.tolist()}")

    side = _side(g(x0))
    if side == 0:
        side = entering_side(x0)
    ts, xs, events = [0.0], [x0.copy()], []
    t, y = 0.0, x0.copy()
    stats = [0, 0]
    h = None
    while direction * (t_end - t) > 0:
        cur = side
        f = lambda tt, yy, cur=cur: rhs[cur](yy)
        if h is None:
            h, k0 = _initial_step(f, t, y, tol, direction)
        else:
            k0 = f(t, y)

        def check(t0, y0, t1, y1, hh, cur=cur, f=f):
            s1 = _side(g(y1))
            if s1 == cur:
                ts.append(t1)
                xs.append(y1.copy())
                return None
            # bisection on the step length; states from a fresh step of that length
            lo, hi = 0.0, hh
            k = f(t0, y0)
            while abs(hi - lo) > event_tol:
                mid = 0.5 * (lo + hi)
                ym, _, _ = dopri_step(f, t0, y0, mid, k)
                if _side(g(ym)) == cur:
                    lo = mid
                else:
                    hi = mid
            yhi, _, _ = dopri_step(f, t0, y0, hi, k)
            return (t0 + hi, yhi)

        (t, y), h = _advance(f, t, y, t_end, tol, h, k0, max_steps, on_accept=check, stats=stats)
        if _side(g(y)) == cur:
            break  # reached t_end without a crossing
        new_side = _side(g(y)) or -cur
        push = direction * float(np.dot(dg(y), rhs[new_side](y))) * new_side
        if push <= 0:
            raise SlidingModeError(f"sliding mode on gamma at t = {t}, x = {y.tolist()}")
        events.append(EventRecord(t, y.copy(), cur, new_side))
        ts.append(t)
        xs.append(y.copy())
        if len(events) > max_events:
            raise TooManyEvents(f"more than {max_events} switching events; sliding or chattering suspected")
        side = new_side
        h = min(abs(h), 1e-3) * direction
    return Trajectory(np.array(ts), np.array(xs), events, stats[0], stats[1])
