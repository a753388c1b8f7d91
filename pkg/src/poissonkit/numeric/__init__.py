"""Numeric certification: trajectories, measure transport, weak multiplier residuals."""

from .measure import DEFAULT_SEED, Annulus, Box, EscapeError, MeasureReport, measure_preservation_check
from .ode import (EventRecord, IntegrationError, SlidingModeError, StepSizeUnderflow, TooManyEvents,
                  Trajectory, integrate, integrate_batch)
from .piecewise import BumpTest, PiecewiseExpr, PiecewiseField
from .weak import (DEFAULT_QUAD_TOL, QuadratureError, curve_samples, invariant_curve_check, random_bumps,
                   weak_multiplier_residual)

__all__ = [
    "DEFAULT_SEED", "Annulus", "Box", "EscapeError", "MeasureReport", "measure_preservation_check",
    "EventRecord", "IntegrationError", "SlidingModeError", "StepSizeUnderflow", "TooManyEvents",
    "Trajectory", "integrate", "integrate_batch", "BumpTest", "PiecewiseExpr", "PiecewiseField",
    "DEFAULT_QUAD_TOL", "QuadratureError", "curve_samples", "invariant_curve_check", "random_bumps",
    "weak_multiplier_residual",
]
