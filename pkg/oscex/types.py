"""Shared types, constants and errors for the oscex package."""

from __future__ import annotations

from enum import Enum
from typing import Any, Callable, Dict, Optional

# Below this magnitude sin(ωε), cos(ωε/2) or 1 + cos(ωε) count as zero and
# the step is treated as resonant.
RESONANCE_THRESHOLD = 1e-12

# Linear solves refuse matrices whose 1-norm condition estimate exceeds this.
CONDITION_LIMIT = 1e12

# Relative tolerance for the truncated Taylor series and the term cap that
# applies after argument reduction.
SERIES_TOLERANCE = 1e-18
SERIES_MAX_TERMS = 64

# Matrices whose largest asymmetry is below this (relative to their largest
# entry) are treated as symmetric.
SYMMETRY_TOLERANCE = 1e-13

# Default diagnostic tolerance; overridden by OSCEX_TOL.
DEFAULT_DIAGNOSTIC_TOLERANCE = 1e-11

LogCallback = Callable[[str, str, Optional[Dict[str, Any]]], None]


class Problem(str, Enum):
    """Problem families understood by the harness."""

    OSC1D = "osc1d"
    DAMPED1D = "damped1d"
    OSCND = "oscNd"
    KEPLER = "kepler"
    WAVE = "wave"
    NONLINEAR1D = "nonlinear1d"


class StepperName(str, Enum):
    """Steppers the harness can drive."""

    EXACT_FREE = "exact_free"
    EXACT_DRIVEN = "exact_driven"
    EXACT_DAMPED = "exact_damped"
    EXACT_ND = "exact_nd"
    TRAPEZOID_FORM = "trapezoid_form"
    RECURRENCE = "recurrence"
    GEO_FAMILY = "geo_family"
    GAUTSCHI = "gautschi"
    LAWSON_EXPLICIT = "lawson_explicit"
    LAWSON_IMPLICIT = "lawson_implicit"
    EXPONENTIAL_EULER = "exponential_euler"
    SYMMETRIC_EULER = "symmetric_euler"
    DISCRETE_GRADIENT = "discrete_gradient"


class DeltaPolicy(str, Enum):
    """How the discrete gradient scheme picks its effective step δₙ.

    STANDARD uses δₙ = ε. The two local policies tune δₙ to the
    linearization frequency at a reference point, either the current
    position or the midpoint of the step.
    """

    STANDARD = "standard"
    LOCAL_AT_XN = "local_xn"
    LOCAL_AT_MIDPOINT = "local_midpoint"


class ReferenceKind(str, Enum):
    """Reference trajectories accepted by compare."""

    ANALYTIC = "analytic"
    EXACT = "exact"


# ------------------------------------------------------------------
# Errors
# ------------------------------------------------------------------


class ConfigError(ValueError):
    """Invalid run configuration or command-line usage."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical kernel."""


class ResonanceError(NumericalError):
    """A step or forcing hits a resonance of the oscillator."""

    def __init__(self, message: str, value: Optional[float] = None) -> None:
        super().__init__(message)
        self.value = value


class IllConditionedError(NumericalError):
    """A linear system is singular or too badly conditioned to solve."""

    def __init__(self, message: str, condition: float) -> None:
        super().__init__(message)
        self.condition = condition


class ConvergenceError(NumericalError):
    """An iterative solve or series evaluation hit its iteration cap."""

    def __init__(self, message: str, iterations: int, residual: float) -> None:
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class UnboundOrbitError(NumericalError):
    """A Kepler orbit reached u = 1/r ≤ 0."""

    def __init__(self, message: str, step: int) -> None:
        super().__init__(message)
        self.step = step


class StepFailedError(NumericalError):
    """A numerical error raised inside a stepping loop, tagged with its step."""

    def __init__(self, step: int, cause: NumericalError) -> None:
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


__all__ = [
    "CONDITION_LIMIT",
    "ConfigError",
    "ConvergenceError",
    "DEFAULT_DIAGNOSTIC_TOLERANCE",
    "DeltaPolicy",
    "IllConditionedError",
    "LogCallback",
    "NumericalError",
    "Problem",
    "RESONANCE_THRESHOLD",
    "ReferenceKind",
    "ResonanceError",
    "SERIES_MAX_TERMS",
    "SERIES_TOLERANCE",
    "SYMMETRY_TOLERANCE",
    "StepFailedError",
    "StepperName",
    "UnboundOrbitError",
]
