"""Tests for shared enums and error types."""

import pytest

from oscex.types import (
    ConfigError,
    ConvergenceError,
    DeltaPolicy,
    NumericalError,
    Problem,
    ResonanceError,
    StepFailedError,
    StepperName,
    UnboundOrbitError,
)


def test_enum_values_match_config_names():
    """Config files spell problems and steppers by their enum values."""
    assert Problem("oscNd") is Problem.OSCND
    assert StepperName("discrete_gradient") is StepperName.DISCRETE_GRADIENT
    assert DeltaPolicy("local_midpoint") is DeltaPolicy.LOCAL_AT_MIDPOINT
    assert len(StepperName) == 13


def test_error_hierarchy():
    assert issubclass(ConfigError, ValueError)
    for cls in (ResonanceError, ConvergenceError, UnboundOrbitError, StepFailedError):
        assert issubclass(cls, NumericalError)
    assert issubclass(NumericalError, RuntimeError)


def test_step_failed_error_carries_cause():
    cause = ResonanceError("sin(ωε) vanishes", value=1.0)
    err = StepFailedError(7, cause)
    assert err.step == 7
    assert err.cause is cause
    assert str(err) == "step 7: sin(ωε) vanishes"


def test_convergence_error_fields():
    err = ConvergenceError("no luck", iterations=50, residual=1e-3)
    assert err.iterations == 50
    assert err.residual == pytest.approx(1e-3)
