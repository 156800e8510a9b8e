"""Tests for run configuration parsing and validation."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from oscex.runconfig import (
    COMPATIBILITY,
    Nonlinear1DProblem,
    Osc1DProblem,
    OscNDProblem,
    RunConfig,
    StepperKind,
    load_run_config,
)
from oscex.types import ConfigError, DeltaPolicy, Problem, StepperName


def _osc1d(**overrides) -> dict:
    data = {
        "problem": "osc1d",
        "spec": {"omega": 1.0, "g": 0.5},
        "stepper": {"kind": "exact_driven"},
        "eps": 0.1,
        "steps": 10,
    }
    data.update(overrides)
    return data


def test_minimal_config() -> None:
    config = RunConfig.model_validate(_osc1d())
    assert config.problem == Problem.OSC1D
    assert isinstance(config.spec, Osc1DProblem)
    assert config.spec.x0 == 1.0
    assert config.outputs == ["trajectory", "energies", "summary"]
    assert config.step_sizes() == [0.1] * 10
    assert config.constant_eps == 0.1
    assert config.horizon == pytest.approx(1.0)


def test_steps_must_be_positive() -> None:
    with pytest.raises(ValidationError):
        RunConfig.model_validate(_osc1d(steps=0))


def test_spec_must_match_problem() -> None:
    with pytest.raises(ValidationError):
        RunConfig.model_validate(_osc1d(spec={"m": 1.0, "k": 1.0, "u0": 1.0}))


def test_unknown_spec_field_rejected() -> None:
    with pytest.raises(ValidationError):
        RunConfig.model_validate(_osc1d(spec={"omega": 1.0, "omgea": 2.0}))


def test_incompatible_stepper_rejected() -> None:
    with pytest.raises(ValidationError, match="does not apply"):
        RunConfig.model_validate(_osc1d(stepper={"kind": "exact_damped"}))


def test_free_stepper_needs_zero_force() -> None:
    with pytest.raises(ValidationError, match="g = 0"):
        RunConfig.model_validate(_osc1d(stepper={"kind": "exact_free"}))


def test_negative_steps_only_for_exact_maps() -> None:
    RunConfig.model_validate(_osc1d(eps=-0.1))
    with pytest.raises(ValidationError, match="positive steps"):
        RunConfig.model_validate(_osc1d(eps=-0.1, stepper={"kind": "gautschi"}))


def test_variable_steps() -> None:
    config = RunConfig.model_validate(_osc1d(eps=[0.1, 0.2, 0.3], steps=3))
    assert config.constant_eps is None
    assert config.horizon == pytest.approx(0.6)
    with pytest.raises(ValidationError, match="entries"):
        RunConfig.model_validate(_osc1d(eps=[0.1, 0.2], steps=3))
    with pytest.raises(ValidationError, match="constant step"):
        RunConfig.model_validate(_osc1d(eps=[0.1, 0.2, 0.3], steps=3, stepper={"kind": "recurrence"}))


def test_stepper_variants() -> None:
    assert StepperKind(kind=StepperName.GEO_FAMILY).rule == "exact"
    assert StepperKind(kind=StepperName.DISCRETE_GRADIENT).policy == DeltaPolicy.STANDARD
    assert StepperKind(kind="discrete_gradient", policy="local_midpoint").label == "discrete_gradient[local_midpoint]"
    with pytest.raises(ValidationError, match="unknown family rule"):
        StepperKind(kind="geo_family", rule="leapfrog")
    with pytest.raises(ValidationError, match="only applies"):
        StepperKind(kind="gautschi", policy="standard")


def test_oscnd_random_matrix_is_seeded() -> None:
    spec = OscNDProblem(n=3)
    A1, x1, _ = spec.materialize(7)
    A2, x2, _ = spec.materialize(7)
    assert np.array_equal(A1, A2)
    assert np.array_equal(x1, x2)
    assert np.allclose(A1, A1.T)
    assert np.all(np.linalg.eigvalsh(A1) > 0)


def test_oscnd_shape_checks() -> None:
    with pytest.raises(ValidationError, match="exactly one"):
        OscNDProblem()
    with pytest.raises(ValidationError, match="square"):
        OscNDProblem(A=[[1.0, 0.0], [0.0]])
    with pytest.raises(ValidationError, match="forcing dimension"):
        OscNDProblem(n=2, forcing={"type": "constant", "a": [1.0]})


def test_oscnd_trapezoid_needs_constant_forcing() -> None:
    data = {
        "problem": "oscNd",
        "spec": {"n": 2, "forcing": {"type": "sinusoidal", "f0": [1.0, 0.0], "omega_f": 3.0}},
        "stepper": {"kind": "trapezoid_form"},
        "eps": 0.1,
        "steps": 5,
    }
    with pytest.raises(ValidationError, match="trapezoid_form"):
        RunConfig.model_validate(data)


def test_damped_requires_underdamping() -> None:
    data = {
        "problem": "damped1d",
        "spec": {"omega": 1.0, "gamma": 2.0},
        "stepper": {"kind": "exact_damped"},
        "eps": 0.1,
        "steps": 5,
    }
    with pytest.raises(ValidationError, match="underdamped"):
        RunConfig.model_validate(data)


def test_nonlinear_linear_frequency() -> None:
    assert Nonlinear1DProblem(potential="pendulum", params={"omega": 2.0}).linear_frequency() == 2.0
    with pytest.raises(ValueError, match="bad parameters"):
        Nonlinear1DProblem(potential="pendulum", params={"length": 2.0}).build_potential()


def test_with_step_keeps_horizon() -> None:
    config = RunConfig.model_validate(_osc1d(eps=0.1, steps=20))
    finer = config.with_step(0.025)
    assert finer.steps == 80
    assert finer.horizon == pytest.approx(config.horizon)
    with pytest.raises(ConfigError, match="does not divide"):
        config.with_step(0.3)


def test_compatibility_covers_every_problem() -> None:
    assert set(COMPATIBILITY) == set(Problem)


def test_load_run_config(tmp_path: Path) -> None:
    path = tmp_path / "run.json"
    path.write_text(json.dumps(_osc1d()))
    assert load_run_config(path).steps == 10

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_run_config(bad)

    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps(_osc1d(steps=0)))
    with pytest.raises(ConfigError):
        load_run_config(invalid)

    with pytest.raises(OSError, match="cannot read"):
        load_run_config(tmp_path / "missing.json")
