"""Tests for run and compare."""

from __future__ import annotations

import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oscex.config import Settings
from oscex.runconfig import RunConfig
from oscex.runner import (
    ORDER_FLOOR,
    analytic_states,
    compare,
    global_error,
    observed_order,
    run,
)
from oscex.serialize import serialize
from oscex.types import ConfigError, ReferenceKind, ResonanceError, StepFailedError


def _settings() -> Settings:
    return Settings(_env_file=None)


def _config(problem: str, spec: Dict[str, Any], stepper: Dict[str, Any], eps: Any, steps: int, **extra: Any) -> RunConfig:
    data = {"problem": problem, "spec": spec, "stepper": stepper, "eps": eps, "steps": steps}
    data.update(extra)
    return RunConfig.model_validate(data)


def _osc1d(kind: str, g: float = 1.0, eps: float = 0.1, steps: int = 100, **stepper: Any) -> RunConfig:
    return _config("osc1d", {"omega": 1.0, "g": g, "x0": 0.3, "v0": -0.4}, {"kind": kind, **stepper}, eps, steps)


# ------------------------------------------------------------------
# run
# ------------------------------------------------------------------


def test_osc1d_exact_run_columns_and_accuracy() -> None:
    result = run(_osc1d("exact_driven"), _settings())
    traj = result.trajectory
    assert traj.columns == ["n", "t", "x0", "v0", "E0", "E1", "E2", "E3"]
    assert len(traj) == 101
    assert_allclose(traj.column("n"), np.arange(101))
    t = traj.times
    x_ref = 1.0 + (0.3 - 1.0) * np.cos(t) - 0.4 * np.sin(t)
    assert_allclose(traj.column("x0"), x_ref, atol=1e-12)
    assert result.summary.within_tolerance is True
    assert result.summary.max_drift <= 1e-11
    assert result.summary.final_time == pytest.approx(10.0)


def test_free_exact_run_tracks_cosine() -> None:
    config = _config("osc1d", {"omega": 1.0}, {"kind": "exact_free"}, 0.3, 10_000)
    traj = run(config, _settings()).trajectory
    t = traj.times
    assert np.max(np.abs(traj.column("x0") - np.cos(t))) <= 1e-11
    assert np.max(np.abs(traj.column("v0") + np.sin(t))) <= 1e-11


@pytest.mark.parametrize(
    "stepper",
    [
        {"kind": "trapezoid_form"},
        {"kind": "recurrence"},
        {"kind": "gautschi"},
        {"kind": "exponential_euler"},
        {"kind": "discrete_gradient", "policy": "local_xn"},
    ],
)
def test_exact_family_of_osc1d_steppers(stepper: Dict[str, Any]) -> None:
    config = _osc1d(**stepper)
    traj = run(config, _settings()).trajectory
    expected = analytic_states(config, traj.times)
    assert_allclose(traj.column("x0"), expected[:, 0], atol=1e-11)
    assert_allclose(traj.column("v0"), expected[:, 1], atol=1e-10)


def test_geo_family_run_without_force() -> None:
    config = _osc1d("geo_family", g=0.0, rule="exact")
    result = run(config, _settings())
    assert result.summary.stepper == "geo_family[exact]"
    assert global_error(config, result.trajectory, ReferenceKind.ANALYTIC, _settings()) <= 1e-12


def test_symmetric_euler_drifts() -> None:
    config = _osc1d("symmetric_euler", g=0.0, eps=0.3, steps=1000)
    result = run(config, _settings())
    assert result.summary.max_drift > 1e-6
    assert result.summary.within_tolerance is False
    assert not np.any(np.isnan(result.trajectory.data))


def test_energies_output_can_be_dropped() -> None:
    config = _config(
        "osc1d", {"omega": 1.0}, {"kind": "exact_free"}, 0.1, 5, outputs=["trajectory", "summary"]
    )
    result = run(config, _settings())
    assert result.trajectory.columns == ["n", "t", "x0", "v0"]
    assert set(result.summary.energy_drift) == {"E0", "E1", "E2", "E3"}


def test_damped_run() -> None:
    config = _config("damped1d", {"omega": 2.0, "gamma": 0.2, "g": 0.3}, {"kind": "exact_damped"}, 0.05, 200)
    result = run(config, _settings())
    assert result.trajectory.energy_columns == []
    assert result.summary.max_drift is None
    assert global_error(config, result.trajectory, ReferenceKind.ANALYTIC, _settings()) <= 1e-12


def test_oscnd_run_with_variable_steps() -> None:
    rng = np.random.default_rng(1)
    sizes = list(rng.uniform(0.05, 0.2, size=200))
    config = _config(
        "oscNd",
        {"n": 3, "forcing": {"type": "constant", "a": [0.1, 0.0, -0.2]}},
        {"kind": "exact_nd"},
        sizes,
        200,
        seed=11,
    )
    result = run(config, _settings())
    assert result.trajectory.state_columns == ["x0", "x1", "x2", "v0", "v1", "v2"]
    assert result.trajectory.energy_columns == ["I"]
    assert result.summary.energy_drift["I"] <= 1e-11


@pytest.mark.parametrize("kind", ["trapezoid_form", "recurrence"])
def test_oscnd_formulations_match_reference(kind: str) -> None:
    config = _config(
        "oscNd",
        {"A": [[2.0, 0.5], [0.5, 1.0]], "forcing": {"type": "constant", "a": [1.0, 0.0]}, "x0": [0.1, 0.2], "v0": [0.0, 0.3]},
        {"kind": kind},
        0.1,
        50,
    )
    result = run(config, _settings())
    assert global_error(config, result.trajectory, ReferenceKind.EXACT, _settings()) <= 1e-11


def test_oscnd_forced_recurrence_run() -> None:
    config = _config(
        "oscNd",
        {"A": [[2.0, 0.0], [0.0, 3.0]], "forcing": {"type": "polynomial", "coeffs": [[1.0, 0.0], [1.0, 0.0]]}, "x0": [0.0, 0.0], "v0": [0.0, 0.0]},
        {"kind": "recurrence"},
        0.05,
        100,
    )
    result = run(config, _settings())
    assert result.trajectory.energy_columns == []
    assert global_error(config, result.trajectory, ReferenceKind.ANALYTIC, _settings()) <= 1e-10


def test_kepler_run() -> None:
    steps = 64
    config = _config(
        "kepler", {"m": 1.0, "k": 1.0, "L": 1.0, "u0": 1.5, "du0": 0.0}, {"kind": "exact_driven"}, 2.0 * math.pi / steps, steps
    )
    result = run(config, _settings())
    traj = result.trajectory
    assert traj.extra_columns == ["r", "time"]
    assert traj.column("x0")[-1] == pytest.approx(1.5, abs=1e-11)
    assert global_error(config, traj, ReferenceKind.ANALYTIC, _settings()) <= 1e-12


def test_wave_run() -> None:
    config = _config(
        "wave",
        {"a": 1.0, "modes": [{"k": 2.0, "u0": [1.0, 0.0], "udot0": [0.0, -1.0]}], "grid": 4},
        {"kind": "recurrence"},
        0.1,
        100,
    )
    result = run(config, _settings())
    traj = result.trajectory
    assert traj.state_columns == ["x0_re", "x0_im", "v0_re", "v0_im"]
    assert traj.energy_columns == ["W0"]
    assert len(traj.extra_columns) == 8
    assert global_error(config, traj, ReferenceKind.ANALYTIC, _settings()) <= 1e-12


def test_nonlinear_run_conserves_energy() -> None:
    config = _config(
        "nonlinear1d", {"potential": "pendulum", "x0": 1.0}, {"kind": "discrete_gradient", "policy": "local_midpoint"}, 0.1, 1000
    )
    result = run(config, _settings())
    assert result.summary.energy_drift["H"] <= 1e-12
    assert result.summary.continuations == 0


def test_resonant_step_reports_failing_step() -> None:
    config = _osc1d("recurrence", eps=math.pi, steps=3)
    with pytest.raises(StepFailedError) as info:
        run(config, _settings())
    assert isinstance(info.value.cause, ResonanceError)


def test_unbound_kepler_reports_step() -> None:
    config = _config(
        "kepler", {"u0": 2.5, "du0": 0.0}, {"kind": "exact_driven"}, 0.1, 40
    )
    with pytest.raises(StepFailedError) as info:
        run(config, _settings())
    assert info.value.step > 0


def test_tolerance_from_settings() -> None:
    config = _osc1d("symmetric_euler", g=0.0, eps=0.3, steps=100)
    loose = Settings(OSCEX_TOL=1.0, _env_file=None)
    assert run(config, loose).summary.within_tolerance is True


def test_constant_step_times_are_exact_multiples() -> None:
    config = _config("osc1d", {"omega": 1.0}, {"kind": "exact_free"}, 0.3, 10_000)
    t = run(config, _settings()).trajectory.times
    assert np.array_equal(t, 0.3 * np.arange(10_001, dtype=float))


def test_variable_step_times_use_compensated_sums() -> None:
    sizes = [0.1, 0.2] * 5_000
    config = _config("osc1d", {"omega": 1.0}, {"kind": "exact_free"}, sizes, len(sizes))
    t = run(config, _settings()).trajectory.times
    for k in (1, 2, 999, 5_000, 7_777, 10_000):
        expected = math.fsum(sizes[:k])
        assert abs(t[k] - expected) <= 2.0 * np.spacing(expected)


def test_forced_oscnd_variable_steps_match_analytic_solution() -> None:
    rng = np.random.default_rng(5)
    sizes = list(rng.uniform(0.05, 0.2, size=2_000))
    config = _config(
        "oscNd",
        {"A": [[2.0, 0.0], [0.0, 3.0]], "forcing": {"type": "sinusoidal", "f0": [1.0, 0.0], "omega_f": 2.0}, "x0": [0.1, 0.0], "v0": [0.0, 0.2]},
        {"kind": "exact_nd"},
        sizes,
        len(sizes),
    )
    result = run(config, _settings())
    assert global_error(config, result.trajectory, ReferenceKind.ANALYTIC, _settings()) <= 1e-9


def test_run_output_is_deterministic() -> None:
    config = _config("oscNd", {"n": 4, "forcing": {"type": "constant", "a": [0.1, 0.0, -0.2, 0.3]}}, {"kind": "exact_nd"}, 0.1, 200, seed=3)
    first = serialize(run(config, _settings()).trajectory, "csv")
    second = serialize(run(config, _settings()).trajectory, "csv")
    assert first == second


def test_hyperbolic_continuation_warns_once_per_run(caplog: pytest.LogCaptureFixture) -> None:
    config = _config(
        "nonlinear1d", {"potential": "pendulum", "x0": 2.5}, {"kind": "discrete_gradient", "policy": "local_xn"}, 0.1, 200
    )
    with caplog.at_level(logging.DEBUG, logger="oscex"):
        result = run(config, _settings())
    assert result.summary.continuations > 1
    warnings = [r for r in caplog.records if r.levelno >= logging.WARNING]
    assert len(warnings) == 1
    assert warnings[0].name == "oscex.runner"
    assert "hyperbolic continuation" in warnings[0].getMessage()


# ------------------------------------------------------------------
# compare
# ------------------------------------------------------------------


def test_observed_order() -> None:
    sweep = [{"eps": e, "error": 3.0 * e**2} for e in (0.1, 0.05, 0.025, 0.0125)]
    assert observed_order(sweep) == pytest.approx(2.0)
    floor = [{"eps": e, "error": ORDER_FLOOR / 2} for e in (0.1, 0.05, 0.025, 0.0125)]
    assert observed_order(floor) is None


@pytest.mark.asyncio
async def test_compare_exponential_schemes() -> None:
    configs = [_osc1d("exponential_euler", steps=10), _osc1d("lawson_explicit", steps=10)]
    messages: List[str] = []

    def log_callback(level: str, message: str, data: Optional[Dict[str, Any]] = None) -> None:
        messages.append(message)

    table = await compare(
        configs,
        reference=ReferenceKind.ANALYTIC,
        sweep=[0.1, 0.05, 0.025, 0.0125],
        log_callback=log_callback,
        settings=_settings(),
    )
    assert table.problem == "osc1d"
    assert table.horizon == pytest.approx(1.0)
    euler, lawson = table.rows
    assert euler.label == "exponential_euler"
    assert euler.global_error < 1e-12
    assert euler.observed_order is None
    assert lawson.global_error > 1e-6
    assert lawson.observed_order == pytest.approx(1.0, abs=0.15)
    assert len(lawson.sweep) == 4
    assert messages
    assert table.to_dict()["rows"][1]["label"] == "lawson_explicit"


@pytest.mark.asyncio
async def test_compare_warns_on_energy_drift() -> None:
    levels: List[str] = []

    def log_callback(level: str, message: str, data: Optional[Dict[str, Any]] = None) -> None:
        levels.append(level)

    config = _osc1d("symmetric_euler", g=0.0, eps=0.3, steps=1000)
    await compare([config], log_callback=log_callback, settings=_settings())
    assert "warning" in levels

    levels.clear()
    await compare([_osc1d("exact_driven")], log_callback=log_callback, settings=_settings())
    assert "warning" not in levels


@pytest.mark.asyncio
async def test_compare_midpoint_beats_standard() -> None:
    configs = [
        _config("nonlinear1d", {"potential": "pendulum", "x0": 1.0}, {"kind": "discrete_gradient", "policy": policy}, 0.1, 100)
        for policy in ("standard", "local_midpoint")
    ]
    table = await compare(configs, settings=_settings())
    standard, midpoint = table.rows
    assert midpoint.global_error < standard.global_error


@pytest.mark.asyncio
async def test_compare_rejects_empty_input() -> None:
    with pytest.raises(ConfigError, match="at least one"):
        await compare([], settings=_settings())


@pytest.mark.asyncio
async def test_compare_rejects_mixed_problems_and_horizons() -> None:
    kepler = _config("kepler", {"u0": 1.0}, {"kind": "exact_driven"}, 0.1, 100)
    with pytest.raises(ConfigError, match="mixed problems"):
        await compare([_osc1d("exact_driven"), kepler], settings=_settings())
    with pytest.raises(ConfigError, match="horizons"):
        await compare([_osc1d("exact_driven"), _osc1d("exact_driven", steps=50)], settings=_settings())


@pytest.mark.asyncio
async def test_compare_rejects_short_sweep() -> None:
    with pytest.raises(ConfigError, match="at least 4"):
        await compare([_osc1d("exact_driven")], sweep=[0.1, 0.05], settings=_settings())


@pytest.mark.asyncio
async def test_exact_reference_unavailable_for_nonlinear() -> None:
    config = _config("nonlinear1d", {"potential": "duffing"}, {"kind": "discrete_gradient"}, 0.1, 10)
    with pytest.raises(ConfigError, match="analytic reference"):
        await compare([config], reference=ReferenceKind.EXACT, settings=_settings())
