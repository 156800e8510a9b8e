"""Tests for the discrete gradient scheme and its step policies."""

from __future__ import annotations

import logging
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from oscex.exact1d import Osc1DSpec, Phase1D, exact_step
from oscex.locexact import (
    POTENTIALS,
    Potential,
    discrete_gradient_quotient,
    discrete_gradient_solve,
    discrete_gradient_step,
    duffing_potential,
    local_delta,
    local_delta_from_curvature,
    pendulum_potential,
    quadratic_potential,
)
from oscex.types import DeltaPolicy, ResonanceError


def _pendulum_reference(x0: float, v0: float, t_end: float) -> np.ndarray:
    sol = solve_ivp(
        lambda _t, y: [y[1], -math.sin(y[0])],
        (0.0, t_end),
        [x0, v0],
        method="DOP853",
        rtol=1e-13,
        atol=1e-14,
    )
    return sol.y[:, -1]


def _run(pot: Potential, state: Phase1D, eps: float, steps: int, policy: DeltaPolicy) -> Phase1D:
    for _ in range(steps):
        state = discrete_gradient_step(state, pot, eps, policy)
    return state


@pytest.mark.parametrize("policy", list(DeltaPolicy))
def test_pendulum_energy_conserved(policy: DeltaPolicy) -> None:
    pot = pendulum_potential()
    state = Phase1D(1.0, 0.0)
    initial = pot.energy(state)
    worst = 0.0
    for _ in range(10_000):
        state = discrete_gradient_step(state, pot, 0.1, policy)
        worst = max(worst, abs(pot.energy(state) - initial))
    assert worst <= 1e-12


def test_local_at_xn_is_exact_for_quadratic_potential() -> None:
    spec = Osc1DSpec(omega=1.7, g=0.4)
    pot = quadratic_potential(1.7, 0.4)
    exact = scheme = Phase1D(0.8, -0.3)
    for _ in range(500):
        exact = exact_step(exact, spec, 0.2)
        scheme = discrete_gradient_step(scheme, pot, 0.2, DeltaPolicy.LOCAL_AT_XN)
    assert scheme.x == pytest.approx(exact.x, abs=1e-12)
    assert scheme.v == pytest.approx(exact.v, abs=1e-12)


def test_midpoint_policy_beats_standard_on_pendulum() -> None:
    pot = pendulum_potential()
    start = Phase1D(1.0, 0.0)
    ref = _pendulum_reference(1.0, 0.0, 10.0)
    errors = {}
    for policy in (DeltaPolicy.STANDARD, DeltaPolicy.LOCAL_AT_MIDPOINT):
        end = _run(pot, start, 0.1, 100, policy)
        errors[policy] = math.hypot(end.x - ref[0], end.v - ref[1])
    ratio = errors[DeltaPolicy.STANDARD] / errors[DeltaPolicy.LOCAL_AT_MIDPOINT]
    assert errors[DeltaPolicy.LOCAL_AT_MIDPOINT] < errors[DeltaPolicy.STANDARD], f"ratio {ratio:.3g}"


@pytest.mark.parametrize("policy", [DeltaPolicy.STANDARD, DeltaPolicy.LOCAL_AT_MIDPOINT])
def test_symmetric_policies_are_reversible(policy: DeltaPolicy) -> None:
    pot = pendulum_potential()
    start = Phase1D(0.9, 0.4)
    forward = discrete_gradient_step(start, pot, 0.1, policy)
    back = discrete_gradient_step(forward, pot, -0.1, policy)
    assert back.x == pytest.approx(start.x, abs=1e-10)
    assert back.v == pytest.approx(start.v, abs=1e-10)


def test_local_delta_values() -> None:
    assert local_delta_from_curvature(0.0, 0.3) == 0.3
    assert local_delta_from_curvature(4.0, 0.5) == pytest.approx(math.tan(0.5), rel=1e-15)
    assert local_delta_from_curvature(-1.0, 0.4) == pytest.approx(2.0 * math.tanh(0.2), rel=1e-15)
    with pytest.raises(ResonanceError):
        local_delta_from_curvature(1.0, math.pi)


def test_local_delta_consistency_limit() -> None:
    pot = pendulum_potential()
    for xbar in (0.0, 1.0, 2.5):
        assert local_delta(pot, xbar, 1e-6) / 1e-6 == pytest.approx(1.0, abs=1e-9)


def test_quotient_falls_back_to_derivative() -> None:
    pot = duffing_potential(1.0, 2.0)
    assert discrete_gradient_quotient(pot, 0.5, 0.5) == pytest.approx(pot.dphi(0.5))
    exact = (pot.phi(1.0) - pot.phi(0.0)) / 1.0
    assert discrete_gradient_quotient(pot, 0.0, 1.0) == pytest.approx(exact)


def test_hyperbolic_continuation_is_reported(caplog: pytest.LogCaptureFixture) -> None:
    pot = pendulum_potential()
    with caplog.at_level(logging.DEBUG, logger="oscex.locexact"):
        result = discrete_gradient_solve(Phase1D(3.0, 0.1), pot, 0.05, DeltaPolicy.LOCAL_AT_XN)
    assert result.continued
    assert "hyperbolic" in caplog.text
    assert pot.energy(result.state) == pytest.approx(pot.energy(Phase1D(3.0, 0.1)), abs=1e-13)


def test_solver_reports_diagnostics() -> None:
    result = discrete_gradient_solve(Phase1D(0.5, 0.0), duffing_potential(), 0.1, DeltaPolicy.STANDARD)
    assert result.iterations >= 1
    assert result.residual <= 1e-13
    assert not result.continued


def test_zero_step_rejected() -> None:
    with pytest.raises(ValueError, match="non-zero"):
        discrete_gradient_step(Phase1D(0.0, 1.0), pendulum_potential(), 0.0, DeltaPolicy.STANDARD)


def test_inconsistent_potential_rejected() -> None:
    with pytest.raises(ValueError, match="finite difference"):
        Potential(phi=lambda x: x * x, dphi=lambda x: x, d2phi=lambda x: 2.0, name="broken")


def test_registry() -> None:
    assert set(POTENTIALS) == {"quadratic", "pendulum", "duffing"}
    assert POTENTIALS["pendulum"](2.0).d2phi(0.0) == pytest.approx(4.0)
