"""Tests for the Kepler and wave applications."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from oscex.apps import (
    KeplerSpec,
    WaveSpec,
    group_velocity,
    kepler_conic,
    kepler_elements,
    kepler_propagate,
    kepler_time_of_flight,
    numerical_frequency,
    synthesize,
    wave_modes,
    wave_propagate,
)
from oscex.exact1d import Osc1DSpec, Phase1D, exact_step
from oscex.types import UnboundOrbitError


def _eccentric(e: float, dphi: float, steps: int, L: float = 1.0) -> KeplerSpec:
    uc = 1.0 / (L * L)
    return KeplerSpec(m=1.0, k=1.0, L=L, u0=uc * (1.0 + e), du0=0.0, dphi=dphi, steps=steps)


# ------------------------------------------------------------------
# Kepler
# ------------------------------------------------------------------


def test_circular_orbit_stays_circular() -> None:
    spec = KeplerSpec(m=2.0, k=3.0, L=1.5, u0=6.0 / 2.25, du0=0.0, dphi=0.1, steps=100)
    orbit = kepler_propagate(spec)
    assert_allclose(orbit.u, spec.circular_u, atol=1e-13)
    assert_allclose(orbit.r, 1.0 / spec.circular_u, atol=1e-13)


def test_eccentric_orbit_matches_conic() -> None:
    spec = _eccentric(0.5, 0.05, 400)
    orbit = kepler_propagate(spec)
    conic = np.array([kepler_conic(spec, phi) for phi in orbit.phi])
    assert np.max(np.abs(orbit.u - conic)) <= 1e-12
    assert_allclose(orbit.u, 1.0 + 0.5 * np.cos(orbit.phi), atol=1e-12)


@pytest.mark.parametrize("e", [0.0, 0.3, 0.5, 0.9])
def test_orbit_closes_after_full_turn(e: float) -> None:
    steps = 100
    spec = _eccentric(e, 2.0 * math.pi / steps, steps)
    orbit = kepler_propagate(spec)
    assert orbit.u[-1] == pytest.approx(orbit.u[0], abs=1e-11)
    assert orbit.du[-1] == pytest.approx(orbit.du[0], abs=1e-11)


def test_recurrence_method_agrees_with_exact() -> None:
    spec = _eccentric(0.4, 0.07, 300)
    exact = kepler_propagate(spec, method="exact")
    recurrence = kepler_propagate(spec, method="recurrence")
    assert_allclose(recurrence.u, exact.u, atol=1e-12)
    assert_allclose(recurrence.t, exact.t, rtol=1e-12)


def test_elements() -> None:
    el = kepler_elements(_eccentric(0.5, 0.1, 10))
    assert el.eccentricity == pytest.approx(0.5)
    assert el.semi_latus_rectum == pytest.approx(1.0)
    assert el.semi_major_axis == pytest.approx(1.0 / 0.75)
    assert el.period == pytest.approx(2.0 * math.pi * (1.0 / 0.75) ** 1.5)
    assert el.periapsis_angle == pytest.approx(0.0)


def test_full_period_recovered() -> None:
    steps = 200
    spec = _eccentric(0.5, 2.0 * math.pi / steps, steps)
    orbit = kepler_propagate(spec)
    assert orbit.t[-1] == pytest.approx(kepler_elements(spec).period, rel=1e-9)


def test_time_recovery_converges_quadratically_on_arc() -> None:
    counts = [10, 20, 40, 80]
    errors = []
    for n in counts:
        spec = _eccentric(0.5, 1.0 / n, n)
        orbit = kepler_propagate(spec)
        errors.append(abs(orbit.t[-1] - kepler_time_of_flight(spec, 1.0)))
    order = np.polyfit(np.log(1.0 / np.array(counts)), np.log(errors), 1)[0]
    assert order == pytest.approx(2.0, abs=0.1)


def test_negative_angular_momentum_runs_time_backwards() -> None:
    spec = _eccentric(0.3, 0.1, 20, L=-1.0)
    orbit = kepler_propagate(spec)
    assert orbit.t[-1] < 0
    assert orbit.t[-1] == pytest.approx(kepler_time_of_flight(spec, 2.0), rel=1e-2)


def test_unbound_orbit_detected() -> None:
    spec = _eccentric(1.5, 0.1, 40)
    with pytest.raises(UnboundOrbitError) as info:
        kepler_propagate(spec)
    assert info.value.step > 0
    with pytest.raises(UnboundOrbitError):
        kepler_elements(spec)


def test_kepler_spec_validation() -> None:
    with pytest.raises(ValueError, match="angular momentum"):
        KeplerSpec(m=1.0, k=1.0, L=0.0, u0=1.0, du0=0.0, dphi=0.1, steps=1)
    with pytest.raises(ValueError, match="u0"):
        KeplerSpec(m=1.0, k=1.0, L=1.0, u0=-1.0, du0=0.0, dphi=0.1, steps=1)


# ------------------------------------------------------------------
# Waves
# ------------------------------------------------------------------


def test_uniform_mode_is_cosine() -> None:
    spec = WaveSpec(a=1.0, modes=wave_modes([(0.0, 1.0, 0.0)]), dt=0.1, steps=200)
    history = wave_propagate(spec)
    assert_allclose(history.amplitudes[:, 0].real, np.cos(history.times), atol=1e-12)
    assert_allclose(history.amplitudes[:, 0].imag, 0.0, atol=1e-15)


def test_numerical_frequency_is_exact() -> None:
    spec = WaveSpec(
        a=4.0,
        modes=wave_modes([(3.0, 1.0, 0.5j), (1.0, 0.2 - 0.1j, 1.0), (7.5, 1.0j, 0.0)]),
        dt=0.1,
        steps=500,
    )
    history = wave_propagate(spec)
    assert_allclose(numerical_frequency(history), np.sqrt(np.array([9.0, 1.0, 56.25]) + 16.0), atol=1e-12)
    assert numerical_frequency(history)[0] == pytest.approx(5.0, abs=1e-12)


def test_numerical_frequency_rejects_aliased_modes() -> None:
    spec = WaveSpec(a=0.0, modes=wave_modes([(1.0, 1.0, 0.0), (4.0, 1.0, 0.0)]), dt=1.0, steps=10)
    history = wave_propagate(spec, method="exact")
    with pytest.raises(ValueError, match="aliases"):
        numerical_frequency(history)


def test_mode_energy_constant() -> None:
    spec = WaveSpec(a=0.5, modes=wave_modes([(1.0, 1.0, 0.3j), (2.0, 0.5, -0.2)]), dt=0.05, steps=10_000)
    energy = wave_propagate(spec).mode_energy()
    drift = np.max(np.abs(energy - energy[0]), axis=0) / energy[0]
    assert np.all(drift <= 1e-11)


def test_recurrence_agrees_with_one_dimensional_map() -> None:
    omega = math.sqrt(4.0 + 1.0)
    spec = WaveSpec(a=1.0, modes=wave_modes([(2.0, 0.7, -0.4)]), dt=0.2, steps=1000)
    history = wave_propagate(spec, method="recurrence")
    state = Phase1D(0.7, -0.4)
    osc = Osc1DSpec(omega=omega)
    for n in range(1, spec.steps + 1):
        state = exact_step(state, osc, spec.dt)
        assert history.amplitudes[n, 0].real == pytest.approx(state.x, abs=1e-12)
    exact = wave_propagate(spec, method="exact")
    assert_allclose(history.amplitudes, exact.amplitudes, atol=1e-12)


def test_group_velocity_of_two_mode_packet() -> None:
    a = 1.0
    k1, k2 = 5.05, 4.95
    w1, w2 = math.hypot(k1, a), math.hypot(k2, a)
    spec = WaveSpec(
        a=a,
        modes=wave_modes([(k1, 1.0, -1j * w1), (k2, 1.0, -1j * w2)]),
        dt=0.1,
        steps=1000,
    )
    velocity = group_velocity(wave_propagate(spec))
    k = 0.5 * (k1 + k2)
    assert velocity == pytest.approx(k / math.hypot(k, a), abs=1e-3)


def test_synthesis_grid() -> None:
    spec = WaveSpec(a=1.0, modes=wave_modes([(0.0, 2.0, 0.0), (1.0, 1.0, 0.0)]), dt=0.1, steps=3, grid=8)
    history = wave_propagate(spec)
    assert history.frames is not None
    assert history.frames.shape == (4, 8)
    assert history.frames[0, 0] == pytest.approx(3.0)
    assert_allclose(synthesize(history, 8), history.frames)


def test_wave_spec_validation() -> None:
    with pytest.raises(ValueError, match="at least one mode"):
        WaveSpec(a=1.0, modes=(), dt=0.1, steps=1)
    with pytest.raises(ValueError, match="ω²"):
        WaveSpec(a=0.0, modes=wave_modes([(0.0, 1.0, 0.0)]), dt=0.1, steps=1)
