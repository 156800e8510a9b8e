"""Exact steppers for the one-dimensional harmonic oscillator.

Covers the free and constant-force oscillator ẍ + ω²x = g (any step,
variable steps included), the damped oscillator ẍ = −ω₀²x − 2γẋ − g, the
equivalent position recurrences, velocity reconstruction from positions,
and the four discrete energy invariants.

Sign conventions follow the two source equations: the undamped steppers
use +g on the right-hand side, the damped stepper uses −g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from oscex.phasefun import linear_solve
from oscex.types import RESONANCE_THRESHOLD, ResonanceError


@dataclass(frozen=True)
class Phase1D:
    """Position, velocity and time stamp of a scalar oscillator."""

    x: float
    v: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.v) and math.isfinite(self.t)):
            raise ValueError(f"Phase1D components must be finite, got ({self.x}, {self.v}, {self.t})")

    def momentum(self, m: float = 1.0) -> float:
        return m * self.v


@dataclass(frozen=True)
class Osc1DSpec:
    """Scalar oscillator parameters.

    ``omega`` is ω for the undamped steppers and ω₀ for the damped one.
    ``g`` is the constant force per unit mass.
    """

    omega: float
    g: float = 0.0
    gamma: float = 0.0
    m: float = 1.0

    def __post_init__(self) -> None:
        for name in ("omega", "g", "gamma", "m"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.m <= 0:
            raise ValueError(f"mass must be positive, got {self.m}")
        if self.gamma < 0:
            raise ValueError(f"damping must be non-negative, got {self.gamma}")

    @property
    def stiffness(self) -> float:
        """k = mω²."""
        return self.m * self.omega * self.omega

    @property
    def equilibrium(self) -> float:
        """g/ω², the rest point of ẍ + ω²x = g."""
        return self.g / (self.omega * self.omega)


@dataclass(frozen=True)
class EnergyQuad:
    """The four discrete energy representations of a step pair."""

    e0: float
    e1: float
    e2: float
    e3: float


def _require_frequency(spec: Osc1DSpec) -> float:
    if spec.omega <= 0:
        raise ValueError(f"omega must be positive, got {spec.omega}")
    return spec.omega


def _require_finite_step(eps: float) -> float:
    eps = float(eps)
    if not math.isfinite(eps):
        raise ValueError(f"eps must be finite, got {eps}")
    return eps


def _nonresonant_sin(omega: float, eps: float, what: str) -> float:
    s = math.sin(omega * eps)
    if abs(s) < RESONANCE_THRESHOLD:
        raise ResonanceError(
            f"{what}: sin(ωε) vanishes for ω={omega:g}, eps={eps:g}", value=omega * omega
        )
    return s


# ------------------------------------------------------------------
# Steppers
# ------------------------------------------------------------------


def exact_step(state: Phase1D, spec: Osc1DSpec, eps: float) -> Phase1D:
    """Advance ẍ + ω²x = g exactly by *eps* (either sign)."""
    omega = _require_frequency(spec)
    eps = _require_finite_step(eps)
    c = math.cos(omega * eps)
    s = math.sin(omega * eps)
    xe = spec.equilibrium
    dx = state.x - xe
    return Phase1D(
        x=xe + c * dx + (s / omega) * state.v,
        v=-omega * s * dx + c * state.v,
        t=state.t + eps,
    )


def exact_step_damped(state: Phase1D, spec: Osc1DSpec, eps: float) -> Phase1D:
    """Advance ẍ = −ω₀²x − 2γẋ − g exactly by *eps* (underdamped only)."""
    eps = _require_finite_step(eps)
    omega0 = spec.omega
    gamma = spec.gamma
    if omega0 <= 0:
        raise ValueError(f"omega0 must be positive, got {omega0}")
    w2 = omega0 * omega0 - gamma * gamma
    if w2 <= 0:
        raise ValueError(
            f"not underdamped: omega0²-gamma² = {w2:g} must be positive "
            f"(omega0={omega0:g}, gamma={gamma:g})"
        )
    w = math.sqrt(w2)
    xe = -spec.g / (omega0 * omega0)
    c = math.cos(w * eps)
    s = math.sin(w * eps)
    decay = math.exp(-gamma * eps)
    dx = state.x - xe
    return Phase1D(
        x=xe + decay * (dx * (c + (gamma / w) * s) + (s / w) * state.v),
        v=decay * (state.v * (c - (gamma / w) * s) - (w + gamma * gamma / w) * s * dx),
        t=state.t + eps,
    )


def recurrence_step(x_n: float, x_prev: float, spec: Osc1DSpec, eps: float) -> float:
    """x_{n+1} from the constant-step three-term recurrence."""
    omega = _require_frequency(spec)
    eps = _require_finite_step(eps)
    half = math.sin(0.5 * omega * eps)
    return (
        2.0 * math.cos(omega * eps) * x_n
        - x_prev
        + 4.0 * spec.g / (omega * omega) * half * half
    )


def variable_recurrence_step(
    x_n: float, x_prev: float, spec: Osc1DSpec, eps_n: float, eps_prev: float
) -> float:
    """x_{n+1} from the variable-step recurrence.

    With a_n = sin ωε_n and b_n = sin ω(ε_n + ε_{n−1}) the recurrence reads
    a_{n−1}x_{n+1} − b_n x_n + a_n x_{n−1} = (g/ω²)(a_n + a_{n−1} − b_n).
    """
    omega = _require_frequency(spec)
    eps_n = _require_finite_step(eps_n)
    eps_prev = _require_finite_step(eps_prev)
    a_prev = _nonresonant_sin(omega, eps_prev, "variable recurrence")
    a_n = math.sin(omega * eps_n)
    b_n = math.sin(omega * (eps_n + eps_prev))
    rhs = spec.equilibrium * (a_n + a_prev - b_n)
    return (rhs + b_n * x_n - a_n * x_prev) / a_prev


def exact_velocity(x_next: float, x_n: float, spec: Osc1DSpec, eps: float) -> float:
    """v_n recovered from x_n and x_{n+1} = x(t_n + eps)."""
    omega = _require_frequency(spec)
    eps = _require_finite_step(eps)
    s = _nonresonant_sin(omega, eps, "velocity not recoverable from positions at this step")
    c = math.cos(omega * eps)
    return omega * (x_next - x_n * c) / s - (spec.g / omega) * math.tan(0.5 * omega * eps)


def difference_operator(x_next: float, x_n: float, omega: float, eps: float) -> float:
    """Exact derivative surrogate (x_{n+1} − cos(ωε)x_n)/(ω⁻¹ sin ωε)."""
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    s = _nonresonant_sin(omega, eps, "difference operator")
    return omega * (x_next - math.cos(omega * eps) * x_n) / s


def half_angle_delta(omega: float, eps: float) -> float:
    """Effective step δ = (2/ω) tan(ωε/2)."""
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    half = 0.5 * omega * eps
    if abs(math.cos(half)) < RESONANCE_THRESHOLD:
        raise ResonanceError(
            f"resonant step: tan(ωε/2) is singular for ω={omega:g}, eps={eps:g}",
            value=omega * omega,
        )
    return 2.0 / omega * math.tan(half)


def trapezoid_form_step(state: Phase1D, spec: Osc1DSpec, eps: float) -> Phase1D:
    """Advance by solving the trapezoid-like system with δ = (2/ω)tan(ωε/2).

    (x′ − x)/δ = ½(v′ + v),  (v′ − v)/δ = −½ω²(x′ + x) + g.
    """
    omega = _require_frequency(spec)
    eps = _require_finite_step(eps)
    delta = half_angle_delta(omega, eps)
    w2 = omega * omega
    half = 0.5 * delta
    lhs = np.array([[1.0, -half], [half * w2, 1.0]])
    rhs = np.array([
        state.x + half * state.v,
        state.v - half * w2 * state.x + delta * spec.g,
    ])
    x_new, v_new = linear_solve(lhs, rhs)
    return Phase1D(x=float(x_new), v=float(v_new), t=state.t + eps)


# ------------------------------------------------------------------
# Energies
# ------------------------------------------------------------------


def energy_invariants(x_n: float, x_next: float, spec: Osc1DSpec, eps: float) -> EnergyQuad:
    """The four discrete energies of the pair (x_n, x_{n+1}).

    e0 is the quadratic form of the recurrence, e1 its rescaling, e2 and e3
    the forms built on the exact velocity; with g = 0, e3 = e2.
    """
    omega = _require_frequency(spec)
    eps = _require_finite_step(eps)
    s = _nonresonant_sin(omega, eps, "energy invariants")
    c = math.cos(omega * eps)
    half = 0.5 * omega * eps
    g = spec.g
    D = 2.0 / omega * math.sin(half)
    w2 = omega * omega
    tan_half = math.tan(half)
    cos_half = math.cos(half)

    e0 = x_next * x_next - 2.0 * c * x_n * x_next + x_n * x_n - (x_n + x_next) * D * D * g
    e1 = (
        0.5 * ((x_next - x_n) / D) ** 2
        + 0.5 * w2 * x_n * x_next
        - 0.5 * (x_n + x_next) * g
    )
    w = omega * (x_next - x_n * c) / s
    e2 = 0.5 * w * w + 0.5 * w2 * x_n * x_n - (x_n + x_next) * g / (2.0 * cos_half * cos_half)
    v = w - (g / omega) * tan_half
    e3 = 0.5 * v * v + 0.5 * w2 * x_n * x_n - g * x_n
    return EnergyQuad(e0=e0, e1=e1, e2=e2, e3=e3)


def continuum_energy(state: Phase1D, spec: Osc1DSpec) -> float:
    """½v² + ½ω²x² − g·x."""
    return 0.5 * state.v * state.v + 0.5 * spec.omega * spec.omega * state.x * state.x - spec.g * state.x


__all__ = [
    "EnergyQuad",
    "Osc1DSpec",
    "Phase1D",
    "continuum_energy",
    "difference_operator",
    "energy_invariants",
    "exact_step",
    "exact_step_damped",
    "exact_velocity",
    "half_angle_delta",
    "recurrence_step",
    "trapezoid_form_step",
    "variable_recurrence_step",
]
