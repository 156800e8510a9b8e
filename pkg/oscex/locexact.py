"""Energy-preserving discrete gradient scheme with a locally exact step.

For ẍ = −Φ′(x) the scheme solves

    (v′ − v)/δ = −(Φ(x′) − Φ(x))/(x′ − x),   ½(v′ + v) = (x′ − x)/δ

which conserves ½v² + Φ(x) exactly for any positive δ. Choosing
δ = (2/ω)tan(ωε/2) with ω² = Φ″(x̄) makes the scheme exact for the
linearization of the force at x̄.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

from oscex.exact1d import Osc1DSpec, Phase1D, exact_step
from oscex.types import (
    RESONANCE_THRESHOLD,
    ConvergenceError,
    DeltaPolicy,
    ResonanceError,
)

logger = logging.getLogger(__name__)

SOLVER_TOLERANCE = 1e-13
SOLVER_MAX_ITERATIONS = 100
# Fixed-point sweeps before switching to Newton
NEWTON_AFTER = 20
# Relative gap below which the divided difference is replaced by Φ′(midpoint)
QUOTIENT_SWITCH = 1e-8
# Finite-difference check of Φ′ and Φ″ at construction
_FD_STEP = 1e-4
_FD_TOLERANCE = 1e-6

ScalarFunction = Callable[[float], float]


@dataclass(frozen=True)
class Potential:
    """Φ with its first two derivatives.

    The derivatives are checked against central differences of Φ at
    ``check_points`` when the potential is built.
    """

    phi: ScalarFunction
    dphi: ScalarFunction
    d2phi: ScalarFunction
    name: str = "custom"
    check_points: Tuple[float, ...] = (-0.7, 0.0, 0.5)

    def __post_init__(self) -> None:
        h = _FD_STEP
        for x in self.check_points:
            fd1 = (self.phi(x + h) - self.phi(x - h)) / (2.0 * h)
            d1 = self.dphi(x)
            if abs(fd1 - d1) > _FD_TOLERANCE * (1.0 + abs(d1)):
                raise ValueError(
                    f"potential {self.name}: Φ′({x:g})={d1:.10g} disagrees with "
                    f"finite difference {fd1:.10g}"
                )
            fd2 = (self.dphi(x + h) - self.dphi(x - h)) / (2.0 * h)
            d2 = self.d2phi(x)
            if abs(fd2 - d2) > _FD_TOLERANCE * (1.0 + abs(d2)):
                raise ValueError(
                    f"potential {self.name}: Φ″({x:g})={d2:.10g} disagrees with "
                    f"finite difference {fd2:.10g}"
                )

    def energy(self, state: Phase1D) -> float:
        """½v² + Φ(x)."""
        return 0.5 * state.v * state.v + self.phi(state.x)


def quadratic_potential(omega: float, g: float = 0.0) -> Potential:
    """Φ = ½ω²x² − g·x, the potential of ẍ + ω²x = g."""
    w2 = omega * omega
    return Potential(
        phi=lambda x: 0.5 * w2 * x * x - g * x,
        dphi=lambda x: w2 * x - g,
        d2phi=lambda x: w2,
        name="quadratic",
    )


def pendulum_potential(omega: float = 1.0) -> Potential:
    """Φ = −ω²cos x."""
    w2 = omega * omega
    return Potential(
        phi=lambda x: -w2 * math.cos(x),
        dphi=lambda x: w2 * math.sin(x),
        d2phi=lambda x: w2 * math.cos(x),
        name="pendulum",
    )


def duffing_potential(omega: float = 1.0, beta: float = 1.0) -> Potential:
    """Φ = ½ω²x² + ¼βx⁴."""
    w2 = omega * omega
    return Potential(
        phi=lambda x: 0.5 * w2 * x * x + 0.25 * beta * x**4,
        dphi=lambda x: w2 * x + beta * x**3,
        d2phi=lambda x: w2 + 3.0 * beta * x * x,
        name="duffing",
    )


POTENTIALS: Dict[str, Callable[..., Potential]] = {
    "quadratic": quadratic_potential,
    "pendulum": pendulum_potential,
    "duffing": duffing_potential,
}


@dataclass(frozen=True)
class DiscreteGradientResult:
    """One solved step plus solver diagnostics."""

    state: Phase1D
    iterations: int
    residual: float
    continued: bool


def discrete_gradient_quotient(pot: Potential, x_a: float, x_b: float) -> float:
    """(Φ(x_b) − Φ(x_a))/(x_b − x_a), or Φ′ at the midpoint for close points."""
    gap = x_b - x_a
    if abs(gap) < QUOTIENT_SWITCH * (1.0 + abs(x_a)):
        return pot.dphi(0.5 * (x_a + x_b))
    return (pot.phi(x_b) - pot.phi(x_a)) / gap


def local_delta_from_curvature(k: float, eps: float) -> float:
    """δ for squared frequency *k*: tan branch for k > 0, tanh branch for k < 0."""
    if k > 0:
        omega = math.sqrt(k)
        half = 0.5 * omega * eps
        if abs(half) >= 0.5 * math.pi or abs(math.cos(half)) < RESONANCE_THRESHOLD:
            raise ResonanceError(
                f"local step resonates: Φ″·ε² = {k * eps * eps:.6g} reaches π²", value=k
            )
        return 2.0 / omega * math.tan(half)
    if k < 0:
        mu = math.sqrt(-k)
        return 2.0 / mu * math.tanh(0.5 * mu * eps)
    return eps


def local_delta(pot: Potential, xbar: float, eps: float) -> float:
    """δ tuned to the linearization frequency ω² = Φ″(x̄)."""
    return local_delta_from_curvature(pot.d2phi(xbar), eps)


def _delta_for(
    pot: Potential, policy: DeltaPolicy, x: float, x_new: float, eps: float
) -> Tuple[float, bool]:
    if policy == DeltaPolicy.STANDARD:
        return eps, False
    xbar = x if policy == DeltaPolicy.LOCAL_AT_XN else 0.5 * (x + x_new)
    k = pot.d2phi(xbar)
    return local_delta_from_curvature(k, eps), k < 0


def _predict(state: Phase1D, pot: Potential, eps: float) -> float:
    """Position after the exact flow of the force linearized at x."""
    k = pot.d2phi(state.x)
    if k > 0 and k * eps * eps < math.pi * math.pi:
        linear = Osc1DSpec(omega=math.sqrt(k), g=k * state.x - pot.dphi(state.x))
        return exact_step(state, linear, eps).x
    return state.x + eps * state.v - 0.5 * eps * eps * pot.dphi(state.x)


def discrete_gradient_solve(
    state: Phase1D, pot: Potential, eps: float, policy: DeltaPolicy
) -> DiscreteGradientResult:
    """Solve one step of the scheme for (x′, v′).

    Eliminating v′ = 2(x′ − x)/δ − v leaves the scalar equation
    F(x′) = x′ − x − δv + ½δ²Q(x, x′) = 0, solved by fixed-point sweeps with
    a Newton fallback. δ is refreshed every sweep for the midpoint policy.
    Negative *eps* runs the map backwards.
    """
    eps = float(eps)
    if eps == 0.0 or not math.isfinite(eps):
        raise ValueError(f"eps must be finite and non-zero, got {eps}")
    policy = DeltaPolicy(policy)
    x, v = state.x, state.v

    def residual(x_new: float, delta: float) -> float:
        return x_new - x - delta * v + 0.5 * delta * delta * discrete_gradient_quotient(pot, x, x_new)

    x_new = _predict(state, pot, eps)
    continued = False
    previous_step = math.inf
    converged = False
    iterations = 0
    for iterations in range(1, SOLVER_MAX_ITERATIONS + 1):
        delta, hyperbolic = _delta_for(pot, policy, x, x_new, eps)
        continued = continued or hyperbolic
        res = residual(x_new, delta)
        if iterations > NEWTON_AFTER:
            gap = x_new - x
            if abs(gap) < QUOTIENT_SWITCH * (1.0 + abs(x)):
                slope = 0.5 * pot.d2phi(0.5 * (x + x_new))
            else:
                slope = (pot.dphi(x_new) - discrete_gradient_quotient(pot, x, x_new)) / gap
            update = -res / (1.0 + 0.5 * delta * delta * slope)
        else:
            update = -res
        x_new += update
        step = abs(update)
        if step <= SOLVER_TOLERANCE * (1.0 + abs(x_new)):
            # one more sweep takes the iterate to round-off level
            delta, _ = _delta_for(pot, policy, x, x_new, eps)
            x_new -= residual(x_new, delta)
            converged = True
            break
        previous_step = step

    delta, hyperbolic = _delta_for(pot, policy, x, x_new, eps)
    continued = continued or hyperbolic
    final_residual = abs(residual(x_new, delta))
    if not converged:
        raise ConvergenceError(
            f"discrete gradient solve did not converge in {SOLVER_MAX_ITERATIONS} iterations "
            f"(last update {previous_step:.3e})",
            iterations=SOLVER_MAX_ITERATIONS,
            residual=final_residual,
        )
    if continued:
        logger.debug(
            "Φ″ ≤ 0 at the reference point of step t=%g; using the hyperbolic continuation",
            state.t,
        )

    v_new = 2.0 * (x_new - x) / delta - v
    return DiscreteGradientResult(
        state=Phase1D(x=x_new, v=v_new, t=state.t + eps),
        iterations=iterations,
        residual=final_residual,
        continued=continued,
    )


def discrete_gradient_step(
    state: Phase1D, pot: Potential, eps: float, policy: DeltaPolicy
) -> Phase1D:
    """Advance one step of the discrete gradient scheme."""
    return discrete_gradient_solve(state, pot, eps, policy).state


__all__ = [
    "DiscreteGradientResult",
    "POTENTIALS",
    "Potential",
    "discrete_gradient_quotient",
    "discrete_gradient_solve",
    "discrete_gradient_step",
    "duffing_potential",
    "local_delta",
    "local_delta_from_curvature",
    "pendulum_potential",
    "quadratic_potential",
]
