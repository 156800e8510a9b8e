"""Three-parameter family of symplectic linear maps.

For coefficients (α, β, γ) the map sends (x_n, p_n) to (x_{n+1}, p_{n+1})
with p_n = αx_{n+1} − βx_n and x_{n+1} − γx_n + x_{n−1} = 0. Its matrix has
unit determinant for every choice with α ≠ 0, and the quadratic form
x² − γxx′ + x′² is conserved along its orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Tuple

import numpy as np

from oscex.types import RESONANCE_THRESHOLD, ResonanceError

REVERSIBILITY_TOLERANCE = 1e-12

Coefficient = Callable[[float], float]


@dataclass(frozen=True)
class FamilyParams:
    """Coefficients of one member of the family, evaluated at step *eps*."""

    alpha: float
    beta: float
    gamma: float
    eps: float


@dataclass(frozen=True)
class FamilyRule:
    """Step-size dependent coefficient functions α(ε), β(ε), γ(ε)."""

    alpha: Coefficient
    beta: Coefficient
    gamma: Coefficient
    name: str = "custom"

    def __call__(self, eps: float) -> FamilyParams:
        return FamilyParams(
            alpha=float(self.alpha(eps)),
            beta=float(self.beta(eps)),
            gamma=float(self.gamma(eps)),
            eps=float(eps),
        )


@dataclass(frozen=True)
class ReversibilityReport:
    """Outcome of the time-reversibility check of a rule at one step."""

    reversible: bool
    alpha_residual: float
    gamma_residual: float
    inverse_residual: Optional[float] = None


def family_matrix(p: FamilyParams) -> np.ndarray:
    """Matrix of the map acting on (x, p) column vectors."""
    if p.alpha == 0:
        raise ValueError(f"alpha must be non-zero (eps={p.eps:g})")
    a, b, g = p.alpha, p.beta, p.gamma
    return np.array([
        [b / a, 1.0 / a],
        [g * b - (a * a + b * b) / a, g - b / a],
    ])


def family_step(x: float, p_mom: float, params: FamilyParams) -> Tuple[float, float]:
    """Apply the family map to one (x, p) pair."""
    x_new, p_new = family_matrix(params) @ np.array([x, p_mom])
    return float(x_new), float(p_new)


def quadratic_invariant(x_n: float, x_next: float, gamma: float) -> float:
    """x_{n+1}² − γx_{n+1}x_n + x_n²."""
    return x_next * x_next - gamma * x_next * x_n + x_n * x_n


def check_reversibility(rule: FamilyRule, eps: float) -> ReversibilityReport:
    """Test α(−ε) = −α(ε) and γ(ε) = (β(ε) − β(−ε))/α(ε) at *eps*.

    Residuals are relative to the size of α and γ. When both conditions
    hold the inverse relation A(−ε)·A(ε) = I is verified as well.
    """
    forward = rule(eps)
    backward = rule(-eps)
    if forward.alpha == 0:
        raise ValueError(f"alpha({eps:g}) is zero")

    alpha_residual = abs(backward.alpha + forward.alpha) / max(1.0, abs(forward.alpha))
    gamma_expected = (forward.beta - backward.beta) / forward.alpha
    gamma_residual = abs(forward.gamma - gamma_expected) / max(1.0, abs(forward.gamma))
    constraints_hold = (
        alpha_residual <= REVERSIBILITY_TOLERANCE and gamma_residual <= REVERSIBILITY_TOLERANCE
    )
    if not constraints_hold:
        return ReversibilityReport(False, alpha_residual, gamma_residual)

    product = family_matrix(backward) @ family_matrix(forward)
    inverse_residual = float(np.max(np.abs(product - np.eye(2))))
    return ReversibilityReport(
        reversible=inverse_residual <= REVERSIBILITY_TOLERANCE,
        alpha_residual=alpha_residual,
        gamma_residual=gamma_residual,
        inverse_residual=inverse_residual,
    )


def exact_family_params(m: float, omega: float, eps: float) -> FamilyParams:
    """Coefficients that make the family the exact oscillator map."""
    if m <= 0 or omega <= 0:
        raise ValueError(f"mass and omega must be positive, got m={m}, omega={omega}")
    s = math.sin(omega * eps)
    if abs(s) < RESONANCE_THRESHOLD:
        raise ResonanceError(
            f"resonant step: sin(ωε) vanishes for ω={omega:g}, eps={eps:g}", value=omega * omega
        )
    c = math.cos(omega * eps)
    return FamilyParams(
        alpha=m * omega / s,
        beta=m * omega * c / s,
        gamma=2.0 * c,
        eps=float(eps),
    )


# ------------------------------------------------------------------
# Rules
# ------------------------------------------------------------------


def exact_family_rule(m: float, omega: float) -> FamilyRule:
    """α = mω/sin ωε, β = mω cot ωε, γ = 2cos ωε."""

    def alpha(eps: float) -> float:
        return exact_family_params(m, omega, eps).alpha

    def beta(eps: float) -> float:
        return exact_family_params(m, omega, eps).beta

    def gamma(eps: float) -> float:
        return 2.0 * math.cos(omega * eps)

    return FamilyRule(alpha=alpha, beta=beta, gamma=gamma, name="exact")


def stormer_verlet_rule(m: float, omega: float) -> FamilyRule:
    """Member reproducing the symmetric Euler recurrence, γ = 2 − ε²ω²."""
    return FamilyRule(
        alpha=lambda eps: m / eps,
        beta=lambda eps: m / eps * (1.0 - 0.5 * eps * eps * omega * omega),
        gamma=lambda eps: 2.0 - eps * eps * omega * omega,
        name="stormer_verlet",
    )


FAMILY_RULES: Dict[str, Callable[[float, float], FamilyRule]] = {
    "exact": exact_family_rule,
    "stormer_verlet": stormer_verlet_rule,
}


def continuum_limits(
    rule: FamilyRule, eps_grid: Iterable[float] = (1e-2, 1e-3, 1e-4)
) -> Tuple[float, float, float]:
    """Limits of εα(ε), εβ(ε) and (2 − γ(ε))/ε² as ε → 0.

    The two smallest grid steps are combined by Richardson extrapolation
    assuming an O(ε²) leading error.
    """
    grid = sorted(float(e) for e in eps_grid)
    if len(grid) < 2 or grid[0] <= 0:
        raise ValueError("eps_grid needs at least two positive steps")
    fine, coarse = grid[0], grid[1]

    def samples(eps: float) -> np.ndarray:
        p = rule(eps)
        return np.array([eps * p.alpha, eps * p.beta, (2.0 - p.gamma) / (eps * eps)])

    ratio = (coarse / fine) ** 2
    limits = (ratio * samples(fine) - samples(coarse)) / (ratio - 1.0)
    return float(limits[0]), float(limits[1]), float(limits[2])


__all__ = [
    "FAMILY_RULES",
    "FamilyParams",
    "FamilyRule",
    "ReversibilityReport",
    "check_reversibility",
    "continuum_limits",
    "exact_family_params",
    "exact_family_rule",
    "family_matrix",
    "family_step",
    "quadratic_invariant",
    "stormer_verlet_rule",
]
