"""Reference schemes compared against the exact steppers.

Gautschi's two-step trigonometric method, explicit and implicit
Euler–Lawson, exponential Euler and the symmetric Euler baseline.
The exponential schemes work on the first-order form ẏ = Ly + g(y).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Tuple

import numpy as np

from oscex.phasefun import as_square_matrix, linear_solve
from oscex.types import SERIES_MAX_TERMS, SERIES_TOLERANCE, ConvergenceError

logger = logging.getLogger(__name__)

IMPLICIT_TOLERANCE = 1e-13
IMPLICIT_MAX_ITERATIONS = 100
# Damping of the fixed-point update y ← y − ω·r(y); ω = 1 is the plain iteration
IMPLICIT_RELAXATION = 0.8


@dataclass(frozen=True)
class NonlinearForce:
    """g(x) with an optional Jacobian for Newton solves."""

    func: Callable[[np.ndarray], Any]
    jacobian: Optional[Callable[[np.ndarray], Any]] = None

    def __call__(self, x: Any) -> np.ndarray:
        value = np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float)
        if not np.all(np.isfinite(value)):
            raise ValueError(f"nonlinear force returned non-finite values at {x}")
        return value


@dataclass(frozen=True)
class LinearPart:
    """The constant linear operator L of ẏ = Ly + g(y)."""

    L: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "L", as_square_matrix(self.L, "L"))


def oscillator_linear_part(omega: float) -> LinearPart:
    """L = [[0, 1], [−ω², 0]] for y = (x, v)."""
    return LinearPart(np.array([[0.0, 1.0], [-omega * omega, 0.0]]))


def constant_force(g: float) -> NonlinearForce:
    """g(y) = (0, g) in first-order oscillator form."""
    value = np.array([0.0, float(g)])
    return NonlinearForce(lambda _y: value)


def exp_and_phi1(M: Any) -> Tuple[np.ndarray, np.ndarray]:
    """e^M and φ₁(M) = (e^M − I)/M by scaling and squaring.

    M is scaled by 2^-j until ‖M‖₁ ≤ 1/2, both Taylor series are summed, and
    the doubling rules e^{2Z} = (e^Z)², φ₁(2Z) = ½φ₁(Z)(e^Z + I) undo the
    scaling.
    """
    M = as_square_matrix(M, "M")
    n = M.shape[0]
    identity = np.eye(n)

    norm = float(np.linalg.norm(M, 1))
    squarings = 0
    while norm > 0.5:
        norm /= 2.0
        squarings += 1
    Z = M / 2.0**squarings

    expo = identity.copy()
    phi = identity.copy()
    term = identity.copy()
    for k in range(1, SERIES_MAX_TERMS + 1):
        # term = Z^k / k!, φ₁ picks up Z^k/(k+1)!
        term = term @ Z / k
        expo += term
        phi_term = term / (k + 1)
        phi += phi_term
        if float(np.max(np.abs(term))) <= SERIES_TOLERANCE:
            break
    else:
        raise ConvergenceError(
            f"exponential series did not converge in {SERIES_MAX_TERMS} terms",
            iterations=SERIES_MAX_TERMS,
            residual=float(np.max(np.abs(term))),
        )

    for _ in range(squarings):
        phi = 0.5 * (phi @ (expo + identity))
        expo = expo @ expo
    return expo, phi


# ------------------------------------------------------------------
# Two-step trigonometric schemes
# ------------------------------------------------------------------


def gautschi_step(
    x_n: Any, x_prev: Any, omega: float, eps: float, g: NonlinearForce
) -> np.ndarray:
    """x_{n+1} = 2cos(ωε)x_n − x_{n−1} + (2/ω·sin(ωε/2))² g(x_n)."""
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    x_n = np.asarray(x_n, dtype=float)
    x_prev = np.asarray(x_prev, dtype=float)
    weight = (2.0 / omega * math.sin(0.5 * omega * eps)) ** 2
    return 2.0 * math.cos(omega * eps) * x_n - x_prev + weight * g(x_n)


def gautschi_start(
    x0: Any, v0: Any, omega: float, eps: float, g: NonlinearForce
) -> np.ndarray:
    """x_1 from the exact linear flow with g frozen at x_0."""
    if omega <= 0:
        raise ValueError(f"omega must be positive, got {omega}")
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    c = math.cos(omega * eps)
    s = math.sin(omega * eps)
    return c * x0 + (s / omega) * v0 + (1.0 - c) / (omega * omega) * g(x0)


def symmetric_euler_step(
    x_n: Any, x_prev: Any, omega: float, eps: float, g_const: float
) -> Any:
    """x_{n+1} = 2x_n − x_{n−1} − ε²ω²x_n + ε²g."""
    e2 = eps * eps
    return 2.0 * np.asarray(x_n) - np.asarray(x_prev) - e2 * omega * omega * np.asarray(x_n) + e2 * g_const


def symmetric_euler_start(
    x0: Any, v0: Any, omega: float, eps: float, g_const: float
) -> Any:
    """x_1 = x_0 + εv_0 + ½ε²(g − ω²x_0)."""
    x0 = np.asarray(x0, dtype=float)
    return x0 + eps * np.asarray(v0, dtype=float) + 0.5 * eps * eps * (g_const - omega * omega * x0)


# ------------------------------------------------------------------
# Exponential schemes
# ------------------------------------------------------------------


def lawson_explicit_step(
    y: Any, L: LinearPart, eps: float, g: NonlinearForce
) -> np.ndarray:
    """y′ = e^{εL}(y + εg(y))."""
    y = np.asarray(y, dtype=float)
    expo, _ = exp_and_phi1(eps * L.L)
    return expo @ (y + eps * g(y))


def lawson_implicit_step(
    y: Any,
    L: LinearPart,
    eps: float,
    g: NonlinearForce,
    *,
    tol: float = IMPLICIT_TOLERANCE,
    max_iterations: int = IMPLICIT_MAX_ITERATIONS,
    relaxation: float = IMPLICIT_RELAXATION,
) -> np.ndarray:
    """Solve y′ = e^{εL}y + εg(y′).

    Uses damped fixed-point iteration, or Newton's method when the force
    carries a Jacobian. With ω = *relaxation* the damped update contracts
    when every eigenvalue λ of ε∂g has |1 − ω + ωλ| < 1. Raises
    ConvergenceError after *max_iterations*.
    """
    if not 0.0 < relaxation <= 1.0:
        raise ValueError(f"relaxation must lie in (0, 1], got {relaxation}")
    y = np.asarray(y, dtype=float)
    expo, _ = exp_and_phi1(eps * L.L)
    linear = expo @ y
    identity = np.eye(y.shape[0])

    def residual(candidate: np.ndarray) -> np.ndarray:
        return candidate - linear - eps * g(candidate)

    current = linear + eps * g(y)
    res = residual(current)
    for iteration in range(1, max_iterations + 1):
        size = float(np.max(np.abs(res)))
        if size <= tol * (1.0 + float(np.max(np.abs(current)))):
            logger.debug("implicit Lawson converged after %d iterations", iteration - 1)
            return current
        if g.jacobian is not None:
            jac = identity - eps * np.asarray(g.jacobian(current), dtype=float)
            current = current - linear_solve(jac, res)
        else:
            current = current - relaxation * res
        res = residual(current)

    size = float(np.max(np.abs(res)))
    if size <= tol * (1.0 + float(np.max(np.abs(current)))):
        return current
    raise ConvergenceError(
        f"implicit Lawson step did not converge in {max_iterations} iterations "
        f"(residual {size:.3e})",
        iterations=max_iterations,
        residual=size,
    )


def exponential_euler_step(
    y: Any, L: LinearPart, eps: float, g: NonlinearForce
) -> np.ndarray:
    """y′ = e^{εL}y + εφ₁(εL)g(y)."""
    y = np.asarray(y, dtype=float)
    expo, phi = exp_and_phi1(eps * L.L)
    return expo @ y + eps * (phi @ g(y))


__all__ = [
    "LinearPart",
    "NonlinearForce",
    "constant_force",
    "exp_and_phi1",
    "exponential_euler_step",
    "gautschi_start",
    "gautschi_step",
    "lawson_explicit_step",
    "lawson_implicit_step",
    "oscillator_linear_part",
    "symmetric_euler_start",
    "symmetric_euler_step",
]
