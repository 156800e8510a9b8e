"""Matrix phase functions of the squared frequency operator.

Evaluates c = cos(Ωε), s = Ω⁻¹ sin(Ωε) and vers = Ω⁻²(1 − cos Ωε) directly
from A = Ω² as even power series, so Ω itself is never formed and matrices
with negative eigenvalues continue to the hyperbolic functions. Large
arguments are reduced by halving ε until ‖ε²A‖₁ ≤ 1 and rebuilt with the
double-angle identities.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from oscex.types import (
    CONDITION_LIMIT,
    RESONANCE_THRESHOLD,
    SERIES_MAX_TERMS,
    SERIES_TOLERANCE,
    SYMMETRY_TOLERANCE,
    ConvergenceError,
    IllConditionedError,
    ResonanceError,
)

logger = logging.getLogger(__name__)


def as_square_matrix(value: Any, name: str = "A") -> np.ndarray:
    """Return *value* as a finite, square float64 matrix.

    Scalars are promoted to 1×1 matrices. The result is a fresh read-only
    array.
    """
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def is_symmetric(A: np.ndarray) -> bool:
    """True when A equals its transpose up to SYMMETRY_TOLERANCE (relative)."""
    scale = max(1.0, float(np.max(np.abs(A))))
    return float(np.max(np.abs(A - A.T))) <= SYMMETRY_TOLERANCE * scale


def _symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _frozen(M: np.ndarray) -> np.ndarray:
    M.setflags(write=False)
    return M


@dataclass(frozen=True)
class PhaseFunctionSet:
    """cos(Ωε), Ω⁻¹ sin(Ωε) and Ω⁻²(1 − cos Ωε) for one matrix and one step."""

    c: np.ndarray
    s: np.ndarray
    vers: np.ndarray
    eps: float

    @property
    def dimension(self) -> int:
        return int(self.c.shape[0])


def _reduced_series(Z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Sum the three even series at Z = h²A with ‖Z‖₁ ≤ 1.

    Returns (c, s/h, vers/h², terms used).
    """
    n = Z.shape[0]
    identity = np.eye(n)
    c = identity.copy()
    s = identity.copy()
    vers = 0.5 * identity

    term = identity.copy()
    coef_c, coef_s, coef_v = 1.0, 1.0, 0.5
    for k in range(1, SERIES_MAX_TERMS + 1):
        term = -(term @ Z)
        coef_c /= (2 * k - 1) * (2 * k)
        coef_s /= (2 * k) * (2 * k + 1)
        coef_v /= (2 * k + 1) * (2 * k + 2)
        dc = coef_c * term
        c += dc
        s += coef_s * term
        vers += coef_v * term
        # coef_c dominates the other two coefficients, so dc bounds all updates
        size = float(np.max(np.abs(dc)))
        if size <= SERIES_TOLERANCE * max(float(np.max(np.abs(c))), 1e-300):
            return c, s, vers, k
    raise ConvergenceError(
        f"phase function series did not converge in {SERIES_MAX_TERMS} terms "
        f"(last term size {size:.3e})",
        iterations=SERIES_MAX_TERMS,
        residual=size,
    )


def phase_functions(A: Any, eps: float) -> PhaseFunctionSet:
    """Evaluate the phase functions of A = Ω² at step *eps*.

    Works for any finite square A (singular and indefinite included) and
    any finite eps, negative or zero. s is odd in eps, c and vers are even.
    """
    A = as_square_matrix(A)
    eps = float(eps)
    if not np.isfinite(eps):
        raise ValueError(f"eps must be finite, got {eps}")

    n = A.shape[0]
    if eps == 0.0:
        zeros = np.zeros((n, n))
        return PhaseFunctionSet(
            c=_frozen(np.eye(n)), s=_frozen(zeros.copy()), vers=_frozen(zeros), eps=0.0
        )

    norm = eps * eps * float(np.linalg.norm(A, 1))
    halvings = 0
    while norm > 1.0:
        norm /= 4.0
        halvings += 1
    h = eps / 2.0**halvings

    c, s_unit, vers_unit, terms = _reduced_series((h * h) * A)
    s = h * s_unit
    vers = (h * h) * vers_unit

    identity = np.eye(n)
    for _ in range(halvings):
        # cos 2θ = 2cos²θ − 1, sin 2θ = 2 sinθ cosθ, 1 − cos 2θ = 2 sin²θ
        c, s, vers = 2.0 * (c @ c) - identity, 2.0 * (s @ c), 2.0 * (s @ s)

    if is_symmetric(A):
        c, s, vers = _symmetrize(c), _symmetrize(s), _symmetrize(vers)

    logger.debug(
        "phase functions: n=%d eps=%g halvings=%d terms=%d", n, eps, halvings, terms
    )
    return PhaseFunctionSet(c=_frozen(c), s=_frozen(s), vers=_frozen(vers), eps=eps)


def smallest_singular_value(M: Any) -> float:
    """Smallest singular value of a square matrix."""
    return float(np.linalg.svd(as_square_matrix(M, "M"), compute_uv=False)[-1])


def _resonant_eigenvalue_estimate(A: np.ndarray, M: np.ndarray) -> float:
    """Rayleigh quotient of A on the direction that M = I + c nearly annihilates."""
    _, _, vt = np.linalg.svd(M)
    u = vt[-1]
    return float(u @ A @ u / (u @ u))


def effective_delta(A: Any, eps: float) -> np.ndarray:
    """Return δ = 2Ω⁻¹ tan(Ωε/2), computed as 2·s·(I + c)⁻¹.

    For a zero eigenvalue the corresponding action is ε. Raises
    ResonanceError when some eigenvalue puts Ωε at an odd multiple of π,
    detected as a singular value of I + cos(Ωε) below RESONANCE_THRESHOLD
    or a failed condition check.
    """
    A = as_square_matrix(A)
    pf = phase_functions(A, eps)
    M = np.eye(A.shape[0]) + pf.c
    sigma = smallest_singular_value(M)
    if sigma < RESONANCE_THRESHOLD:
        lam = _resonant_eigenvalue_estimate(A, M)
        raise ResonanceError(
            f"resonant step eps={eps:g}: I + cos(Ωε) is singular near eigenvalue "
            f"{lam:.6g} of Ω² (smallest singular value {sigma:.3e})",
            value=lam,
        )
    try:
        # s and c commute, so (I + c)⁻¹·2s = 2s·(I + c)⁻¹
        delta = linear_solve(M, 2.0 * pf.s)
    except IllConditionedError as exc:
        lam = _resonant_eigenvalue_estimate(A, M)
        raise ResonanceError(
            f"resonant step eps={eps:g}: I + cos(Ωε) is singular near eigenvalue "
            f"{lam:.6g} of Ω² (condition {exc.condition:.3e})",
            value=lam,
        ) from exc
    if is_symmetric(A):
        delta = _symmetrize(delta)
    return _frozen(delta)


def linear_solve(A: Any, b: Any) -> np.ndarray:
    """Solve A·x = b with partial pivoting.

    *b* may be a vector or a matrix of right-hand sides. Raises
    IllConditionedError carrying the 1-norm condition estimate when A is
    singular or its condition exceeds CONDITION_LIMIT.
    """
    A = as_square_matrix(A)
    b = np.asarray(b, dtype=float)
    if b.ndim == 0 or b.shape[0] != A.shape[0]:
        raise ValueError(
            f"right-hand side of shape {b.shape} does not match a {A.shape[0]}x{A.shape[0]} matrix"
        )
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side has non-finite entries")

    condition = float(np.linalg.cond(A, 1))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise IllConditionedError(
            f"matrix is singular or ill-conditioned (condition estimate {condition:.3e})",
            condition=condition,
        )
    lu, piv = lu_factor(A, check_finite=False)
    return lu_solve((lu, piv), b, check_finite=False)


__all__ = [
    "PhaseFunctionSet",
    "as_square_matrix",
    "effective_delta",
    "is_symmetric",
    "linear_solve",
    "phase_functions",
    "smallest_singular_value",
]
