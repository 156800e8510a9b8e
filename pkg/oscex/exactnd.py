"""Exact steppers for the multidimensional oscillator ẍ + Ω²x = f(t).

The matrix A = Ω² only enters through the phase functions of
:mod:`oscex.phasefun`, so singular and indefinite A are fine for the free
and constant-force maps. Time-dependent forcing goes through the
particular solution Φ(t) with Φ̈ + AΦ = f(t), available in closed form for
polynomial, exponential and sinusoidal drives and their sums.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Annotated, Any, List, Literal, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, field_validator, model_validator

from oscex.phasefun import (
    PhaseFunctionSet,
    as_square_matrix,
    effective_delta,
    is_symmetric,
    linear_solve,
    phase_functions,
    smallest_singular_value,
)
from oscex.types import RESONANCE_THRESHOLD, IllConditionedError, ResonanceError

logger = logging.getLogger(__name__)


# ------------------------------------------------------------------
# Forcing
# ------------------------------------------------------------------


class _ForcingModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    def dimension(self) -> Optional[int]:
        """Vector dimension implied by the forcing, None when unconstrained."""
        return None


class NoForcing(_ForcingModel):
    type: Literal["none"] = "none"


class ConstantForcing(_ForcingModel):
    type: Literal["constant"] = "constant"
    a: List[float] = Field(..., min_length=1)

    def dimension(self) -> Optional[int]:
        return len(self.a)


class PolynomialForcing(_ForcingModel):
    """f(t) = Σ c_k t^k with vector coefficients c_0 … c_N, c_N ≠ 0."""

    type: Literal["polynomial"] = "polynomial"
    coeffs: List[List[float]] = Field(..., min_length=1)

    @field_validator("coeffs")
    @classmethod
    def _rectangular_with_leading_term(cls, coeffs: List[List[float]]) -> List[List[float]]:
        widths = {len(c) for c in coeffs}
        if len(widths) != 1 or 0 in widths:
            raise ValueError("polynomial coefficients must be non-empty vectors of equal length")
        if not any(value != 0 for value in coeffs[-1]):
            raise ValueError("leading polynomial coefficient c_N must be non-zero")
        return coeffs

    def dimension(self) -> Optional[int]:
        return len(self.coeffs[0])

    @property
    def matrix(self) -> np.ndarray:
        """Coefficients as an (N+1) × n array, lowest degree first."""
        return np.array(self.coeffs, dtype=float)


class ExponentialForcing(_ForcingModel):
    """f(t) = e^{αt} f₀."""

    type: Literal["exponential"] = "exponential"
    f0: List[float] = Field(..., min_length=1)
    alpha: float

    def dimension(self) -> Optional[int]:
        return len(self.f0)


class SinusoidalForcing(_ForcingModel):
    """f(t) = sin(ω_f t) f₀."""

    type: Literal["sinusoidal"] = "sinusoidal"
    f0: List[float] = Field(..., min_length=1)
    omega_f: float

    def dimension(self) -> Optional[int]:
        return len(self.f0)


class SumForcing(_ForcingModel):
    type: Literal["sum"] = "sum"
    terms: List["Forcing"] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _consistent_dimensions(self) -> "SumForcing":
        dims = {term.dimension() for term in self.terms} - {None}
        if len(dims) > 1:
            raise ValueError(f"sum forcing mixes dimensions {sorted(dims)}")
        return self

    def dimension(self) -> Optional[int]:
        for term in self.terms:
            dim = term.dimension()
            if dim is not None:
                return dim
        return None


Forcing = Annotated[
    Union[
        NoForcing,
        ConstantForcing,
        PolynomialForcing,
        ExponentialForcing,
        SinusoidalForcing,
        SumForcing,
    ],
    Field(discriminator="type"),
]

SumForcing.model_rebuild()

_FORCING_ADAPTER: TypeAdapter[Any] = TypeAdapter(Forcing)


def parse_forcing(data: Any) -> Any:
    """Validate a ``{"type": ...}`` mapping into a forcing model."""
    return _FORCING_ADAPTER.validate_python(data)


def is_constant_forcing(forcing: Any) -> bool:
    return isinstance(forcing, (NoForcing, ConstantForcing))


# ------------------------------------------------------------------
# State and problem
# ------------------------------------------------------------------


def _frozen_vector(value: Any, name: str) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhaseND:
    """Position and velocity vectors with a time stamp."""

    x: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        x = _frozen_vector(self.x, "x")
        v = _frozen_vector(self.v, "v")
        if x.shape != v.shape:
            raise ValueError(f"x and v dimensions differ: {x.shape[0]} vs {v.shape[0]}")
        if not math.isfinite(self.t):
            raise ValueError(f"t must be finite, got {self.t}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return int(self.x.shape[0])


@dataclass(frozen=True)
class OscNDSpec:
    """A = Ω² together with the forcing term."""

    A: np.ndarray
    forcing: Any = field(default_factory=NoForcing)
    symmetric: bool = field(init=False)

    def __post_init__(self) -> None:
        A = as_square_matrix(self.A)
        object.__setattr__(self, "A", A)
        dim = self.forcing.dimension()
        if dim is not None and dim != A.shape[0]:
            raise ValueError(
                f"forcing dimension {dim} does not match {A.shape[0]}x{A.shape[0]} matrix"
            )
        object.__setattr__(self, "symmetric", is_symmetric(A))

    @property
    def n(self) -> int:
        return int(self.A.shape[0])


def _check_vector(vec: Any, spec: OscNDSpec, name: str) -> np.ndarray:
    arr = np.asarray(vec, dtype=float)
    if arr.shape != (spec.n,):
        raise ValueError(f"{name} has shape {arr.shape}, expected ({spec.n},)")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _check_state(state: PhaseND, spec: OscNDSpec) -> None:
    if state.n != spec.n:
        raise ValueError(f"state dimension {state.n} does not match problem dimension {spec.n}")


def constant_term(spec: OscNDSpec) -> np.ndarray:
    """The constant force a, zero for unforced problems."""
    forcing = spec.forcing
    if isinstance(forcing, NoForcing):
        return np.zeros(spec.n)
    if isinstance(forcing, ConstantForcing):
        return np.array(forcing.a, dtype=float)
    raise ValueError(
        f"this operation needs forcing 'none' or 'constant', got '{forcing.type}'"
    )


def _phase(spec: OscNDSpec, eps: float, phase: Optional[PhaseFunctionSet]) -> PhaseFunctionSet:
    if phase is not None and phase.eps == eps and phase.dimension == spec.n:
        return phase
    return phase_functions(spec.A, eps)


def _solve_resonant(M: np.ndarray, rhs: np.ndarray, message: str, value: float) -> np.ndarray:
    try:
        return linear_solve(M, rhs)
    except IllConditionedError as exc:
        raise ResonanceError(f"{message} (condition {exc.condition:.3e})", value=value) from exc


def _solve_sine(pf: PhaseFunctionSet, rhs: np.ndarray) -> np.ndarray:
    """Solve s·y = rhs, refusing steps where sin(Ωε) is singular relative to ε."""
    eps = pf.eps
    sigma = smallest_singular_value(pf.s)
    if sigma < RESONANCE_THRESHOLD * abs(eps):
        raise ResonanceError(
            f"resonant step eps={eps:g}: sin(Ωε) is singular (smallest singular value {sigma:.3e})",
            value=float(eps),
        )
    return _solve_resonant(pf.s, rhs, f"resonant step eps={eps:g}: sin(Ωε) is singular", float(eps))


# ------------------------------------------------------------------
# Steppers
# ------------------------------------------------------------------


def nd_exact_step(
    state: PhaseND,
    spec: OscNDSpec,
    eps: float,
    *,
    phase: Optional[PhaseFunctionSet] = None,
) -> PhaseND:
    """Exact map for free or constant-force problems; ε may vary per call."""
    _check_state(state, spec)
    a = constant_term(spec)
    pf = _phase(spec, eps, phase)
    x, v = state.x, state.v
    return PhaseND(
        x=pf.c @ x + pf.s @ v + pf.vers @ a,
        v=-spec.A @ (pf.s @ x) + pf.c @ v + pf.s @ a,
        t=state.t + eps,
    )


def nd_forced_step(
    state: PhaseND,
    spec: OscNDSpec,
    eps: float,
    *,
    phase: Optional[PhaseFunctionSet] = None,
) -> PhaseND:
    """Exact one-step map for any supported forcing, through Φ(t)."""
    if is_constant_forcing(spec.forcing):
        return nd_exact_step(state, spec, eps, phase=phase)
    _check_state(state, spec)
    pf = _phase(spec, eps, phase)
    phi0, dphi0 = particular_solution(spec.forcing, spec.A, state.t)
    phi1, dphi1 = particular_solution(spec.forcing, spec.A, state.t + eps)
    dx = state.x - phi0
    dv = state.v - dphi0
    return PhaseND(
        x=pf.c @ dx + pf.s @ dv + phi1,
        v=-spec.A @ (pf.s @ dx) + pf.c @ dv + dphi1,
        t=state.t + eps,
    )


def nd_trapezoid_step(
    state: PhaseND,
    spec: OscNDSpec,
    eps: float,
    *,
    delta: Optional[np.ndarray] = None,
) -> PhaseND:
    """Advance by the trapezoid-like system with δ = 2Ω⁻¹tan(Ωε/2).

    δ⁻¹(x′ − x) = ½(v′ + v),  δ⁻¹(v′ − v) = −½A(x′ + x) + a.
    """
    _check_state(state, spec)
    a = constant_term(spec)
    if delta is None:
        delta = effective_delta(spec.A, eps)
    n = spec.n
    identity = np.eye(n)
    half = 0.5 * delta
    half_a = half @ spec.A
    lhs = np.block([[identity, -half], [half_a, identity]])
    rhs = np.concatenate([
        state.x + half @ state.v,
        state.v - half_a @ state.x + delta @ a,
    ])
    solution = linear_solve(lhs, rhs)
    return PhaseND(x=solution[:n], v=solution[n:], t=state.t + eps)


def nd_recurrence_step(
    x_n: Any,
    x_prev: Any,
    spec: OscNDSpec,
    eps: float,
    *,
    phase: Optional[PhaseFunctionSet] = None,
) -> np.ndarray:
    """x_{n+1} = 2c·x_n − x_{n−1} + 2·vers·a for a constant step."""
    x_n = _check_vector(x_n, spec, "x_n")
    x_prev = _check_vector(x_prev, spec, "x_prev")
    a = constant_term(spec)
    pf = _phase(spec, eps, phase)
    return 2.0 * (pf.c @ x_n) - x_prev + 2.0 * (pf.vers @ a)


def nd_central_velocity(
    x_next: Any,
    x_prev: Any,
    A: Any,
    eps: float,
    *,
    phase: Optional[PhaseFunctionSet] = None,
) -> np.ndarray:
    """v_n = ½ s⁻¹(x_{n+1} − x_{n−1}), s = Ω⁻¹ sin Ωε."""
    A = as_square_matrix(A)
    spec = OscNDSpec(A=A)
    x_next = _check_vector(x_next, spec, "x_next")
    x_prev = _check_vector(x_prev, spec, "x_prev")
    pf = _phase(spec, eps, phase)
    return 0.5 * _solve_sine(pf, x_next - x_prev)


def nd_exact_velocity(
    x_next: Any,
    x_n: Any,
    spec: OscNDSpec,
    eps: float,
    *,
    phase: Optional[PhaseFunctionSet] = None,
) -> np.ndarray:
    """v_n = s⁻¹(x_{n+1} − c·x_n − vers·a), valid for a single step of any size."""
    x_next = _check_vector(x_next, spec, "x_next")
    x_n = _check_vector(x_n, spec, "x_n")
    a = constant_term(spec)
    pf = _phase(spec, eps, phase)
    return _solve_sine(pf, x_next - pf.c @ x_n - pf.vers @ a)


def nd_forced_recurrence(
    x_n: Any,
    x_prev: Any,
    spec: OscNDSpec,
    eps: float,
    t_n: float,
    *,
    phase: Optional[PhaseFunctionSet] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Return (x_{n+1}, v_n) of the forced constant-step recurrence."""
    pf = _phase(spec, eps, phase)
    if is_constant_forcing(spec.forcing):
        x_next = nd_recurrence_step(x_n, x_prev, spec, eps, phase=pf)
        return x_next, nd_central_velocity(x_next, x_prev, spec.A, eps, phase=pf)

    x_n = _check_vector(x_n, spec, "x_n")
    x_prev = _check_vector(x_prev, spec, "x_prev")
    phi_prev, _ = particular_solution(spec.forcing, spec.A, t_n - eps)
    phi_n, dphi_n = particular_solution(spec.forcing, spec.A, t_n)
    phi_next, _ = particular_solution(spec.forcing, spec.A, t_n + eps)
    x_next = 2.0 * (pf.c @ x_n) - x_prev + phi_next - 2.0 * (pf.c @ phi_n) + phi_prev
    v_n = 0.5 * _solve_sine(pf, x_next - x_prev - phi_next + phi_prev) + dphi_n
    return x_next, v_n


def nd_energy(state: PhaseND, spec: OscNDSpec) -> float:
    """Iₙ = ½|v|² + ½⟨x, Ax⟩ − ⟨a, x⟩ for symmetric A and constant force."""
    if not spec.symmetric:
        raise ValueError("energy invariant requires a symmetric matrix (Ωᵀ = Ω)")
    _check_state(state, spec)
    a = constant_term(spec)
    x, v = state.x, state.v
    return float(0.5 * v @ v + 0.5 * x @ (spec.A @ x) - a @ x)


# ------------------------------------------------------------------
# Particular solutions
# ------------------------------------------------------------------


def _shifted(A: np.ndarray, shift: float) -> np.ndarray:
    return A + shift * np.eye(A.shape[0])


def _polynomial_particular_coeffs(C: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Coefficients of Φ = A⁻¹ Σ_k (−A⁻¹)^k f^{(2k)} for polynomial f."""
    degree = C.shape[0] - 1
    result = np.zeros_like(C)
    for k in range(degree // 2 + 1):
        term = npoly.polyder(C, m=2 * k, axis=0)
        for _ in range(k + 1):
            term = _solve_resonant(
                A, term.T, "resonant forcing: polynomial drive needs an invertible Ω²", 0.0
            ).T
        result[: term.shape[0]] += (-1.0) ** k * term
    return result


def _derivatives(forcing: Any, A: np.ndarray, t: float, order: int) -> List[np.ndarray]:
    """[Φ(t), Φ̇(t), …, Φ^{(order)}(t)] in closed form."""
    n = A.shape[0]
    if isinstance(forcing, NoForcing):
        return [np.zeros(n) for _ in range(order + 1)]

    if isinstance(forcing, ConstantForcing):
        phi = _solve_resonant(
            A, np.array(forcing.a, dtype=float),
            "resonant forcing: constant drive needs an invertible Ω² for Φ", 0.0,
        )
        return [phi] + [np.zeros(n) for _ in range(order)]

    if isinstance(forcing, PolynomialForcing):
        coeffs = _polynomial_particular_coeffs(forcing.matrix, A)
        return [
            np.asarray(npoly.polyval(t, npoly.polyder(coeffs, m=j, axis=0)), dtype=float)
            for j in range(order + 1)
        ]

    if isinstance(forcing, ExponentialForcing):
        alpha = forcing.alpha
        shift = alpha * alpha
        base = _solve_resonant(
            _shifted(A, shift), np.array(forcing.f0, dtype=float),
            f"resonant forcing: Ω² + {shift:g}·I is singular", -shift,
        )
        phi = math.exp(alpha * t) * base
        return [alpha**j * phi for j in range(order + 1)]

    if isinstance(forcing, SinusoidalForcing):
        w = forcing.omega_f
        shift = w * w
        base = _solve_resonant(
            _shifted(A, -shift), np.array(forcing.f0, dtype=float),
            f"resonant forcing: Ω² - {shift:g}·I is singular", shift,
        )
        return [w**j * math.sin(w * t + 0.5 * j * math.pi) * base for j in range(order + 1)]

    if isinstance(forcing, SumForcing):
        total = [np.zeros(n) for _ in range(order + 1)]
        for term in forcing.terms:
            for j, part in enumerate(_derivatives(term, A, t, order)):
                total[j] = total[j] + part
        return total

    raise ValueError(f"unsupported forcing {forcing!r}")


def particular_solution(forcing: Any, A: Any, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """Φ(t) and Φ̇(t) with Φ̈ + AΦ = f(t)."""
    A = as_square_matrix(A)
    phi, dphi = _derivatives(forcing, A, float(t), 1)
    return phi, dphi


def particular_acceleration(forcing: Any, A: Any, t: float) -> np.ndarray:
    """Φ̈(t), differentiated in closed form."""
    A = as_square_matrix(A)
    return _derivatives(forcing, A, float(t), 2)[2]


def forcing_value(forcing: Any, t: float, n: int) -> np.ndarray:
    """f(t) as an n-vector."""
    if isinstance(forcing, NoForcing):
        return np.zeros(n)
    if isinstance(forcing, ConstantForcing):
        return np.array(forcing.a, dtype=float)
    if isinstance(forcing, PolynomialForcing):
        return np.asarray(npoly.polyval(t, forcing.matrix), dtype=float)
    if isinstance(forcing, ExponentialForcing):
        return math.exp(forcing.alpha * t) * np.array(forcing.f0, dtype=float)
    if isinstance(forcing, SinusoidalForcing):
        return math.sin(forcing.omega_f * t) * np.array(forcing.f0, dtype=float)
    if isinstance(forcing, SumForcing):
        return sum((forcing_value(term, t, n) for term in forcing.terms), np.zeros(n))
    raise ValueError(f"unsupported forcing {forcing!r}")


__all__ = [
    "ConstantForcing",
    "ExponentialForcing",
    "Forcing",
    "NoForcing",
    "OscNDSpec",
    "PhaseND",
    "PolynomialForcing",
    "SinusoidalForcing",
    "SumForcing",
    "constant_term",
    "forcing_value",
    "is_constant_forcing",
    "nd_central_velocity",
    "nd_energy",
    "nd_exact_step",
    "nd_exact_velocity",
    "nd_forced_recurrence",
    "nd_forced_step",
    "nd_recurrence_step",
    "nd_trapezoid_step",
    "parse_forcing",
    "particular_acceleration",
    "particular_solution",
]
