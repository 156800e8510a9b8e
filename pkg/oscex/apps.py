"""Applications of the exact oscillator maps.

Kepler orbits: u = 1/r obeys d²u/dφ² + u = km/L², a driven oscillator in
the swept angle, so stepping in φ is exact; physical time follows from
dt = (m r²/L) dφ by the trapezoid rule.

Linear waves: u_tt = u_xx − a²u decouples into Fourier modes with
ω² = k² + a², and the exact per-mode recurrence reproduces ω exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from oscex.exact1d import Osc1DSpec, Phase1D, exact_step, recurrence_step
from oscex.types import UnboundOrbitError

logger = logging.getLogger(__name__)


# ------------------------------------------------------------------
# Kepler
# ------------------------------------------------------------------


@dataclass(frozen=True)
class KeplerSpec:
    """Bound Kepler orbit in the Binet variables."""

    m: float
    k: float
    L: float
    u0: float
    du0: float
    dphi: float
    steps: int

    def __post_init__(self) -> None:
        if self.m <= 0 or self.k <= 0:
            raise ValueError(f"mass and strength must be positive, got m={self.m}, k={self.k}")
        if self.L == 0:
            raise ValueError("angular momentum L must be non-zero")
        if self.u0 <= 0:
            raise ValueError(f"u0 = 1/r0 must be positive, got {self.u0}")
        if self.steps < 1:
            raise ValueError(f"steps must be at least 1, got {self.steps}")
        if not math.isfinite(self.dphi) or self.dphi == 0:
            raise ValueError(f"dphi must be finite and non-zero, got {self.dphi}")

    @property
    def circular_u(self) -> float:
        """km/L², the equilibrium of the Binet oscillator."""
        return self.k * self.m / (self.L * self.L)

    @property
    def oscillator(self) -> Osc1DSpec:
        return Osc1DSpec(omega=1.0, g=self.circular_u)


@dataclass(frozen=True)
class KeplerElements:
    eccentricity: float
    semi_latus_rectum: float
    semi_major_axis: float
    period: float
    periapsis_angle: float


@dataclass
class KeplerOrbit:
    """Samples (φ_n, u_n, du_n, r_n, t_n) of a propagated orbit."""

    phi: np.ndarray
    u: np.ndarray
    du: np.ndarray
    r: np.ndarray
    t: np.ndarray


def kepler_elements(spec: KeplerSpec) -> KeplerElements:
    """Conic elements of the orbit through (u0, du0) at φ = 0."""
    uc = spec.circular_u
    p = 1.0 / uc
    ecc = p * math.hypot(spec.u0 - uc, spec.du0)
    if ecc >= 1.0:
        raise UnboundOrbitError(f"orbit is not bound (eccentricity {ecc:.6g})", step=0)
    a = p / (1.0 - ecc * ecc)
    period = 2.0 * math.pi * math.sqrt(spec.m * a**3 / spec.k)
    varpi = math.atan2(spec.du0, spec.u0 - uc)
    return KeplerElements(
        eccentricity=ecc,
        semi_latus_rectum=p,
        semi_major_axis=a,
        period=period,
        periapsis_angle=varpi,
    )


def kepler_conic(spec: KeplerSpec, phi: float) -> float:
    """Analytic u(φ) = u_c + (u0 − u_c)cos φ + du0 sin φ."""
    uc = spec.circular_u
    return uc + (spec.u0 - uc) * math.cos(phi) + spec.du0 * math.sin(phi)


def _mean_anomaly(nu: float, ecc: float) -> float:
    """Mean anomaly continuous in the true anomaly ν (any number of turns)."""
    turns = math.floor((nu + math.pi) / (2.0 * math.pi))
    reduced = nu - 2.0 * math.pi * turns
    E = 2.0 * math.atan2(
        math.sqrt(1.0 - ecc) * math.sin(0.5 * reduced),
        math.sqrt(1.0 + ecc) * math.cos(0.5 * reduced),
    )
    return E - ecc * math.sin(E) + 2.0 * math.pi * turns


def kepler_time_of_flight(spec: KeplerSpec, phi: float) -> float:
    """Analytic time to sweep from angle 0 to *phi*."""
    el = kepler_elements(spec)
    mean_motion = 2.0 * math.pi / el.period
    nu0 = -el.periapsis_angle
    nu1 = phi - el.periapsis_angle
    elapsed = (_mean_anomaly(nu1, el.eccentricity) - _mean_anomaly(nu0, el.eccentricity)) / mean_motion
    return elapsed if spec.L > 0 else -elapsed


def kepler_propagate(spec: KeplerSpec, method: str = "exact") -> KeplerOrbit:
    """Step the Binet oscillator in φ and recover r and t.

    ``method`` is "exact" (one-step map) or "recurrence" (three-term
    recurrence seeded by one exact step; du from the exact map as well).
    """
    if method not in ("exact", "recurrence"):
        raise ValueError(f"unknown Kepler method '{method}'")
    osc = spec.oscillator
    n = spec.steps
    u = np.empty(n + 1)
    du = np.empty(n + 1)
    phi = spec.dphi * np.arange(n + 1)

    state = Phase1D(x=spec.u0, v=spec.du0, t=0.0)
    u[0], du[0] = state.x, state.v
    for i in range(1, n + 1):
        state = exact_step(state, osc, spec.dphi)
        du[i] = state.v
        if method == "recurrence" and i >= 2:
            u[i] = recurrence_step(u[i - 1], u[i - 2], osc, spec.dphi)
        else:
            u[i] = state.x
        if u[i] <= 0:
            raise UnboundOrbitError(f"orbit unbound at step {i} (u={u[i]:.6g})", step=i)

    r = 1.0 / u
    r2 = r * r
    dt = (spec.m / spec.L) * 0.5 * (r2[:-1] + r2[1:]) * spec.dphi
    t = np.concatenate([[0.0], np.cumsum(dt)])
    logger.debug("kepler orbit: %d steps, final time %g", n, t[-1])
    return KeplerOrbit(phi=phi, u=u, du=du, r=r, t=t)


# ------------------------------------------------------------------
# Waves
# ------------------------------------------------------------------


@dataclass(frozen=True)
class WaveMode:
    k: float
    u0: complex
    udot0: complex


@dataclass(frozen=True)
class WaveSpec:
    """Modes of u_tt = u_xx − a²u stepped with a constant dt."""

    a: float
    modes: Tuple[WaveMode, ...]
    dt: float
    steps: int
    grid: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.modes:
            raise ValueError("at least one mode is required")
        for mode in self.modes:
            if mode.k * mode.k + self.a * self.a <= 0:
                raise ValueError(f"mode k={mode.k:g} has ω² = k² + a² = 0")
        if self.steps < 1:
            raise ValueError(f"steps must be at least 1, got {self.steps}")
        if self.grid is not None and self.grid < 1:
            raise ValueError(f"grid must be positive, got {self.grid}")

    @property
    def omegas(self) -> np.ndarray:
        k = np.array([mode.k for mode in self.modes])
        return np.sqrt(k * k + self.a * self.a)


@dataclass
class WaveHistory:
    """Mode amplitudes û^n (rows: steps, columns: modes) and their rates."""

    times: np.ndarray
    wavenumbers: np.ndarray
    omegas: np.ndarray
    amplitudes: np.ndarray
    rates: np.ndarray
    dt: float
    frames: Optional[np.ndarray] = None

    def mode_energy(self) -> np.ndarray:
        """½|ûdot|² + ½ω²|û|² per step and mode."""
        return 0.5 * np.abs(self.rates) ** 2 + 0.5 * self.omegas**2 * np.abs(self.amplitudes) ** 2


def wave_propagate(spec: WaveSpec, method: str = "recurrence") -> WaveHistory:
    """Propagate every mode exactly.

    All modes advance together as numpy vectors. Rates always come from the
    exact one-step map; amplitudes come from the three-term recurrence
    (seeded by one exact step) or from the same one-step map.
    """
    if method not in ("exact", "recurrence"):
        raise ValueError(f"unknown wave method '{method}'")
    omegas = spec.omegas
    c = np.cos(omegas * spec.dt)
    s = np.sin(omegas * spec.dt)
    n = spec.steps

    amps = np.empty((n + 1, omegas.size), dtype=complex)
    rates = np.empty_like(amps)
    exact_amps = np.empty_like(amps)
    exact_amps[0] = amps[0] = [mode.u0 for mode in spec.modes]
    rates[0] = [mode.udot0 for mode in spec.modes]
    for i in range(1, n + 1):
        exact_amps[i] = c * exact_amps[i - 1] + (s / omegas) * rates[i - 1]
        rates[i] = -omegas * s * exact_amps[i - 1] + c * rates[i - 1]
    if method == "recurrence":
        amps[1] = exact_amps[1]
        for i in range(2, n + 1):
            amps[i] = 2.0 * c * amps[i - 1] - amps[i - 2]
    else:
        amps = exact_amps

    history = WaveHistory(
        times=spec.dt * np.arange(n + 1),
        wavenumbers=np.array([mode.k for mode in spec.modes]),
        omegas=omegas,
        amplitudes=amps,
        rates=rates,
        dt=spec.dt,
    )
    if spec.grid is not None:
        history.frames = synthesize(history, spec.grid)
    return history


def synthesize(history: WaveHistory, grid: int) -> np.ndarray:
    """u(x_j, t_n) = Σ û^n e^{ikx_j} on x_j = 2πj/grid."""
    x = 2.0 * np.pi * np.arange(grid) / grid
    basis = np.exp(1j * np.outer(history.wavenumbers, x))
    return history.amplitudes @ basis


def numerical_frequency(history: WaveHistory) -> np.ndarray:
    """Per-mode frequency implied by the sampled amplitudes.

    Fits cos(ω_num Δt) = (û^{n+1} + û^{n−1})/(2û^n) in the least-squares
    sense over all interior steps. The arccos branch only resolves
    ωΔt < π, so a mode at or past that limit raises ValueError.
    """
    amps = history.amplitudes
    if amps.shape[0] < 3:
        raise ValueError("need at least two steps to estimate a frequency")
    aliased = history.omegas * abs(history.dt) >= math.pi
    if np.any(aliased):
        worst = float(np.max(history.omegas[aliased]))
        raise ValueError(
            f"frequency {worst:g} aliases at dt={history.dt:g}: ωΔt must stay below π"
        )
    centre = amps[1:-1]
    outer = amps[2:] + amps[:-2]
    numer = np.real(np.sum(np.conj(centre) * outer, axis=0))
    denom = 2.0 * np.sum(np.abs(centre) ** 2, axis=0)
    cosine = np.clip(numer / denom, -1.0, 1.0)
    return np.arccos(cosine) / history.dt


def group_velocity(history: WaveHistory, first: int = 0, second: int = 1) -> float:
    """Speed of the beat envelope of two modes.

    The envelope of a two-mode packet is carried by the phase of
    û_first·conj(û_second); its drift per unit time divided by the
    wavenumber gap is the discrete group velocity.
    """
    beat = history.amplitudes[:, first] * np.conj(history.amplitudes[:, second])
    phase = np.unwrap(np.angle(beat))
    slope = np.polyfit(history.times, phase, 1)[0]
    dk = history.wavenumbers[first] - history.wavenumbers[second]
    if dk == 0:
        raise ValueError("group velocity needs two distinct wavenumbers")
    return float(-slope / dk)


def wave_modes(entries: Sequence[Tuple[float, complex, complex]]) -> Tuple[WaveMode, ...]:
    return tuple(WaveMode(k=float(k), u0=complex(u0), udot0=complex(udot0)) for k, u0, udot0 in entries)


__all__ = [
    "KeplerElements",
    "KeplerOrbit",
    "KeplerSpec",
    "WaveHistory",
    "WaveMode",
    "WaveSpec",
    "group_velocity",
    "kepler_conic",
    "kepler_elements",
    "kepler_propagate",
    "kepler_time_of_flight",
    "numerical_frequency",
    "synthesize",
    "wave_modes",
    "wave_propagate",
]
