"""Run and compare steppers on configured problems.

``run`` drives one stepper through a RunConfig and returns the trajectory
with its diagnostics. ``compare`` runs several configurations of one
problem against a reference trajectory, optionally sweeping the step size
to fit an observed convergence order.

Each run takes one extra lookahead step so that quantities built from a
pair of positions (the discrete energies, position-only velocities) are
defined on every reported row; the lookahead row is dropped afterwards.
"""

from __future__ import annotations

import asyncio
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from oscex.apps import KeplerSpec, WaveSpec, kepler_conic, kepler_propagate, wave_modes, wave_propagate
from oscex.config import Settings, load_settings
from oscex.exact1d import (
    Osc1DSpec,
    Phase1D,
    energy_invariants,
    exact_step,
    exact_step_damped,
    exact_velocity,
    recurrence_step,
    trapezoid_form_step,
)
from oscex.exactnd import (
    OscNDSpec,
    PhaseND,
    is_constant_forcing,
    nd_energy,
    nd_forced_recurrence,
    nd_forced_step,
    nd_trapezoid_step,
)
from oscex.geofamily import FAMILY_RULES, family_step
from oscex.locexact import Potential, discrete_gradient_solve, quadratic_potential
from oscex.phasefun import effective_delta, phase_functions
from oscex.refschemes import (
    NonlinearForce,
    constant_force,
    exponential_euler_step,
    gautschi_start,
    gautschi_step,
    lawson_explicit_step,
    lawson_implicit_step,
    oscillator_linear_part,
    symmetric_euler_start,
    symmetric_euler_step,
)
from oscex.runconfig import RunConfig, StepperKind
from oscex.types import (
    RESONANCE_THRESHOLD,
    ConfigError,
    LogCallback,
    NumericalError,
    Problem,
    ReferenceKind,
    ResonanceError,
    StepFailedError,
    StepperName,
    UnboundOrbitError,
)

logger = logging.getLogger(__name__)

# Errors at or below this count as round-off when fitting an order
ORDER_FLOOR = 1e-12
MIN_SWEEP_POINTS = 4
# Tolerances for the solve_ivp reference of nonlinear problems
REFERENCE_RTOL = 1e-12
REFERENCE_ATOL = 1e-12

EXACT_REFERENCE_STEPPER: Dict[Problem, StepperName] = {
    Problem.OSC1D: StepperName.EXACT_DRIVEN,
    Problem.DAMPED1D: StepperName.EXACT_DAMPED,
    Problem.OSCND: StepperName.EXACT_ND,
    Problem.KEPLER: StepperName.EXACT_DRIVEN,
    Problem.WAVE: StepperName.EXACT_FREE,
}


# ------------------------------------------------------------------
# Results
# ------------------------------------------------------------------


@dataclass
class Trajectory:
    """Rows of ``n, t, <state>, <energies>, <extras>`` as one float array."""

    columns: List[str]
    data: np.ndarray
    state_columns: List[str] = field(default_factory=list)
    energy_columns: List[str] = field(default_factory=list)
    extra_columns: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return int(self.data.shape[0])

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise KeyError(f"no column '{name}' (have {', '.join(self.columns)})") from None

    def block(self, names: Sequence[str]) -> np.ndarray:
        return self.data[:, [self.columns.index(name) for name in names]]

    @property
    def times(self) -> np.ndarray:
        return self.column("t")

    def without(self, names: Sequence[str]) -> "Trajectory":
        drop = set(names)
        keep = [i for i, name in enumerate(self.columns) if name not in drop]
        return Trajectory(
            columns=[self.columns[i] for i in keep],
            data=self.data[:, keep],
            state_columns=[c for c in self.state_columns if c not in drop],
            energy_columns=[c for c in self.energy_columns if c not in drop],
            extra_columns=[c for c in self.extra_columns if c not in drop],
        )


@dataclass
class RunSummary:
    problem: str
    stepper: str
    steps: int
    final_time: float
    final_state: Dict[str, float]
    energy_drift: Dict[str, float]
    max_drift: Optional[float]
    within_tolerance: Optional[bool]
    wall_time: float
    continuations: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class RunResult:
    trajectory: Trajectory
    summary: RunSummary


@dataclass
class _Columns:
    """Sampled arrays of one run, lookahead row included."""

    times: np.ndarray
    state_names: List[str]
    states: np.ndarray
    energy_names: List[str] = field(default_factory=list)
    energies: Optional[np.ndarray] = None
    extra_names: List[str] = field(default_factory=list)
    extras: Optional[np.ndarray] = None
    continuations: int = 0


class _Progress:
    """Index of the step currently being taken, for error reports."""

    def __init__(self) -> None:
        self.step = 0


def _scalar_names(n: int) -> List[str]:
    return [f"x{i}" for i in range(n)] + [f"v{i}" for i in range(n)]


def _central_trig_velocity(x_next: float, x_prev: float, omega: float, eps: float) -> float:
    """ω(x_{n+1} − x_{n−1})/(2 sin ωε), exact for the linear part."""
    s = math.sin(omega * eps)
    if abs(s) < RESONANCE_THRESHOLD:
        raise ResonanceError(
            f"velocity not recoverable: sin(ωε) vanishes for ω={omega:g}, eps={eps:g}",
            value=omega * omega,
        )
    return omega * (x_next - x_prev) / (2.0 * s)


def _pair_energies(x: np.ndarray, osc: Osc1DSpec, sizes: Sequence[float], progress: _Progress) -> np.ndarray:
    rows = len(sizes)
    out = np.empty((rows, 4))
    for n in range(rows):
        progress.step = n
        quad = energy_invariants(float(x[n]), float(x[n + 1]), osc, sizes[n])
        out[n] = (quad.e0, quad.e1, quad.e2, quad.e3)
    return out


# ------------------------------------------------------------------
# Problem runners
# ------------------------------------------------------------------


def _run_scalar_oscillator(
    stepper: StepperKind,
    osc: Osc1DSpec,
    x0: float,
    v0: float,
    t0: float,
    sizes: List[float],
    progress: _Progress,
    potential: Optional[Potential] = None,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Positions, velocities and continuation count of a scalar run.

    Linear problems pass ``potential=None`` and use the constant force of
    *osc*; nonlinear problems pass Φ and use ``osc.omega`` as the frequency
    of the linear part.
    """
    kind = stepper.kind
    total = len(sizes)
    x = np.full(total + 1, np.nan)
    v = np.full(total + 1, np.nan)
    x[0], v[0] = x0, v0
    omega = osc.omega
    w2 = omega * omega
    continuations = 0

    if potential is None:
        force = NonlinearForce(lambda pos: np.full(np.shape(pos), osc.g))
        first_order = constant_force(osc.g)
        pot = quadratic_potential(omega, osc.g) if kind == StepperName.DISCRETE_GRADIENT else None
    else:
        force = NonlinearForce(lambda pos: w2 * pos - potential.dphi(float(pos)))
        first_order = NonlinearForce(
            lambda y: np.array([0.0, w2 * y[0] - potential.dphi(float(y[0]))]),
            jacobian=lambda y: np.array([[0.0, 0.0], [w2 - potential.d2phi(float(y[0])), 0.0]]),
        )
        pot = potential

    if kind in (StepperName.EXACT_FREE, StepperName.EXACT_DRIVEN, StepperName.TRAPEZOID_FORM):
        step_fn = trapezoid_form_step if kind == StepperName.TRAPEZOID_FORM else exact_step
        state = Phase1D(x0, v0, t0)
        for n, eps in enumerate(sizes):
            progress.step = n + 1
            state = step_fn(state, osc, eps)
            x[n + 1], v[n + 1] = state.x, state.v

    elif kind == StepperName.GEO_FAMILY:
        rule = FAMILY_RULES[stepper.rule](osc.m, omega)
        cache: Dict[float, Any] = {}
        pos, mom = x0, osc.m * v0
        for n, eps in enumerate(sizes):
            progress.step = n + 1
            if eps not in cache:
                cache[eps] = rule(eps)
            pos, mom = family_step(pos, mom, cache[eps])
            x[n + 1], v[n + 1] = pos, mom / osc.m

    elif kind == StepperName.DISCRETE_GRADIENT:
        state = Phase1D(x0, v0, t0)
        for n, eps in enumerate(sizes):
            progress.step = n + 1
            result = discrete_gradient_solve(state, pot, eps, stepper.policy)
            continuations += int(result.continued)
            state = result.state
            x[n + 1], v[n + 1] = state.x, state.v

    elif kind in (StepperName.LAWSON_EXPLICIT, StepperName.LAWSON_IMPLICIT, StepperName.EXPONENTIAL_EULER):
        linear = oscillator_linear_part(omega)
        step_fn = {
            StepperName.LAWSON_EXPLICIT: lawson_explicit_step,
            StepperName.LAWSON_IMPLICIT: lawson_implicit_step,
            StepperName.EXPONENTIAL_EULER: exponential_euler_step,
        }[kind]
        y = np.array([x0, v0])
        for n, eps in enumerate(sizes):
            progress.step = n + 1
            y = step_fn(y, linear, eps, first_order)
            x[n + 1], v[n + 1] = y

    elif kind == StepperName.RECURRENCE:
        eps = sizes[0]
        progress.step = 1
        x[1] = exact_step(Phase1D(x0, v0, t0), osc, eps).x
        for n in range(1, total):
            progress.step = n + 1
            x[n + 1] = recurrence_step(x[n], x[n - 1], osc, eps)
        for n in range(1, total):
            v[n] = exact_velocity(x[n + 1], x[n], osc, eps)

    elif kind == StepperName.GAUTSCHI:
        eps = sizes[0]
        progress.step = 1
        x[1] = float(gautschi_start(x0, v0, omega, eps, force))
        for n in range(1, total):
            progress.step = n + 1
            x[n + 1] = float(gautschi_step(x[n], x[n - 1], omega, eps, force))
        for n in range(1, total):
            v[n] = _central_trig_velocity(x[n + 1], x[n - 1], omega, eps)

    elif kind == StepperName.SYMMETRIC_EULER:
        eps = sizes[0]
        progress.step = 1
        x[1] = float(symmetric_euler_start(x0, v0, omega, eps, osc.g))
        for n in range(1, total):
            progress.step = n + 1
            x[n + 1] = float(symmetric_euler_step(x[n], x[n - 1], omega, eps, osc.g))
        for n in range(1, total):
            v[n] = (x[n + 1] - x[n - 1]) / (2.0 * eps)

    else:
        raise ConfigError(f"stepper {kind.value} is not a scalar oscillator stepper")

    return x, v, continuations


def _times(t0: float, sizes: Sequence[float]) -> np.ndarray:
    """Grid times t_n = t0 + ε_0 + ... + ε_{n-1}.

    A constant step gives t0 + n·ε directly; variable steps use Neumaier
    compensated prefix sums, so long runs do not accumulate rounding drift.
    """
    if len(set(sizes)) <= 1:
        eps = float(sizes[0]) if sizes else 0.0
        return t0 + eps * np.arange(len(sizes) + 1, dtype=float)
    out = np.empty(len(sizes) + 1)
    out[0] = t0
    total = 0.0
    comp = 0.0
    for k, eps in enumerate(sizes, start=1):
        eps = float(eps)
        partial = total + eps
        if abs(total) >= abs(eps):
            comp += (total - partial) + eps
        else:
            comp += (eps - partial) + total
        total = partial
        out[k] = t0 + (total + comp)
    return out


def _run_osc1d(config: RunConfig, sizes: List[float], progress: _Progress) -> _Columns:
    spec = config.spec
    osc = Osc1DSpec(omega=spec.omega, g=spec.g, m=spec.m)
    x, v, continuations = _run_scalar_oscillator(
        config.stepper, osc, spec.x0, spec.v0, spec.t0, sizes, progress
    )
    return _Columns(
        times=_times(spec.t0, sizes),
        state_names=_scalar_names(1),
        states=np.column_stack([x, v]),
        energy_names=["E0", "E1", "E2", "E3"],
        energies=_pair_energies(x, osc, sizes, progress),
        continuations=continuations,
    )


def _run_damped1d(config: RunConfig, sizes: List[float], progress: _Progress) -> _Columns:
    spec = config.spec
    osc = Osc1DSpec(omega=spec.omega, g=spec.g, gamma=spec.gamma, m=spec.m)
    states = np.empty((len(sizes) + 1, 2))
    state = Phase1D(spec.x0, spec.v0, spec.t0)
    states[0] = state.x, state.v
    for n, eps in enumerate(sizes):
        progress.step = n + 1
        state = exact_step_damped(state, osc, eps)
        states[n + 1] = state.x, state.v
    return _Columns(times=_times(spec.t0, sizes), state_names=_scalar_names(1), states=states)


def _run_oscnd(config: RunConfig, sizes: List[float], progress: _Progress) -> _Columns:
    spec = config.spec
    A, x0, v0 = spec.materialize(config.seed)
    problem = OscNDSpec(A=A, forcing=spec.forcing)
    dim = problem.n
    total = len(sizes)
    X = np.empty((total + 1, dim))
    V = np.empty((total + 1, dim))
    X[0], V[0] = x0, v0
    constant = config.constant_eps
    phase = phase_functions(A, constant) if constant is not None else None
    kind = config.stepper.kind
    times = _times(spec.t0, sizes)

    if kind == StepperName.RECURRENCE:
        eps = sizes[0]
        progress.step = 1
        X[1] = nd_forced_step(PhaseND(x0, v0, spec.t0), problem, eps, phase=phase).x
        for n in range(1, total):
            progress.step = n + 1
            X[n + 1], V[n] = nd_forced_recurrence(
                X[n], X[n - 1], problem, eps, spec.t0 + n * eps, phase=phase
            )
    else:
        delta = None
        if kind == StepperName.TRAPEZOID_FORM and constant is not None:
            delta = effective_delta(A, constant)
        state = PhaseND(x0, v0, spec.t0)
        for n, eps in enumerate(sizes):
            progress.step = n + 1
            # forcing is evaluated at grid times, not at an accumulated t
            state = PhaseND(state.x, state.v, float(times[n]))
            if kind == StepperName.TRAPEZOID_FORM:
                state = nd_trapezoid_step(state, problem, eps, delta=delta)
            else:
                state = nd_forced_step(state, problem, eps, phase=phase)
            X[n + 1], V[n + 1] = state.x, state.v

    columns = _Columns(
        times=times,
        state_names=_scalar_names(dim),
        states=np.hstack([X, V]),
    )
    if problem.symmetric and is_constant_forcing(problem.forcing):
        energies = np.empty((total, 1))
        for n in range(total):
            energies[n, 0] = nd_energy(PhaseND(X[n], V[n], times[n]), problem)
        columns.energy_names = ["I"]
        columns.energies = energies
    return columns


def _run_kepler(config: RunConfig, sizes: List[float], progress: _Progress) -> _Columns:
    spec = config.spec
    dphi = sizes[0]
    kepler = KeplerSpec(m=spec.m, k=spec.k, L=spec.L, u0=spec.u0, du0=spec.du0, dphi=dphi, steps=len(sizes))
    method = "recurrence" if config.stepper.kind == StepperName.RECURRENCE else "exact"
    orbit = kepler_propagate(kepler, method=method)
    return _Columns(
        times=orbit.phi,
        state_names=_scalar_names(1),
        states=np.column_stack([orbit.u, orbit.du]),
        energy_names=["E0", "E1", "E2", "E3"],
        energies=_pair_energies(orbit.u, kepler.oscillator, sizes, progress),
        extra_names=["r", "time"],
        extras=np.column_stack([orbit.r, orbit.t]),
    )


def _wave_spec(config: RunConfig, dt: float, steps: int) -> WaveSpec:
    spec = config.spec
    modes = wave_modes(
        [(mode.k, complex(*mode.u0), complex(*mode.udot0)) for mode in spec.modes]
    )
    return WaveSpec(a=spec.a, modes=modes, dt=dt, steps=steps, grid=spec.grid)


def _interleave(values: np.ndarray) -> np.ndarray:
    out = np.empty((values.shape[0], 2 * values.shape[1]))
    out[:, 0::2] = values.real
    out[:, 1::2] = values.imag
    return out


def _complex_names(prefix: str, count: int) -> List[str]:
    return [f"{prefix}{j}_{part}" for j in range(count) for part in ("re", "im")]


def _run_wave(config: RunConfig, sizes: List[float], progress: _Progress) -> _Columns:
    method = "recurrence" if config.stepper.kind == StepperName.RECURRENCE else "exact"
    history = wave_propagate(_wave_spec(config, sizes[0], len(sizes)), method=method)
    count = history.omegas.size
    columns = _Columns(
        times=history.times,
        state_names=_complex_names("x", count) + _complex_names("v", count),
        states=np.hstack([_interleave(history.amplitudes), _interleave(history.rates)]),
        energy_names=[f"W{j}" for j in range(count)],
        energies=history.mode_energy(),
    )
    if history.frames is not None:
        columns.extra_names = _complex_names("u", history.frames.shape[1])
        columns.extras = _interleave(history.frames)
    return columns


def _run_nonlinear1d(config: RunConfig, sizes: List[float], progress: _Progress) -> _Columns:
    spec = config.spec
    potential = spec.build_potential()
    omega = spec.omega
    if omega is None and config.stepper.kind != StepperName.DISCRETE_GRADIENT:
        omega = spec.linear_frequency()
    osc = Osc1DSpec(omega=omega or 1.0)
    x, v, continuations = _run_scalar_oscillator(
        config.stepper, osc, spec.x0, spec.v0, spec.t0, sizes, progress, potential=potential
    )
    energies = np.array([[0.5 * vi * vi + potential.phi(float(xi))] for xi, vi in zip(x, v)])
    return _Columns(
        times=_times(spec.t0, sizes),
        state_names=_scalar_names(1),
        states=np.column_stack([x, v]),
        energy_names=["H"],
        energies=energies,
        continuations=continuations,
    )


_PROBLEM_RUNNERS: Dict[Problem, Callable[[RunConfig, List[float], _Progress], _Columns]] = {
    Problem.OSC1D: _run_osc1d,
    Problem.DAMPED1D: _run_damped1d,
    Problem.OSCND: _run_oscnd,
    Problem.KEPLER: _run_kepler,
    Problem.WAVE: _run_wave,
    Problem.NONLINEAR1D: _run_nonlinear1d,
}


# ------------------------------------------------------------------
# run
# ------------------------------------------------------------------


def _energy_drift(names: List[str], energies: np.ndarray) -> Dict[str, float]:
    drift: Dict[str, float] = {}
    for j, name in enumerate(names):
        column = energies[:, j]
        value = float(np.max(np.abs(column - column[0])))
        if not math.isfinite(value):
            logger.warning("energy column %s is not finite", name)
        drift[name] = value
    return drift


def run(config: RunConfig, settings: Optional[Settings] = None) -> RunResult:
    """Execute the stepping loop of *config*.

    Numerical failures inside the loop are re-raised as StepFailedError
    carrying the failing step index.
    """
    settings = settings or load_settings()
    sizes = config.step_sizes()
    lookahead = sizes + [sizes[-1]]
    rows = config.steps + 1
    progress = _Progress()

    logger.info(
        "run %s with %s: %d steps", config.problem.value, config.stepper.label, config.steps
    )
    started = time.perf_counter()
    try:
        sampled = _PROBLEM_RUNNERS[config.problem](config, lookahead, progress)
    except StepFailedError:
        raise
    except UnboundOrbitError as exc:
        raise StepFailedError(exc.step, exc) from exc
    except NumericalError as exc:
        raise StepFailedError(progress.step, exc) from exc
    wall_time = time.perf_counter() - started

    parts = [np.arange(rows, dtype=float)[:, None], sampled.times[:rows, None], sampled.states[:rows]]
    energy_names = list(sampled.energy_names)
    if sampled.energies is not None:
        parts.append(sampled.energies[:rows])
    if sampled.extras is not None:
        parts.append(sampled.extras[:rows])
    trajectory = Trajectory(
        columns=["n", "t"] + sampled.state_names + energy_names + sampled.extra_names,
        data=np.hstack(parts),
        state_columns=list(sampled.state_names),
        energy_columns=energy_names,
        extra_columns=list(sampled.extra_names),
    )

    drift = _energy_drift(energy_names, trajectory.block(energy_names)) if energy_names else {}
    max_drift = max(drift.values()) if drift else None
    final = trajectory.data[-1]
    summary = RunSummary(
        problem=config.problem.value,
        stepper=config.stepper.label,
        steps=config.steps,
        final_time=float(final[1]),
        final_state={
            name: float(value)
            for name, value in zip(trajectory.columns, final)
            if name in trajectory.state_columns
        },
        energy_drift=drift,
        max_drift=max_drift,
        within_tolerance=None if max_drift is None else bool(max_drift <= settings.diagnostic_tol),
        wall_time=wall_time,
        continuations=sampled.continuations,
    )
    logger.debug("run finished in %.3fs, max drift %s", wall_time, max_drift)
    if sampled.continuations:
        logger.warning(
            "%d of %d steps used the hyperbolic continuation (Φ″ ≤ 0 at the reference point)",
            sampled.continuations,
            config.steps,
        )

    if "energies" not in config.outputs:
        trajectory = trajectory.without(energy_names)
    return RunResult(trajectory=trajectory, summary=summary)


# ------------------------------------------------------------------
# compare
# ------------------------------------------------------------------


@dataclass
class ComparisonRow:
    label: str
    steps: int
    global_error: float
    energy_drift: Optional[float]
    observed_order: Optional[float]
    sweep: List[Dict[str, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ComparisonTable:
    problem: str
    reference: str
    horizon: float
    rows: List[ComparisonRow]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "problem": self.problem,
            "reference": self.reference,
            "horizon": self.horizon,
            "rows": [row.to_dict() for row in self.rows],
        }


def analytic_states(config: RunConfig, times: np.ndarray) -> np.ndarray:
    """Closed-form (or high-accuracy) states at *times*, columns as in the trajectory."""
    spec = config.spec
    problem = config.problem
    if problem in (Problem.OSC1D, Problem.DAMPED1D):
        osc = Osc1DSpec(omega=spec.omega, g=spec.g, gamma=getattr(spec, "gamma", 0.0), m=spec.m)
        jump = exact_step if problem == Problem.OSC1D else exact_step_damped
        start = Phase1D(spec.x0, spec.v0, spec.t0)
        out = np.empty((times.size, 2))
        for i, t in enumerate(times):
            state = jump(start, osc, float(t) - spec.t0)
            out[i] = state.x, state.v
        return out

    if problem == Problem.OSCND:
        A, x0, v0 = spec.materialize(config.seed)
        nd = OscNDSpec(A=A, forcing=spec.forcing)
        start = PhaseND(x0, v0, spec.t0)
        out = np.empty((times.size, 2 * nd.n))
        for i, t in enumerate(times):
            state = nd_forced_step(start, nd, float(t) - spec.t0)
            out[i] = np.concatenate([state.x, state.v])
        return out

    if problem == Problem.KEPLER:
        kepler = KeplerSpec(
            m=spec.m, k=spec.k, L=spec.L, u0=spec.u0, du0=spec.du0, dphi=1.0, steps=1
        )
        uc = kepler.circular_u
        u = np.array([kepler_conic(kepler, float(phi)) for phi in times])
        du = -(spec.u0 - uc) * np.sin(times) + spec.du0 * np.cos(times)
        return np.column_stack([u, du])

    if problem == Problem.WAVE:
        wave = _wave_spec(config, 1.0, 1)
        omegas = wave.omegas
        u0 = np.array([mode.u0 for mode in wave.modes])
        udot0 = np.array([mode.udot0 for mode in wave.modes])
        phase = np.outer(times, omegas)
        amps = np.cos(phase) * u0 + np.sin(phase) * (udot0 / omegas)
        rates = -np.sin(phase) * (omegas * u0) + np.cos(phase) * udot0
        return np.hstack([_interleave(amps), _interleave(rates)])

    if problem == Problem.NONLINEAR1D:
        potential = spec.build_potential()
        diffs = np.diff(times)
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError("the analytic reference needs monotone times")

        def rhs(_t: float, y: np.ndarray) -> List[float]:
            return [y[1], -potential.dphi(float(y[0]))]

        solution = solve_ivp(
            rhs,
            (float(times[0]), float(times[-1])),
            [spec.x0, spec.v0],
            method="DOP853",
            t_eval=times,
            rtol=REFERENCE_RTOL,
            atol=REFERENCE_ATOL,
        )
        if not solution.success:
            raise NumericalError(f"reference integration failed: {solution.message}")
        return solution.y.T

    raise ConfigError(f"no analytic reference for {problem.value}")


def reference_states(
    config: RunConfig,
    trajectory: Trajectory,
    reference: ReferenceKind,
    settings: Optional[Settings] = None,
) -> np.ndarray:
    """States of the reference at the nodes of *trajectory*."""
    if reference == ReferenceKind.ANALYTIC:
        return analytic_states(config, trajectory.times)
    exact_kind = EXACT_REFERENCE_STEPPER.get(config.problem)
    if exact_kind is None:
        raise ConfigError(
            f"no exact stepper for {config.problem.value}; use the analytic reference"
        )
    data = config.model_dump(mode="python")
    data["spec"] = config.spec
    data["stepper"] = {"kind": exact_kind}
    exact = run(RunConfig.model_validate(data), settings).trajectory
    return exact.block(trajectory.state_columns)


def global_error(
    config: RunConfig,
    trajectory: Trajectory,
    reference: ReferenceKind,
    settings: Optional[Settings] = None,
) -> float:
    """Max-norm distance between the trajectory states and the reference."""
    expected = reference_states(config, trajectory, reference, settings)
    return float(np.max(np.abs(trajectory.block(trajectory.state_columns) - expected)))


def observed_order(sweep: Sequence[Dict[str, float]]) -> Optional[float]:
    """Slope of log(error) against log(eps), ignoring round-off level entries."""
    usable = [(p["eps"], p["error"]) for p in sweep if p["error"] > ORDER_FLOOR]
    if len(usable) < 2:
        return None
    eps, err = np.array(usable).T
    return float(np.polyfit(np.log(np.abs(eps)), np.log(err), 1)[0])


def _compare_one(
    config: RunConfig,
    reference: ReferenceKind,
    sweep: Optional[Sequence[float]],
    settings: Settings,
) -> ComparisonRow:
    result = run(config, settings)
    error = global_error(config, result.trajectory, reference, settings)
    points: List[Dict[str, float]] = []
    for eps in sweep or ():
        swept = config.with_step(eps)
        swept_result = run(swept, settings)
        swept_error = global_error(swept, swept_result.trajectory, reference, settings)
        points.append({"eps": float(eps), "error": swept_error})
    return ComparisonRow(
        label=config.stepper.label,
        steps=config.steps,
        global_error=error,
        energy_drift=result.summary.max_drift,
        observed_order=observed_order(points) if points else None,
        sweep=points,
    )


async def compare(
    configs: Sequence[RunConfig],
    reference: ReferenceKind = ReferenceKind.ANALYTIC,
    sweep: Optional[Sequence[float]] = None,
    log_callback: Optional[LogCallback] = None,
    settings: Optional[Settings] = None,
) -> ComparisonTable:
    """Run *configs* concurrently and tabulate them against *reference*.

    All configurations must share the problem and the horizon. With a
    *sweep* of at least four step sizes each row also gets an observed
    order from a log-log fit.
    """
    if not configs:
        raise ConfigError("compare needs at least one configuration")
    settings = settings or load_settings()
    reference = ReferenceKind(reference)
    first = configs[0]
    for config in configs[1:]:
        if config.problem != first.problem:
            raise ConfigError(
                f"mixed problems: {first.problem.value} and {config.problem.value}"
            )
        if not math.isclose(config.horizon, first.horizon, rel_tol=1e-12, abs_tol=1e-12):
            raise ConfigError(
                f"mismatched horizons: {first.horizon:.17g} vs {config.horizon:.17g}"
            )
    if sweep is not None and len(sweep) < MIN_SWEEP_POINTS:
        raise ConfigError(f"a sweep needs at least {MIN_SWEEP_POINTS} step sizes, got {len(sweep)}")

    def _log(level: str, message: str, data: Optional[Dict[str, Any]] = None) -> None:
        getattr(logger, level if level in ("debug", "info", "warning", "error") else "info")(message)
        if log_callback:
            log_callback(level, message, data)

    _log("info", f"Comparing {len(configs)} configurations on {first.problem.value}")
    sem = asyncio.Semaphore(settings.compare_concurrency)

    async def _one(config: RunConfig) -> ComparisonRow:
        async with sem:
            row = await asyncio.to_thread(_compare_one, config, reference, sweep, settings)
            _log(
                "debug",
                f"{row.label}: error {row.global_error:.3e}",
                {"order": row.observed_order, "drift": row.energy_drift},
            )
            if row.energy_drift is not None and row.energy_drift > settings.diagnostic_tol:
                _log("warning", f"{row.label}: energy drift {row.energy_drift:.3e} exceeds {settings.diagnostic_tol:g}")
            return row

    rows = await asyncio.gather(*[_one(c) for c in configs])
    return ComparisonTable(
        problem=first.problem.value,
        reference=reference.value,
        horizon=first.horizon,
        rows=list(rows),
    )


__all__ = [
    "ComparisonRow",
    "ComparisonTable",
    "RunResult",
    "RunSummary",
    "Trajectory",
    "analytic_states",
    "compare",
    "global_error",
    "observed_order",
    "reference_states",
    "run",
]
