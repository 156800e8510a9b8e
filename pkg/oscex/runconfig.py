"""Run configuration models for the benchmark harness.

A run configuration is a JSON document::

    {
      "problem": "osc1d",
      "spec": {"omega": 1.0, "g": 0.5, "x0": 1.0, "v0": 0.0},
      "stepper": {"kind": "discrete_gradient", "policy": "local_midpoint"},
      "eps": 0.1,
      "steps": 1000,
      "outputs": ["trajectory", "energies", "summary"],
      "seed": 0
    }

``eps`` is either a constant step or an explicit list with one entry per
step. Validation enforces the stepper/problem compatibility matrix so an
incompatible combination never starts running.
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from oscex.exactnd import Forcing, NoForcing, is_constant_forcing
from oscex.geofamily import FAMILY_RULES
from oscex.locexact import POTENTIALS, Potential
from oscex.types import ConfigError, DeltaPolicy, Problem, StepperName

logger = logging.getLogger(__name__)

OutputKind = Literal["trajectory", "energies", "summary"]

COMPATIBILITY: Dict[Problem, FrozenSet[StepperName]] = {
    Problem.OSC1D: frozenset({
        StepperName.EXACT_FREE,
        StepperName.EXACT_DRIVEN,
        StepperName.TRAPEZOID_FORM,
        StepperName.RECURRENCE,
        StepperName.GEO_FAMILY,
        StepperName.GAUTSCHI,
        StepperName.LAWSON_EXPLICIT,
        StepperName.LAWSON_IMPLICIT,
        StepperName.EXPONENTIAL_EULER,
        StepperName.SYMMETRIC_EULER,
        StepperName.DISCRETE_GRADIENT,
    }),
    Problem.DAMPED1D: frozenset({StepperName.EXACT_DAMPED}),
    Problem.OSCND: frozenset({
        StepperName.EXACT_ND,
        StepperName.TRAPEZOID_FORM,
        StepperName.RECURRENCE,
    }),
    Problem.KEPLER: frozenset({StepperName.EXACT_DRIVEN, StepperName.RECURRENCE}),
    Problem.WAVE: frozenset({StepperName.EXACT_FREE, StepperName.RECURRENCE}),
    Problem.NONLINEAR1D: frozenset({
        StepperName.DISCRETE_GRADIENT,
        StepperName.GAUTSCHI,
        StepperName.LAWSON_EXPLICIT,
        StepperName.LAWSON_IMPLICIT,
        StepperName.EXPONENTIAL_EULER,
    }),
}

# Steppers whose maps are defined for ε < 0
NEGATIVE_STEP_STEPPERS: FrozenSet[StepperName] = frozenset({
    StepperName.EXACT_FREE,
    StepperName.EXACT_DRIVEN,
    StepperName.EXACT_DAMPED,
    StepperName.EXACT_ND,
    StepperName.TRAPEZOID_FORM,
    StepperName.DISCRETE_GRADIENT,
})

# Two-step and angle-stepped schemes need one ε for the whole run
CONSTANT_STEP_STEPPERS: FrozenSet[StepperName] = frozenset({
    StepperName.RECURRENCE,
    StepperName.GAUTSCHI,
    StepperName.SYMMETRIC_EULER,
})
CONSTANT_STEP_PROBLEMS: FrozenSet[Problem] = frozenset({Problem.KEPLER, Problem.WAVE})


class _SpecModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ------------------------------------------------------------------
# Problem specs
# ------------------------------------------------------------------


class Osc1DProblem(_SpecModel):
    omega: float = Field(gt=0.0)
    g: float = 0.0
    m: float = Field(default=1.0, gt=0.0)
    x0: float = 1.0
    v0: float = 0.0
    t0: float = 0.0


class Damped1DProblem(_SpecModel):
    omega: float = Field(gt=0.0)
    gamma: float = Field(default=0.0, ge=0.0)
    g: float = 0.0
    m: float = Field(default=1.0, gt=0.0)
    x0: float = 1.0
    v0: float = 0.0
    t0: float = 0.0

    @model_validator(mode="after")
    def _underdamped(self) -> "Damped1DProblem":
        if self.omega <= self.gamma:
            raise ValueError(
                f"not underdamped: omega={self.omega:g} must exceed gamma={self.gamma:g}"
            )
        return self


class OscNDProblem(_SpecModel):
    """``A`` as row-major nested lists, or ``n`` for a seeded random SPD matrix."""

    A: Optional[List[List[float]]] = None
    n: Optional[int] = Field(default=None, ge=1, le=64)
    forcing: Forcing = Field(default_factory=NoForcing)
    x0: Optional[List[float]] = None
    v0: Optional[List[float]] = None
    t0: float = 0.0

    @model_validator(mode="after")
    def _shape(self) -> "OscNDProblem":
        if (self.A is None) == (self.n is None):
            raise ValueError("give exactly one of 'A' or 'n'")
        dim = self.dimension
        if self.A is not None and any(len(row) != dim for row in self.A):
            raise ValueError(f"A must be square, got {dim} rows of lengths {[len(r) for r in self.A]}")
        for name in ("x0", "v0"):
            value = getattr(self, name)
            if value is not None and len(value) != dim:
                raise ValueError(f"{name} has length {len(value)}, expected {dim}")
        forcing_dim = self.forcing.dimension()
        if forcing_dim is not None and forcing_dim != dim:
            raise ValueError(f"forcing dimension {forcing_dim} does not match n={dim}")
        return self

    @property
    def dimension(self) -> int:
        return len(self.A) if self.A is not None else int(self.n)

    def materialize(self, seed: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(A, x0, v0) with random entries drawn from *seed* where omitted."""
        rng = np.random.default_rng(seed)
        dim = self.dimension
        if self.A is not None:
            A = np.array(self.A, dtype=float)
        else:
            B = rng.standard_normal((dim, dim))
            A = B @ B.T / dim + np.eye(dim)
        x0 = np.array(self.x0, dtype=float) if self.x0 is not None else rng.standard_normal(dim)
        v0 = np.array(self.v0, dtype=float) if self.v0 is not None else rng.standard_normal(dim)
        return A, x0, v0


class KeplerProblem(_SpecModel):
    m: float = Field(default=1.0, gt=0.0)
    k: float = Field(default=1.0, gt=0.0)
    L: float = 1.0
    u0: float = Field(gt=0.0)
    du0: float = 0.0

    @field_validator("L")
    @classmethod
    def _nonzero_momentum(cls, value: float) -> float:
        if value == 0:
            raise ValueError("angular momentum L must be non-zero")
        return value


class WaveModeModel(_SpecModel):
    k: float
    u0: Tuple[float, float] = (1.0, 0.0)
    udot0: Tuple[float, float] = (0.0, 0.0)


class WaveProblem(_SpecModel):
    a: float = 0.0
    modes: List[WaveModeModel] = Field(min_length=1)
    grid: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _positive_frequencies(self) -> "WaveProblem":
        for mode in self.modes:
            if mode.k * mode.k + self.a * self.a <= 0:
                raise ValueError(f"mode k={mode.k:g} has zero frequency (k² + a² = 0)")
        return self


class Nonlinear1DProblem(_SpecModel):
    """A scalar potential problem ẍ = −Φ′(x).

    ``omega`` is the frequency of the linear part used by the Gautschi and
    exponential schemes; it defaults to √Φ″(0).
    """

    potential: Literal["quadratic", "pendulum", "duffing"]
    params: Dict[str, float] = Field(default_factory=dict)
    x0: float = 1.0
    v0: float = 0.0
    t0: float = 0.0
    omega: Optional[float] = Field(default=None, gt=0.0)

    def build_potential(self) -> Potential:
        try:
            return POTENTIALS[self.potential](**self.params)
        except TypeError as exc:
            raise ValueError(f"bad parameters for potential '{self.potential}': {exc}") from exc

    def linear_frequency(self) -> float:
        if self.omega is not None:
            return self.omega
        curvature = self.build_potential().d2phi(0.0)
        if curvature <= 0:
            raise ValueError(
                f"potential '{self.potential}' has Φ″(0) = {curvature:g}; set 'omega' explicitly"
            )
        return math.sqrt(curvature)


ProblemSpec = Union[
    Osc1DProblem,
    Damped1DProblem,
    OscNDProblem,
    KeplerProblem,
    WaveProblem,
    Nonlinear1DProblem,
]

PROBLEM_MODELS: Dict[Problem, type] = {
    Problem.OSC1D: Osc1DProblem,
    Problem.DAMPED1D: Damped1DProblem,
    Problem.OSCND: OscNDProblem,
    Problem.KEPLER: KeplerProblem,
    Problem.WAVE: WaveProblem,
    Problem.NONLINEAR1D: Nonlinear1DProblem,
}


# ------------------------------------------------------------------
# Stepper selection
# ------------------------------------------------------------------


class StepperKind(_SpecModel):
    """Stepper tag plus its variant parameter (family rule or δ policy)."""

    kind: StepperName
    rule: Optional[str] = None
    policy: Optional[DeltaPolicy] = None

    @model_validator(mode="after")
    def _variant_fields(self) -> "StepperKind":
        if self.kind == StepperName.GEO_FAMILY:
            self.rule = self.rule or "exact"
            if self.rule not in FAMILY_RULES:
                raise ValueError(
                    f"unknown family rule '{self.rule}' (choose from {', '.join(sorted(FAMILY_RULES))})"
                )
        elif self.rule is not None:
            raise ValueError(f"'rule' only applies to geo_family, not {self.kind.value}")
        if self.kind == StepperName.DISCRETE_GRADIENT:
            self.policy = self.policy or DeltaPolicy.STANDARD
        elif self.policy is not None:
            raise ValueError(f"'policy' only applies to discrete_gradient, not {self.kind.value}")
        return self

    @property
    def label(self) -> str:
        if self.rule is not None:
            return f"{self.kind.value}[{self.rule}]"
        if self.policy is not None:
            return f"{self.kind.value}[{self.policy.value}]"
        return self.kind.value


# ------------------------------------------------------------------
# Run configuration
# ------------------------------------------------------------------


class RunConfig(_SpecModel):
    problem: Problem
    spec: ProblemSpec
    stepper: StepperKind
    eps: Union[float, List[float]]
    steps: int = Field(ge=1)
    outputs: List[OutputKind] = Field(
        default_factory=lambda: ["trajectory", "energies", "summary"]
    )
    seed: int = 0

    @model_validator(mode="before")
    @classmethod
    def _spec_for_problem(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "problem" not in data:
            return data
        try:
            problem = Problem(data["problem"])
        except ValueError:
            return data
        spec = data.get("spec", {})
        if not isinstance(spec, BaseModel):
            data = dict(data)
            data["spec"] = PROBLEM_MODELS[problem].model_validate(spec)
        return data

    @model_validator(mode="after")
    def _compatible(self) -> "RunConfig":
        expected = PROBLEM_MODELS[self.problem]
        if not isinstance(self.spec, expected):
            raise ValueError(f"spec does not describe a {self.problem.value} problem")

        kind = self.stepper.kind
        if kind not in COMPATIBILITY[self.problem]:
            allowed = ", ".join(sorted(s.value for s in COMPATIBILITY[self.problem]))
            raise ValueError(
                f"stepper {kind.value} does not apply to {self.problem.value} (allowed: {allowed})"
            )
        if self.problem == Problem.OSC1D and kind in (StepperName.EXACT_FREE, StepperName.GEO_FAMILY):
            if self.spec.g != 0:
                raise ValueError(f"{kind.value} requires g = 0, got g={self.spec.g:g}")
        if (
            self.problem == Problem.OSCND
            and kind == StepperName.TRAPEZOID_FORM
            and not is_constant_forcing(self.spec.forcing)
        ):
            raise ValueError("trapezoid_form on oscNd requires forcing 'none' or 'constant'")

        steps = self.step_sizes()
        if not all(math.isfinite(e) and e != 0 for e in steps):
            raise ValueError("eps entries must be finite and non-zero")
        if kind not in NEGATIVE_STEP_STEPPERS and any(e < 0 for e in steps):
            raise ValueError(f"stepper {kind.value} needs positive steps")
        if isinstance(self.eps, list):
            if len(self.eps) != self.steps:
                raise ValueError(f"eps has {len(self.eps)} entries but steps = {self.steps}")
            if kind in CONSTANT_STEP_STEPPERS or self.problem in CONSTANT_STEP_PROBLEMS:
                if len(set(self.eps)) > 1:
                    raise ValueError(
                        f"{kind.value} on {self.problem.value} requires a constant step"
                    )
        if self.problem == Problem.NONLINEAR1D:
            self.spec.build_potential()
            if kind != StepperName.DISCRETE_GRADIENT:
                self.spec.linear_frequency()
        return self

    def step_sizes(self) -> List[float]:
        """One ε per step."""
        if isinstance(self.eps, list):
            return [float(e) for e in self.eps]
        return [float(self.eps)] * self.steps

    @property
    def constant_eps(self) -> Optional[float]:
        sizes = self.step_sizes()
        return sizes[0] if len(set(sizes)) == 1 else None

    @property
    def t0(self) -> float:
        return float(getattr(self.spec, "t0", 0.0))

    @property
    def horizon(self) -> float:
        return self.t0 + math.fsum(self.step_sizes())

    def with_step(self, eps: float) -> "RunConfig":
        """Same run over the same horizon with a constant step *eps*."""
        span = self.horizon - self.t0
        count = span / eps
        steps = int(round(count))
        if steps < 1 or abs(count - steps) > 1e-9 * max(1.0, count):
            raise ConfigError(f"step {eps:g} does not divide the horizon {span:g}")
        data = self.model_dump(mode="python")
        data["spec"] = self.spec
        data["eps"] = float(eps)
        data["steps"] = steps
        return RunConfig.model_validate(data)


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a run configuration file.

    A missing or unreadable file raises OSError naming the path; malformed
    JSON or schema violations raise ConfigError.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read run config {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    logger.debug("loaded %s: %s with %s", path, config.problem.value, config.stepper.label)
    return config


__all__ = [
    "COMPATIBILITY",
    "CONSTANT_STEP_PROBLEMS",
    "CONSTANT_STEP_STEPPERS",
    "Damped1DProblem",
    "KeplerProblem",
    "NEGATIVE_STEP_STEPPERS",
    "Nonlinear1DProblem",
    "Osc1DProblem",
    "OscNDProblem",
    "PROBLEM_MODELS",
    "ProblemSpec",
    "RunConfig",
    "StepperKind",
    "WaveModeModel",
    "WaveProblem",
    "load_run_config",
]
