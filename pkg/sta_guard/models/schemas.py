"""
Pydantic models/schemas for STA Guard.
Defines scheme descriptors, reports and request/response structures shared by
the engine, the CLI and the HTTP surface.
"""
import math
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_serializer, field_validator, model_validator

from sta_guard.config import settings


class SchemeKind(str, Enum):
    """Catalog of ancillary-function schemes"""
    FLAT_PI = "flat_pi"
    ARCSIN_EPS = "arcsin_eps"
    QUARTIC_LARGE_DELTA = "quartic_large_delta"
    OPTIMIZED_2L = "optimized_2l"
    REF_3L = "ref_3l"
    NUM1_4L = "num1_4l"
    NUM2_4L = "num2_4l"
    CUSTOM = "custom"


class Target(str, Enum):
    """Which synthesis branch and boundary-condition set applies"""
    TWO_LEVEL = "two_level"
    THREE_LEVEL = "three_level"


class BaselineKind(str, Enum):
    """Adiabatic reference pulses that are not built from a scheme"""
    ADIABATIC_2L = "adiabatic_2l"
    STIRAP_3L = "stirap_3l"


class Objective(str, Enum):
    """Transition sensitivity being minimized"""
    Q_TWO_LEVEL = "q"
    Q_THREE_LEVEL = "Q"


class AlphaMode(str, Enum):
    """How alpha is fixed for two-level synthesis"""
    AUTO = "auto"
    CONSTANT = "constant"
    REAL_RABI = "real_rabi"
    # alpha(t) as defined by the scheme itself, e.g. the alpha column of a custom table
    SCHEME = "scheme"


class PropagationMethod(str, Enum):
    """Norm-preserving stepper used by the propagator"""
    MAGNUS2 = "magnus2"
    MAGNUS4 = "magnus4"


class CustomTable(BaseModel):
    """Tabulated ancillary functions on dimensionless time tau = t/T"""
    tau: List[float] = Field(..., description="Strictly increasing samples from 0 to 1")
    theta: List[float] = Field(..., description="theta(tau) in radians")
    alpha: List[float] = Field(..., description="alpha(tau) in radians")
    gamma: Optional[List[float]] = Field(None, description="gamma(tau) in radians (zero if omitted)")

    @model_validator(mode="after")
    def check_lengths(self):
        n = len(self.tau)
        if n < 4:
            raise ValueError("custom tables need at least 4 samples")
        for name in ("theta", "alpha", "gamma"):
            values = getattr(self, name)
            if values is not None and len(values) != n:
                raise ValueError(f"column '{name}' has {len(values)} samples, expected {n}")
        if abs(self.tau[0]) > 0 or abs(self.tau[-1] - 1.0) > 0:
            raise ValueError("tau must start at 0 and end at 1")
        if np.any(np.diff(self.tau) <= 0):
            raise ValueError("tau must be strictly increasing")
        return self


class SchemeDescriptor(BaseModel):
    """Serializable description of an ancillary scheme"""
    kind: SchemeKind = Field(..., description="Scheme family")
    params: Dict[str, float] = Field(default_factory=dict, description="Named dimensionless parameters")
    T: float = Field(1.0, gt=0, description="Protocol duration")
    target: Optional[Target] = Field(None, description="Two- or three-level target (derived from kind if omitted)")
    table: Optional[CustomTable] = Field(None, description="Samples for custom schemes")

    @field_serializer("params")
    def serialize_params(self, params: Dict[str, float]) -> Dict[str, str]:
        # shortest text that round-trips the double exactly
        return {name: repr(float(value)) for name, value in params.items()}


class BaselineDescriptor(BaseModel):
    """Serializable description of an adiabatic reference pulse"""
    kind: BaselineKind = Field(..., description="Baseline family")
    params: Dict[str, float] = Field(default_factory=dict, description="omega0 (and delta0 for two levels)")
    T: float = Field(1.0, gt=0, description="Protocol duration")


class PulseSource(BaseModel):
    """Either a scheme to synthesize or an adiabatic baseline"""
    scheme: Optional[SchemeDescriptor] = None
    baseline: Optional[BaselineDescriptor] = None
    alpha_mode: AlphaMode = Field(AlphaMode.AUTO, description="alpha choice for two-level schemes")
    alpha0: Optional[float] = Field(None, description="Constant alpha when alpha_mode is constant")

    @model_validator(mode="after")
    def check_exactly_one(self):
        if (self.scheme is None) == (self.baseline is None):
            raise ValueError("exactly one of 'scheme' or 'baseline' must be given")
        return self


class BoundaryProfile(BaseModel):
    """Values and first three derivatives at t=0 and t=T (physical time units)"""
    theta_start: List[float] = Field(..., description="[theta, d/dt, d2/dt2, d3/dt3] at t=0")
    theta_end: List[float] = Field(..., description="[theta, d/dt, d2/dt2, d3/dt3] at t=T")
    alpha_start: List[float] = Field(..., description="[alpha, d/dt, d2/dt2, d3/dt3] at t=0")
    alpha_end: List[float] = Field(..., description="[alpha, d/dt, d2/dt2, d3/dt3] at t=T")
    analytic: bool = Field(True, description="Derivatives are exact rather than finite differences")
    error_estimate: float = Field(0.0, description="Estimated absolute error of the derivatives")


class PulseMetrics(BaseModel):
    """Pulse area and energy in the units of the comparison tables"""
    area: float = Field(..., ge=0, description="Pulse area A in multiples of pi")
    energy: float = Field(..., ge=0, description="Pulse energy E in multiples of pi^2 hbar / T")


class PerturbedModel(BaseModel):
    """Unwanted-transition context"""
    delta: float = Field(0.0, description="Level splitting to the unwanted level (angular frequency)")
    beta: float = Field(0.0, ge=-1.0, description="Relative strength of the unwanted coupling")
    phase: float = Field(0.0, description="Phase of the unwanted coupling (zeta or nu)")


class SensitivityReport(BaseModel):
    """Transition sensitivity with bound, asymptotics and error estimate"""
    objective: Objective = Field(..., description="q (two-level) or Q (three-level)")
    delta_t: float = Field(..., description="Dimensionless product Delta*T")
    value: float = Field(..., ge=0, description="Sensitivity value")
    quadrature_error: float = Field(..., ge=0, description="Absolute error estimate of value")
    lower_bound: float = Field(..., ge=0, description="(1-|Delta T|)^2 when |Delta T|<1 else 0")
    asymptotic_estimate: Optional[float] = Field(None, description="Leading large-Delta estimate")
    asymptotic_ratio: Optional[float] = Field(None, description="value / asymptotic_estimate")
    form_mismatch: Optional[float] = Field(
        None, description="q: difference between its two integral forms; Q: |Q(Delta) - Q(-Delta)|"
    )
    approximate_boundary: bool = Field(False, description="Scheme misses its boundary conditions on purpose")


class StartSummary(BaseModel):
    """One optimizer start"""
    index: int
    origin: str = Field(..., description="published, guess or sobol")
    initial_params: Dict[str, float]
    final_params: Dict[str, float]
    value: float
    evaluations: int
    converged: bool


class HistoryEntry(BaseModel):
    """One objective evaluation"""
    start: int
    params: Dict[str, float]
    value: float


class OptProblem(BaseModel):
    """Sensitivity minimization over one scheme family at fixed Delta*T"""
    family: SchemeKind = Field(..., description="Parametric scheme family")
    T: float = Field(1.0, gt=0, description="Protocol duration")
    objective: Optional[Objective] = Field(None, description="Derived from the family target if omitted")
    delta_t: float = Field(..., description="Dimensionless Delta*T")
    bounds: Optional[Dict[str, Tuple[float, float]]] = Field(None, description="Closed interval per parameter")
    starts: int = Field(default_factory=lambda: settings.opt_starts, ge=0)
    seed: int = Field(default_factory=lambda: settings.opt_seed)
    initial_guesses: List[Dict[str, float]] = Field(default_factory=list)
    use_published_starts: bool = Field(True, description="Add the published parameter sets as starts")
    max_evaluations: int = Field(default_factory=lambda: settings.opt_max_evaluations, gt=0)
    record_history: bool = False

    @field_validator("bounds")
    @classmethod
    def check_bounds(cls, bounds):
        if bounds is None:
            return bounds
        for name, (low, high) in bounds.items():
            if not (math.isfinite(low) and math.isfinite(high)) or low > high:
                raise ValueError(f"empty or non-finite bounds for '{name}': [{low}, {high}]")
        return bounds


class OptResult(BaseModel):
    """Outcome of a multi-start minimization"""
    problem: OptProblem
    best_params: Dict[str, float]
    best_value: float
    evaluations: int
    converged: bool
    lower_bound: float
    starts: List[StartSummary] = Field(default_factory=list)
    history: Optional[List[HistoryEntry]] = None
    version: str = Field(default_factory=lambda: settings.version)


class EvolutionSummary(BaseModel):
    """Serializable part of an evolution result"""
    p_target: float = Field(..., description="Population of the target bare state at t=T")
    norm_drift: float = Field(..., description="| ||psi(T)||^2 - 1 |")
    steps: int = Field(..., description="Accepted steps")
    final_populations: List[float]


class GridSpec(BaseModel):
    """Uniform grid, endpoints included"""
    start: float
    stop: float
    num: int = Field(..., ge=1)

    def values(self) -> List[float]:
        return np.linspace(self.start, self.stop, self.num).tolist()


class RunConfig(BaseModel):
    """Everything a CLI command needs; JSON config files mirror this model"""
    scheme: Optional[SchemeDescriptor] = None
    baseline: Optional[BaselineDescriptor] = None
    alpha_mode: AlphaMode = AlphaMode.AUTO
    alpha0: Optional[float] = None
    family: Optional[SchemeKind] = None
    objective: Optional[Objective] = None
    delta_t: List[float] = Field(default_factory=list)
    grid: Optional[GridSpec] = None
    betas: List[float] = Field(default_factory=list)
    bounds: Optional[Dict[str, Tuple[float, float]]] = None
    starts: int = Field(default_factory=lambda: settings.opt_starts, ge=0)
    seed: int = Field(default_factory=lambda: settings.opt_seed)
    max_evaluations: int = Field(default_factory=lambda: settings.opt_max_evaluations, gt=0)
    record_history: bool = False
    tune_baseline: bool = Field(True, description="Tune delta0 of the adiabatic table rows")
    samples: int = Field(default_factory=lambda: settings.csv_samples, ge=2)
    tol: Optional[float] = Field(None, gt=0, description="Propagator / quadrature tolerance override")
    method: PropagationMethod = Field(default_factory=lambda: PropagationMethod(settings.propagator_method))
    trajectory: bool = False
    out: Optional[str] = None

    def delta_t_values(self) -> List[float]:
        values = list(self.delta_t)
        if self.grid is not None:
            values.extend(self.grid.values())
        return values

    def pulse_source(self) -> PulseSource:
        return PulseSource(scheme=self.scheme, baseline=self.baseline,
                           alpha_mode=self.alpha_mode, alpha0=self.alpha0)


# Request models for the HTTP surface

class SensitivityRequest(BaseModel):
    scheme: SchemeDescriptor
    delta_t: float = Field(..., description="Dimensionless Delta*T")


class SensitivitySweepRequest(BaseModel):
    scheme: SchemeDescriptor
    delta_t: List[float] = Field(..., min_length=1)


class BetaSweepRequest(BaseModel):
    source: PulseSource
    delta_t: float
    betas: List[float] = Field(..., min_length=1)
    method: PropagationMethod = Field(default_factory=lambda: PropagationMethod(settings.propagator_method))


class PulseSampleRequest(BaseModel):
    source: PulseSource
    samples: int = Field(default_factory=lambda: settings.csv_samples, ge=2)


class APIResponse(BaseModel):
    """Standard API response wrapper"""
    success: bool = Field(True, description="Operation success status")
    message: str = Field("", description="Response message")
    data: Optional[Any] = Field(None, description="Response data")
    timestamp: datetime = Field(
        default_factory=datetime.utcnow, description="Response timestamp")
