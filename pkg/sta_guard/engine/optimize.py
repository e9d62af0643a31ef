"""
Sensitivity optimization for STA Guard.

Multi-start Nelder-Mead over the free parameters of a scheme family at a fixed
Delta*T. Starts come from the published parameter sets, user guesses and a
scrambled Sobol sequence over the bounds; the result is deterministic for a
given seed.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import minimize, minimize_scalar
from scipy.stats import qmc

from sta_guard.config import settings
from sta_guard.engine.ancillary import SCHEME_CLASSES, make_scheme
from sta_guard.engine.dynamics import HamiltonianSpec, evolve
from sta_guard.engine.sensitivity import Q_value, q_lower_bound, q_value
from sta_guard.engine.synthesis import make_adiabatic_2l
from sta_guard.errors import (
    InvalidArgumentError, NumericError, OptimizationError, SynthesisError
)
from sta_guard.models.schemas import (
    HistoryEntry, Objective, OptProblem, OptResult, PerturbedModel, SchemeKind,
    StartSummary, Target
)

logger = logging.getLogger(__name__)

# objective value assigned to parameter sets that cannot be evaluated
PENALTY = 1e6


@dataclass(frozen=True)
class FamilySpec:
    """Optimizable scheme family: parameter bounds and published parameter sets"""
    kind: SchemeKind
    bounds: Tuple[Tuple[str, float, float], ...]
    published: Tuple[Tuple[float, Tuple[float, ...]], ...]  # (Delta*T, params)

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _, _ in self.bounds)

    @property
    def target(self) -> Target:
        return SCHEME_CLASSES[self.kind].target

    @property
    def objective(self) -> Objective:
        return Objective.Q_TWO_LEVEL if self.target == Target.TWO_LEVEL else Objective.Q_THREE_LEVEL

    def default_bounds(self) -> Dict[str, Tuple[float, float]]:
        return {name: (low, high) for name, low, high in self.bounds}


FAMILIES: Dict[SchemeKind, FamilySpec] = {
    SchemeKind.OPTIMIZED_2L: FamilySpec(
        kind=SchemeKind.OPTIMIZED_2L,
        bounds=(("c0", -5.0, 5.0), ("c1", -40.0, 40.0)),
        published=((1.0, (1.376, 14.927)), (3.0, (1.266, 7.873))),
    ),
    SchemeKind.NUM1_4L: FamilySpec(
        kind=SchemeKind.NUM1_4L,
        bounds=(("c0", -200.0, 200.0), ("c1", -200.0, 200.0)),
        published=((1.0, (-76.546, 49.040)), (3.0, (-76.735, 46.054))),
    ),
    SchemeKind.NUM2_4L: FamilySpec(
        kind=SchemeKind.NUM2_4L,
        bounds=(("d0", 0.55, 2.5), ("d1", -50.0, 50.0)),
        published=((1.0, (0.794, -15.633)), (3.0, (0.852, -13.204))),
    ),
}


def get_family(kind: SchemeKind) -> FamilySpec:
    try:
        return FAMILIES[SchemeKind(kind)]
    except (KeyError, ValueError):
        raise InvalidArgumentError(
            f"'{kind}' is not an optimizable family; choose one of {[k.value for k in FAMILIES]}"
        )


def _resolve_bounds(family: FamilySpec, overrides: Optional[Dict[str, Tuple[float, float]]]):
    bounds = family.default_bounds()
    for name, interval in (overrides or {}).items():
        if name not in bounds:
            raise InvalidArgumentError(f"{family.kind.value} has no parameter '{name}'")
        bounds[name] = (float(interval[0]), float(interval[1]))
    if family.kind == SchemeKind.NUM2_4L:
        low, high = SCHEME_CLASSES[family.kind].D0_RANGE
        d0_low, d0_high = bounds["d0"]
        bounds["d0"] = (max(d0_low, low), min(d0_high, high))
    lower = np.array([bounds[name][0] for name in family.param_names])
    upper = np.array([bounds[name][1] for name in family.param_names])
    if np.any(lower > upper):
        raise InvalidArgumentError(f"Empty bounds for {family.kind.value}: {bounds}")
    return lower, upper


class SensitivityObjective:
    """Callable objective over a parameter vector, projected onto the bounds"""

    def __init__(self, family: FamilySpec, T: float, delta_t: float, objective: Objective,
                 lower: np.ndarray, upper: np.ndarray, record: bool = False):
        self.family = family
        self.T = T
        self.delta_t = delta_t
        self.lower = lower
        self.upper = upper
        self._evaluate = q_value if objective == Objective.Q_TWO_LEVEL else Q_value
        self.evaluations = 0
        self.failures = 0
        self.start = 0
        self.history: Optional[List[HistoryEntry]] = [] if record else None

    def params(self, x) -> Dict[str, float]:
        x = np.clip(np.asarray(x, dtype=float), self.lower, self.upper)
        return dict(zip(self.family.param_names, x.tolist()))

    def __call__(self, x) -> float:
        params = self.params(x)
        self.evaluations += 1
        try:
            value = self._evaluate(make_scheme(self.family.kind, self.T, params), self.delta_t)
        except (InvalidArgumentError, SynthesisError, NumericError) as e:
            self.failures += 1
            logger.debug(f"objective failed at {params}: {e}")
            value = PENALTY
        if self.history is not None:
            self.history.append(HistoryEntry(start=self.start, params=params, value=value))
        return value


def _sobol_points(count: int, lower: np.ndarray, upper: np.ndarray, seed: int) -> np.ndarray:
    if count == 0:
        return np.empty((0, lower.size))
    sampler = qmc.Sobol(d=lower.size, scramble=True, seed=seed)
    points = sampler.random_base2(m=max(0, math.ceil(math.log2(count))))[:count]
    return qmc.scale(points, lower, upper)


def minimize_sensitivity(problem: OptProblem) -> OptResult:
    """Best local minimum of q or Q over all starts"""
    family = get_family(problem.family)
    objective = problem.objective or family.objective
    if objective != family.objective:
        raise InvalidArgumentError(
            f"{family.kind.value} is a {family.target.value} family; objective must be {family.objective.value}"
        )
    lower, upper = _resolve_bounds(family, problem.bounds)
    evaluator = SensitivityObjective(family, problem.T, problem.delta_t, objective,
                                     lower, upper, problem.record_history)

    starts: List[Tuple[str, np.ndarray]] = []
    if problem.use_published_starts:
        starts += [("published", np.array(params)) for _, params in family.published]
    for guess in problem.initial_guesses:
        unknown = set(guess) - set(family.param_names)
        if unknown:
            raise InvalidArgumentError(f"Unknown parameters in initial guess: {sorted(unknown)}")
        midpoint = 0.5 * (lower + upper)
        starts.append(("guess", np.array([guess.get(name, midpoint[i])
                                          for i, name in enumerate(family.param_names)])))
    starts += [("sobol", x) for x in _sobol_points(problem.starts, lower, upper, problem.seed)]
    if not starts:
        raise InvalidArgumentError("Optimization needs at least one start")

    logger.info(
        f"Minimizing {objective.value} for {family.kind.value} at Delta T={problem.delta_t:g} "
        f"from {len(starts)} starts"
    )
    summaries = []
    for index, (origin, x0) in enumerate(starts):
        x0 = np.clip(x0, lower, upper)
        evaluator.start = index
        used = evaluator.evaluations
        result = minimize(
            evaluator, x0, method="Nelder-Mead",
            bounds=list(zip(lower, upper)),
            options={
                "maxfev": problem.max_evaluations,
                "xatol": settings.opt_xatol * max(1.0, float(np.abs(x0).max())),
                "fatol": math.inf,
            },
        )
        final = evaluator.params(result.x)
        value = float(result.fun)
        summaries.append(StartSummary(
            index=index, origin=origin,
            initial_params=evaluator.params(x0), final_params=final,
            value=value, evaluations=evaluator.evaluations - used,
            converged=bool(result.success),
        ))
        logger.debug(f"start {index} ({origin}): {objective.value}={value:.3e} at {final}")

    finite = [s for s in summaries if s.value < PENALTY]
    if not finite:
        raise OptimizationError(
            f"No start produced a finite {objective.value} for {family.kind.value} "
            f"({evaluator.failures} failed evaluations)"
        )
    best = min(finite, key=lambda s: (s.value, tuple(s.final_params.values())))
    logger.info(f"Best {objective.value}={best.value:.3e} at {best.final_params} ({evaluator.evaluations} evaluations)")
    return OptResult(
        problem=problem,
        best_params=best.final_params,
        best_value=best.value,
        evaluations=evaluator.evaluations,
        converged=best.converged,
        lower_bound=q_lower_bound(problem.delta_t),
        starts=summaries,
        history=evaluator.history,
    )


def sensitivity_frontier(family: SchemeKind, delta_t_grid: Iterable[float], *, T: float = 1.0,
                         starts: Optional[int] = None, seed: Optional[int] = None,
                         bounds: Optional[Dict[str, Tuple[float, float]]] = None) -> pd.DataFrame:
    """
    Minimum sensitivity per grid point, warm-started from the previous point's optimum.
    Failed points are reported with NaN values and the error message.
    """
    spec = get_family(family)
    rows = []
    warm: Optional[Dict[str, float]] = None
    for delta_t in delta_t_grid:
        problem = OptProblem(
            family=spec.kind, T=T, delta_t=float(delta_t), bounds=bounds,
            starts=settings.opt_starts if starts is None else starts,
            seed=settings.opt_seed if seed is None else seed,
            initial_guesses=[warm] if warm else [],
        )
        row = {"DeltaT": float(delta_t)}
        try:
            result = minimize_sensitivity(problem)
        except OptimizationError as e:
            logger.error(f"Frontier point Delta T={delta_t:g} failed: {e}")
            row.update({"value": np.nan, **{name: np.nan for name in spec.param_names},
                        "evaluations": 0, "converged": False, "error": str(e)})
        else:
            warm = result.best_params
            row.update({"value": result.best_value, **result.best_params,
                        "evaluations": result.evaluations, "converged": result.converged, "error": ""})
        rows.append(row)
    columns = ["DeltaT", "value", *spec.param_names, "evaluations", "converged", "error"]
    return pd.DataFrame(rows, columns=columns)


def _inversion_probability(T: float, omega0: float, delta0: float) -> float:
    spec = HamiltonianSpec(make_adiabatic_2l(T, omega0, delta0), PerturbedModel())
    return evolve(spec).p_target


def tune_adiabatic_2l(energy: float, T: float = 1.0, scan_points: int = 41) -> Tuple[float, float]:
    """
    Sinusoidal adiabatic baseline with the given energy (pi^2 hbar/T units).
    omega0 = (pi/T) sqrt(2E); delta0 maximizes the error-free inversion over [0, 20 pi/T].
    """
    if not energy > 0:
        raise InvalidArgumentError(f"Target energy must be positive, got {energy}")
    if not T > 0:
        raise InvalidArgumentError(f"Duration T must be positive, got {T}")
    omega0 = (math.pi / T) * math.sqrt(2.0 * energy)

    grid = np.linspace(0.0, 20.0 * math.pi / T, scan_points)
    scan = np.array([_inversion_probability(T, omega0, d) for d in grid])
    i = int(np.argmax(scan))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    refined = minimize_scalar(lambda d: -_inversion_probability(T, omega0, d),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-6 / T})
    delta0 = float(refined.x) if -refined.fun >= scan[i] else float(grid[i])
    logger.info(f"Adiabatic baseline E={energy:g}: omega0 T={omega0 * T:.4f}, delta0 T={delta0 * T:.4f}")
    return omega0, delta0


def scheme_catalog() -> List[Dict]:
    """Catalog families with their targets, parameters and optimizer defaults"""
    entries = []
    for kind, cls in SCHEME_CLASSES.items():
        family = FAMILIES.get(kind)
        entries.append({
            "kind": kind.value,
            "target": cls.target.value,
            "param_names": list(cls.param_names),
            "approximate_boundary": cls.approximate_boundary,
            "optimizable": family is not None,
            "default_bounds": family.default_bounds() if family else None,
            "published": {f"{dt:g}": list(p) for dt, p in family.published} if family else None,
        })
    return entries
