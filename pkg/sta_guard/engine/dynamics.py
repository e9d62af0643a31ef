"""
Exact propagation of the perturbed Hamiltonians for STA Guard.

A two-level pulse drives levels 1-2 of a 3-level system whose third level is
reached from level 1 with coupling beta*Omega12; a three-level pulse drives
levels 1-2-3 of a 4-level system with an extra level reached from level 2
with coupling beta*Omega23. hbar = 1 throughout.

The default stepper is the fourth-order Magnus integrator (two Gauss nodes and
one commutator) with step-doubling error control; each step is an exact
unitary, so the norm only drifts by rounding.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np
import pandas as pd

from sta_guard.config import settings
from sta_guard.engine.ancillary import AncillaryScheme
from sta_guard.engine.synthesis import Pulse
from sta_guard.errors import InvalidArgumentError, NumericError
from sta_guard.models.schemas import EvolutionSummary, PerturbedModel, PropagationMethod, Target

logger = logging.getLogger(__name__)

_GAUSS_OFFSET = math.sqrt(3.0) / 6.0
_NODES = {
    PropagationMethod.MAGNUS2: np.array([0.5]),
    PropagationMethod.MAGNUS4: np.array([0.5 - _GAUSS_OFFSET, 0.5 + _GAUSS_OFFSET]),
}
_ORDER = {PropagationMethod.MAGNUS2: 2, PropagationMethod.MAGNUS4: 4}


@dataclass(frozen=True)
class HamiltonianSpec:
    """Pulse plus the unwanted-transition model"""
    pulse: Pulse
    model: PerturbedModel

    @property
    def dimension(self) -> int:
        return self.pulse.dimension

    @property
    def target_index(self) -> int:
        # |2> for the 3-level model, |3> for the 4-level model
        return 1 if self.dimension == 3 else 2

    def with_model(self, **changes) -> "HamiltonianSpec":
        return replace(self, model=self.model.model_copy(update=changes))


@dataclass(frozen=True)
class EvolutionResult:
    final_state: np.ndarray
    p_target: float
    norm_drift: float
    steps: int
    populations: Optional[pd.DataFrame] = None

    def summary(self) -> EvolutionSummary:
        return EvolutionSummary(
            p_target=self.p_target,
            norm_drift=self.norm_drift,
            steps=self.steps,
            final_populations=(np.abs(self.final_state) ** 2).tolist(),
        )


def hamiltonian_stack(spec: HamiltonianSpec, t) -> np.ndarray:
    """H(t) for an array of times, shape (n, d, d)"""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    controls = np.asarray(spec.pulse.controls(t), dtype=float)
    beta = spec.model.beta
    twist = np.exp(1j * spec.model.phase)
    delta = spec.model.delta
    d = spec.dimension
    H = np.zeros((t.size, d, d), dtype=complex)

    if d == 3:
        omega = controls[0] + 1j * controls[1]
        delta2 = controls[2]
        H[:, 0, 0] = -delta2
        H[:, 1, 1] = delta2
        H[:, 2, 2] = -2.0 * delta + delta2
        H[:, 1, 0] = omega
        H[:, 0, 1] = np.conj(omega)
        H[:, 2, 0] = beta * twist * omega
        H[:, 0, 2] = np.conj(H[:, 2, 0])
    else:
        omega12, omega23 = controls
        H[:, 0, 1] = H[:, 1, 0] = omega12
        H[:, 1, 2] = H[:, 2, 1] = omega23
        H[:, 3, 1] = beta * twist * omega23
        H[:, 1, 3] = np.conj(H[:, 3, 1])
        H[:, 3, 3] = -2.0 * delta
    return 0.5 * H


def build_hamiltonian(spec: HamiltonianSpec, t: float) -> np.ndarray:
    if not 0.0 <= t <= spec.pulse.T:
        raise InvalidArgumentError(f"t={t} outside [0, {spec.pulse.T}]")
    return hamiltonian_stack(spec, t)[0]


def _unitaries(H: np.ndarray, h: np.ndarray, method: PropagationMethod) -> np.ndarray:
    """exp(-i M) for stacked Magnus generators; H has shape (k, nodes, d, d), h shape (k,)"""
    h = h[:, None, None]
    if method == PropagationMethod.MAGNUS2:
        M = h * H[:, 0]
    else:
        H1, H2 = H[:, 0], H[:, 1]
        commutator = H2 @ H1 - H1 @ H2
        M = 0.5 * h * (H1 + H2) - 1j * (math.sqrt(3.0) / 12.0) * h ** 2 * commutator
    M = 0.5 * (M + np.conj(np.swapaxes(M, -1, -2)))
    w, V = np.linalg.eigh(M)
    return (V * np.exp(-1j * w)[:, None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def _initial_state(spec: HamiltonianSpec, psi0) -> np.ndarray:
    if psi0 is None:
        psi = np.zeros(spec.dimension, dtype=complex)
        psi[0] = 1.0
        return psi
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape != (spec.dimension,):
        raise InvalidArgumentError(f"psi0 must have shape ({spec.dimension},), got {psi.shape}")
    if abs(np.vdot(psi, psi).real - 1.0) > 1e-12:
        raise InvalidArgumentError("psi0 must be normalized")
    return psi


def evolve(spec: HamiltonianSpec, psi0=None, *, method: Optional[PropagationMethod] = None,
           tol: Optional[float] = None, record: bool = False) -> EvolutionResult:
    """
    Integrate i dpsi/dt = H(t) psi over [0, T].

    Steps are controlled by step doubling with local error target `tol` and capped
    at min(T/propagator_min_steps, propagator_phase_cap/||H||).
    """
    method = PropagationMethod(method or settings.propagator_method)
    tol = settings.propagator_tol if tol is None else tol
    nodes = _NODES[method]
    order = _ORDER[method]
    T = spec.pulse.T
    h_max = T / settings.propagator_min_steps
    h_min = T * 1e-12

    psi = _initial_state(spec, psi0)
    t = 0.0
    h = h_max
    steps = 0
    rejected = 0
    times = [0.0]
    history = [np.abs(psi) ** 2] if record else None

    while t < T:
        remaining = T - t
        last = h >= remaining
        if last:
            h = remaining
        offsets = np.concatenate([h * nodes, 0.5 * h * nodes, 0.5 * h + 0.5 * h * nodes])
        H = hamiltonian_stack(spec, t + offsets).reshape(3, nodes.size, spec.dimension, spec.dimension)

        cap = min(h_max, settings.propagator_phase_cap / max(np.linalg.norm(H, axis=(-2, -1)).max(), 1e-300))
        if h > cap * (1.0 + 1e-12):
            h = cap
            continue

        U = _unitaries(H, np.array([h, 0.5 * h, 0.5 * h]), method)
        coarse = U[0] @ psi
        fine = U[2] @ (U[1] @ psi)
        error = np.linalg.norm(fine - coarse) / (2 ** order - 1)

        factor = 5.0 if error == 0 else min(5.0, 0.9 * (tol / error) ** (1.0 / (order + 1)))
        if error > tol:
            rejected += 1
            h *= max(0.1, factor)
            if h < h_min:
                raise NumericError(
                    f"Step size underflow at t={t:.6g} (h={h:.3e}, error {error:.3e})",
                    achieved_error=float(error),
                )
            continue

        psi = fine
        t = T if last else t + h
        steps += 1
        if record:
            times.append(t)
            history.append(np.abs(psi) ** 2)
        h = max(h * factor, h_min)

    norm = float(np.vdot(psi, psi).real)
    populations = None
    if record:
        populations = pd.DataFrame(np.array(history), columns=[f"p{k + 1}" for k in range(spec.dimension)])
        populations.insert(0, "t", times)
    logger.debug(f"evolve: {steps} steps ({rejected} rejected), norm drift {abs(norm - 1.0):.2e}")
    return EvolutionResult(
        final_state=psi,
        p_target=float(abs(psi[spec.target_index]) ** 2),
        norm_drift=abs(norm - 1.0),
        steps=steps,
        populations=populations,
    )


def propagate_rk4(spec: HamiltonianSpec, psi0=None, steps: int = 100000, chunk: int = 4096) -> EvolutionResult:
    """Classical fixed-step RK4 reference solution (not norm preserving)"""
    if steps < 1:
        raise InvalidArgumentError(f"steps must be positive, got {steps}")
    psi = _initial_state(spec, psi0)
    T = spec.pulse.T
    h = T / steps
    for first in range(0, steps, chunk):
        count = min(chunk, steps - first)
        starts = (first + np.arange(count)) * h
        H = hamiltonian_stack(spec, (starts[:, None] + h * np.array([0.0, 0.5, 1.0])).ravel())
        H = H.reshape(count, 3, spec.dimension, spec.dimension)
        for n in range(count):
            H0, Hm, H1 = H[n]
            k1 = -1j * (H0 @ psi)
            k2 = -1j * (Hm @ (psi + 0.5 * h * k1))
            k3 = -1j * (Hm @ (psi + 0.5 * h * k2))
            k4 = -1j * (H1 @ (psi + h * k3))
            psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    norm = float(np.vdot(psi, psi).real)
    return EvolutionResult(
        final_state=psi,
        p_target=float(abs(psi[spec.target_index]) ** 2),
        norm_drift=abs(norm - 1.0),
        steps=steps,
    )


def beta_sweep(spec: HamiltonianSpec, betas: Iterable[float], *,
               method: Optional[PropagationMethod] = None, tol: Optional[float] = None) -> pd.DataFrame:
    """P_target for each beta, other model fields taken from the template spec"""
    rows = []
    for beta in betas:
        result = evolve(spec.with_model(beta=float(beta)), method=method, tol=tol)
        rows.append({"beta": float(beta), "P_target": result.p_target})
    logger.info(f"Beta sweep of {spec.pulse.label}: {len(rows)} points at Delta={spec.model.delta:g}")
    return pd.DataFrame(rows, columns=["beta", "P_target"])


def fit_transition_sensitivity(betas, probabilities) -> float:
    """Coefficient s of 1 - P = a + s beta^2 + u beta^4 (least squares in beta^2)"""
    x = np.asarray(betas, dtype=float) ** 2
    loss = 1.0 - np.asarray(probabilities, dtype=float)
    if np.unique(x).size < 2:
        raise InvalidArgumentError("Need at least two distinct |beta| values to fit")
    degree = min(2, np.unique(x).size - 1)
    coefficients = np.polynomial.polynomial.polyfit(x, loss, degree)
    return float(coefficients[1])


def invariant_populations(scheme: AncillaryScheme, t) -> np.ndarray:
    """
    Bare-state populations of the ideal (beta = 0) solution, shape (d, n).
    Two levels: (cos^2(theta/2), sin^2(theta/2), 0).
    Three levels: (sin^2 theta cos^2 alpha, cos^2 theta, sin^2 theta sin^2 alpha, 0).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    theta = scheme.theta(t)
    if scheme.target == Target.TWO_LEVEL:
        return np.stack([np.cos(0.5 * theta) ** 2, np.sin(0.5 * theta) ** 2, np.zeros_like(t)])
    alpha = scheme.alpha(t)
    sin2 = np.sin(theta) ** 2
    return np.stack([sin2 * np.cos(alpha) ** 2, np.cos(theta) ** 2, sin2 * np.sin(alpha) ** 2, np.zeros_like(t)])
