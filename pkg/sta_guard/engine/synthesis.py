"""
Pulse synthesis for STA Guard.

Inverts the invariant-based relations to turn an ancillary scheme into
physical controls: (Omega_R, Omega_I, delta2) for two levels and
(Omega12, Omega23) for three levels. Also builds the adiabatic baselines and
computes pulse area/energy in the units of the comparison tables.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import pandas as pd

from sta_guard.config import settings
from sta_guard.engine.ancillary import AncillaryScheme, scheme_from_descriptor
from sta_guard.engine.quadrature import integrate
from sta_guard.errors import InvalidArgumentError, SynthesisError
from sta_guard.models.schemas import (
    AlphaMode, BaselineDescriptor, BaselineKind, PulseMetrics, PulseSource, Target
)

logger = logging.getLogger(__name__)

Controls = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Pulse:
    """Time-parameterized controls on [0, T]; `controls(t)` returns one row per column"""
    T: float
    controls: Controls
    label: str = ""
    scheme: Optional[AncillaryScheme] = field(default=None, repr=False, compare=False)

    columns: Tuple[str, ...] = ()
    dimension = 0

    def rabi_squared(self, t) -> np.ndarray:
        raise NotImplementedError

    def sample(self, n: Optional[int] = None) -> pd.DataFrame:
        """Uniform samples including both endpoints"""
        n = settings.csv_samples if n is None else n
        if n < 2:
            raise InvalidArgumentError(f"Need at least 2 samples, got {n}")
        t = np.linspace(0.0, self.T, n)
        values = np.asarray(self.controls(t), dtype=float)
        frame = pd.DataFrame({"t": t})
        for name, column in zip(self.columns, values):
            frame[name] = column
        return frame

    def table(self) -> pd.DataFrame:
        return self.sample(settings.validation_grid)


@dataclass(frozen=True)
class PulseTwoLevel(Pulse):
    columns: Tuple[str, ...] = ("Omega_R", "Omega_I", "delta2")
    dimension = 3

    def omega_r(self, t) -> np.ndarray:
        return self.controls(np.asarray(t, dtype=float))[0]

    def omega_i(self, t) -> np.ndarray:
        return self.controls(np.asarray(t, dtype=float))[1]

    def delta2(self, t) -> np.ndarray:
        return self.controls(np.asarray(t, dtype=float))[2]

    def omega12(self, t) -> np.ndarray:
        c = self.controls(np.asarray(t, dtype=float))
        return c[0] + 1j * c[1]

    def rabi_squared(self, t) -> np.ndarray:
        c = self.controls(np.asarray(t, dtype=float))
        return c[0] ** 2 + c[1] ** 2


@dataclass(frozen=True)
class PulseThreeLevel(Pulse):
    columns: Tuple[str, ...] = ("Omega12", "Omega23")
    dimension = 4

    def omega12(self, t) -> np.ndarray:
        return self.controls(np.asarray(t, dtype=float))[0]

    def omega23(self, t) -> np.ndarray:
        return self.controls(np.asarray(t, dtype=float))[1]

    def rabi_squared(self, t) -> np.ndarray:
        c = self.controls(np.asarray(t, dtype=float))
        return c[0] ** 2 + c[1] ** 2


class RealRabiPhase:
    """
    alpha(t) making the two-level Rabi frequency real.

    alpha = -atan2(theta', sin(theta) gamma') + k pi, with the branch k chosen
    for continuity. Branch changes are located on a dense grid and refined by
    bisection; alpha' follows analytically and does not depend on k.
    """

    def __init__(self, scheme: AncillaryScheme, grid: Optional[int] = None):
        self.scheme = scheme
        n = settings.validation_grid if grid is None else grid
        tau = np.linspace(0.0, 1.0, n)
        x, y, _, _ = self._components(tau)
        radius = np.hypot(x, y)
        scale = radius.max()
        if not scale > 0:
            raise SynthesisError("Rabi frequency vanishes on the whole interval", t=0.0)
        defined = radius > 1e-12 * scale

        run = 0
        for i, ok in enumerate(defined):
            run = 0 if ok else run + 1
            if run >= 3:
                start = (i - run + 1) * scheme.T / (n - 1)
                raise SynthesisError(
                    f"alpha is undefined: theta' and sin(theta) gamma' vanish together "
                    f"on [{start:.6g}, {tau[i] * scheme.T:.6g}]",
                    t=start,
                )

        index = np.where(defined, np.arange(n), -1)
        index = np.maximum.accumulate(index)
        index[index < 0] = np.argmax(defined)
        raw = self._raw(tau)[index]

        jump_tau = []
        offsets = [0]
        for i in np.flatnonzero(np.abs(np.diff(raw)) > 0.5 * math.pi):
            left, right = raw[i], raw[i + 1]
            jump_tau.append(self._locate(tau[i], tau[i + 1], left, right))
            offsets.append(offsets[-1] - int(round((right - left) / math.pi)))
        self._jump_tau = np.array(jump_tau)
        self._offsets = np.array(offsets)
        if jump_tau:
            logger.debug(f"real-Rabi alpha: {len(jump_tau)} branch changes at tau={self._jump_tau}")

    def _components(self, tau):
        theta = self.scheme.theta_tau(tau)
        gamma = self.scheme.gamma_tau(tau)
        sin, cos = np.sin(theta[0]), np.cos(theta[0])
        x = sin * gamma[1]
        y = theta[1]
        dx = cos * theta[1] * gamma[1] + sin * gamma[2]
        dy = theta[2]
        return x, y, dx, dy

    def _raw(self, tau):
        x, y, _, _ = self._components(tau)
        return -np.arctan2(y, x)

    def _locate(self, lo: float, hi: float, left: float, right: float) -> float:
        def closer_to_left(s):
            value = self._raw(np.array([s]))[0]
            d_left = abs(math.remainder(value - left, 2 * math.pi))
            d_right = abs(math.remainder(value - right, 2 * math.pi))
            return d_left <= d_right

        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if closer_to_left(mid):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def alpha_tau(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        branch = self._offsets[np.searchsorted(self._jump_tau, tau, side="right")]
        return self._raw(tau) + math.pi * branch

    def alpha_dot_tau(self, tau) -> np.ndarray:
        x, y, dx, dy = self._components(np.asarray(tau, dtype=float))
        r2 = x ** 2 + y ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = -(x * dy - y * dx) / r2
        return np.where(r2 > 1e-24, rate, 0.0)

    def alpha(self, t) -> np.ndarray:
        return self.alpha_tau(np.asarray(t, dtype=float) / self.scheme.T)

    def alpha_dot(self, t) -> np.ndarray:
        return self.alpha_dot_tau(np.asarray(t, dtype=float) / self.scheme.T) / self.scheme.T


def choose_alpha_real(scheme: AncillaryScheme) -> RealRabiPhase:
    if scheme.target != Target.TWO_LEVEL:
        raise InvalidArgumentError("choose_alpha_real applies to two-level schemes only")
    return RealRabiPhase(scheme)


def _check_finite(pulse: Pulse) -> None:
    t = np.linspace(0.0, pulse.T, settings.validation_grid)
    values = np.asarray(pulse.controls(t), dtype=float)
    limit = settings.divergence_threshold / pulse.T
    bad = ~np.isfinite(values) | (np.abs(values) > limit)
    if np.any(bad):
        t_bad = float(t[np.argmax(bad.any(axis=0))])
        raise SynthesisError(f"{pulse.label}: Rabi frequency diverges near t={t_bad:.6g}", t=t_bad)


def synth_two_level(scheme: AncillaryScheme, alpha_mode: AlphaMode = AlphaMode.AUTO,
                    alpha0: Optional[float] = None) -> PulseTwoLevel:
    """
    Omega_R = cos(a) sin(th) g' - sin(a) th'
    Omega_I = sin(a) sin(th) g' + cos(a) th'
    delta2  = -cos(th) g' - a'
    """
    if scheme.target != Target.TWO_LEVEL:
        raise InvalidArgumentError(f"{scheme.kind.value} is not a two-level scheme")
    alpha_mode = AlphaMode(alpha_mode)
    if alpha_mode == AlphaMode.AUTO:
        if scheme.has_alpha:
            alpha_mode = AlphaMode.SCHEME
        elif scheme.default_alpha is not None:
            alpha_mode = AlphaMode.CONSTANT
        else:
            alpha_mode = AlphaMode.REAL_RABI

    T = scheme.T
    if alpha_mode == AlphaMode.CONSTANT:
        value = alpha0 if alpha0 is not None else (scheme.default_alpha or 0.0)

        def alpha_of(tau):
            return np.full(np.shape(tau), value), np.zeros(np.shape(tau))
        label = f"{scheme.kind.value} (alpha={value:.6g})"
    elif alpha_mode == AlphaMode.SCHEME:
        def alpha_of(tau):
            alpha = scheme.alpha_tau(tau)
            return alpha[0], alpha[1]
        label = f"{scheme.kind.value} (scheme alpha)"
    else:
        phase = choose_alpha_real(scheme)

        def alpha_of(tau):
            return phase.alpha_tau(tau), phase.alpha_dot_tau(tau)
        label = f"{scheme.kind.value} (real Rabi)"

    def controls(t):
        tau = np.asarray(t, dtype=float) / T
        theta = scheme.theta_tau(tau)
        gamma = scheme.gamma_tau(tau)
        alpha, alpha_dot = alpha_of(tau)
        sin_a, cos_a = np.sin(alpha), np.cos(alpha)
        drive = np.sin(theta[0]) * gamma[1]
        return np.stack([
            cos_a * drive - sin_a * theta[1],
            sin_a * drive + cos_a * theta[1],
            -np.cos(theta[0]) * gamma[1] - alpha_dot,
        ]) / T

    pulse = PulseTwoLevel(T=T, controls=controls, label=label, scheme=scheme)
    _check_finite(pulse)
    return pulse


def synth_three_level(scheme: AncillaryScheme) -> PulseThreeLevel:
    """
    Omega12 = 2(-a' tan(th) sin(a) + th' cos(a))
    Omega23 = -2(a' tan(th) cos(a) + th' sin(a))
    """
    if scheme.target != Target.THREE_LEVEL:
        raise InvalidArgumentError(f"{scheme.kind.value} is not a three-level scheme")
    T = scheme.T

    def controls(t):
        tau = np.asarray(t, dtype=float) / T
        theta = scheme.theta_tau(tau)
        alpha = scheme.alpha_tau(tau)
        tan_term = scheme.tan_term_tau(tau)
        sin_a, cos_a = np.sin(alpha[0]), np.cos(alpha[0])
        return np.stack([
            2.0 * (-tan_term * sin_a + theta[1] * cos_a),
            -2.0 * (tan_term * cos_a + theta[1] * sin_a),
        ]) / T

    pulse = PulseThreeLevel(T=T, controls=controls, label=scheme.kind.value, scheme=scheme)
    _check_finite(pulse)
    return pulse


def make_adiabatic_2l(T: float, omega0: float, delta0: float) -> PulseTwoLevel:
    """Omega_R = omega0 sin(pi t/T), delta2 = -delta0 cos(pi t/T)"""
    if not T > 0:
        raise InvalidArgumentError(f"Duration T must be positive, got {T}")
    if not omega0 >= 0:
        raise InvalidArgumentError(f"omega0 must be non-negative, got {omega0}")

    def controls(t):
        phase = math.pi * np.asarray(t, dtype=float) / T
        return np.stack([omega0 * np.sin(phase), np.zeros_like(phase), -delta0 * np.cos(phase)])

    return PulseTwoLevel(T=float(T), controls=controls,
                         label=f"adiabatic (omega0 T={omega0 * T:.4g}, delta0 T={delta0 * T:.4g})")


def make_stirap_3l(T: float, omega0: float) -> PulseThreeLevel:
    """Counterintuitive ordering: Omega23 = omega0 cos(pi t/2T) leads Omega12 = omega0 sin(pi t/2T)"""
    if not T > 0:
        raise InvalidArgumentError(f"Duration T must be positive, got {T}")
    if not omega0 >= 0:
        raise InvalidArgumentError(f"omega0 must be non-negative, got {omega0}")

    def controls(t):
        phase = 0.5 * math.pi * np.asarray(t, dtype=float) / T
        return np.stack([omega0 * np.sin(phase), omega0 * np.cos(phase)])

    return PulseThreeLevel(T=float(T), controls=controls, label=f"STIRAP (omega0 T={omega0 * T:.4g})")


def synthesize(scheme: AncillaryScheme, alpha_mode: AlphaMode = AlphaMode.AUTO,
               alpha0: Optional[float] = None) -> Pulse:
    """Dispatch on the scheme target"""
    if scheme.target == Target.TWO_LEVEL:
        return synth_two_level(scheme, alpha_mode, alpha0)
    return synth_three_level(scheme)


def make_baseline(descriptor: BaselineDescriptor) -> Pulse:
    params = dict(descriptor.params)
    omega0 = params.pop("omega0", None)
    if omega0 is None:
        raise InvalidArgumentError(f"{descriptor.kind.value} needs parameter 'omega0'")
    if descriptor.kind == BaselineKind.ADIABATIC_2L:
        delta0 = params.pop("delta0", 0.0)
        pulse = make_adiabatic_2l(descriptor.T, omega0, delta0)
    else:
        pulse = make_stirap_3l(descriptor.T, omega0)
    if params:
        raise InvalidArgumentError(f"Unknown parameters for {descriptor.kind.value}: {sorted(params)}")
    return pulse


def resolve_pulse(source: PulseSource) -> Pulse:
    """Pulse from either a scheme descriptor or a baseline descriptor"""
    if source.scheme is not None:
        return synthesize(scheme_from_descriptor(source.scheme), source.alpha_mode, source.alpha0)
    return make_baseline(source.baseline)


def pulse_metrics(pulse: Pulse) -> PulseMetrics:
    """
    A = (1/pi) int |Omega| dt and E = (T/pi^2) int |Omega|^2 dt, both evaluated in
    dimensionless time with absolute tolerance settings.quad_abs_tol.
    """
    T = pulse.T

    def magnitude(tau):
        return T * np.sqrt(pulse.rabi_squared(tau * T))

    def power(tau):
        return T ** 2 * pulse.rabi_squared(tau * T)

    width = 1.0 / settings.quad_min_panels
    area = integrate(magnitude, 0.0, 1.0, max_width=width)
    energy = integrate(power, 0.0, 1.0, max_width=width)
    return PulseMetrics(area=float(area.value) / math.pi, energy=float(energy.value) / math.pi ** 2)
