"""
Catalog of ancillary-function schemes for STA Guard.

A scheme fixes theta, alpha and gamma as functions of dimensionless time
tau = t/T. Families return derivative stacks of shape (4, n) holding the value
and the first three tau-derivatives; the public accessors convert them to
physical time. Schemes are immutable after construction and validated against
their boundary conditions when built.
"""
import logging
import math
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple, Type

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from sta_guard.config import settings
from sta_guard.errors import InvalidArgumentError
from sta_guard.models.schemas import (
    BoundaryProfile, CustomTable, SchemeDescriptor, SchemeKind, Target
)

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
# |cos(theta)| below which alpha' tan(theta) is evaluated through its removable-singularity expansion
TAN_BAND = 1e-4


def _zeros(tau: np.ndarray) -> np.ndarray:
    return np.zeros((4,) + np.shape(tau))


def _constant(value: float, tau: np.ndarray) -> np.ndarray:
    stack = _zeros(tau)
    stack[0] = value
    return stack


class AncillaryScheme(ABC):
    """Base class for (theta, alpha, gamma) schemes on [0, T]"""

    kind: SchemeKind
    target: Target
    param_names: Tuple[str, ...] = ()
    approximate_boundary = False
    # constant alpha suggested for two-level synthesis (None: choose for a real Rabi frequency)
    default_alpha: Optional[float] = None
    has_gamma = False
    # alpha(t) is part of the scheme and drives two-level synthesis in auto mode
    has_alpha = False
    # alpha' tan(theta) has no pole by construction of the ansatz
    regular_tan_term = False

    def __init__(self, T: float, **params: float):
        try:
            T = float(T)
        except (TypeError, ValueError):
            raise InvalidArgumentError(f"Duration T must be a number, got {T!r}")
        if not (math.isfinite(T) and T > 0):
            raise InvalidArgumentError(f"Duration T must be positive and finite, got {T}")
        missing = [name for name in self.param_names if name not in params]
        unknown = [name for name in params if name not in self.param_names]
        if missing or unknown:
            raise InvalidArgumentError(
                f"{self.kind.value} expects parameters {list(self.param_names)}, "
                f"missing {missing}, unknown {unknown}"
            )
        self.T = float(T)
        self.params: Dict[str, float] = {}
        for name in self.param_names:
            value = float(params[name])
            if not math.isfinite(value):
                raise InvalidArgumentError(f"Parameter '{name}' must be finite, got {value}")
            self.params[name] = value
        self._check_params()
        self.validate()

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}(T={self.T!r}{', ' if args else ''}{args})"

    # Family definition, tau units

    def _check_params(self) -> None:
        """Raise InvalidArgumentError for parameters outside the family domain"""

    @abstractmethod
    def theta_tau(self, tau: np.ndarray) -> np.ndarray:
        ...

    def alpha_tau(self, tau: np.ndarray) -> np.ndarray:
        return _constant(self.default_alpha or 0.0, tau)

    def gamma_tau(self, tau: np.ndarray) -> np.ndarray:
        return _zeros(tau)

    def phase_tau(self, tau: np.ndarray) -> np.ndarray:
        """F(tau) = 1/2 int_0^tau (1 + cos theta) gamma' ds"""
        if not self.has_gamma:
            return np.zeros(np.shape(tau))
        return self._numeric_phase(tau)

    def tan_term_tau(self, tau: np.ndarray) -> np.ndarray:
        """
        alpha' tan(theta), finite where alpha' and cos(theta) vanish together.

        Inside |cos(theta)| < TAN_BAND the ratio alpha'/cos(theta) is expanded to
        second order about the common root tau0 (u = tau - tau0 to second order),
        which removes the cancellation noise of the raw quotient.
        """
        theta = self.theta_tau(tau)
        alpha = self.alpha_tau(tau)
        sin, cos = np.sin(theta[0]), np.cos(theta[0])
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            raw = alpha[1] * sin / cos
            h1 = -sin * theta[1]
            h2 = -cos * theta[1] ** 2 - sin * theta[2]
            u = cos / h1
            u = u + 0.5 * h2 * u ** 2 / h1
            ratio = (alpha[2] - 0.5 * alpha[3] * u) / (h1 - 0.5 * h2 * u)
            # alpha' must vanish at the same root for the singularity to be removable
            residual = np.abs(alpha[1] - alpha[2] * u + 0.5 * alpha[3] * u ** 2)
            removable = residual <= 1e-3 * np.abs(alpha[1]) + 1e-12
        use_expansion = (np.abs(cos) < TAN_BAND) & removable & np.isfinite(ratio)
        return np.where(use_expansion, sin * ratio, raw)

    _phase_solution = None

    def _numeric_phase(self, tau: np.ndarray) -> np.ndarray:
        if self._phase_solution is None:
            def rate(s, _):
                theta = self.theta_tau(np.array([s]))
                gamma = self.gamma_tau(np.array([s]))
                return 0.5 * (1.0 + np.cos(theta[0])) * gamma[1]

            self._phase_solution = solve_ivp(
                rate, (0.0, 1.0), [0.0], method="DOP853",
                rtol=1e-12, atol=1e-14, dense_output=True,
            ).sol
        return self._phase_solution(np.asarray(tau, dtype=float))[0]

    # Physical-time accessors

    def _stack(self, stack: np.ndarray, order: int) -> np.ndarray:
        if order not in (0, 1, 2, 3):
            raise InvalidArgumentError(f"Derivative order must be 0..3, got {order}")
        return stack[order] / self.T ** order

    def theta(self, t, order: int = 0) -> np.ndarray:
        return self._stack(self.theta_tau(np.asarray(t, dtype=float) / self.T), order)

    def alpha(self, t, order: int = 0) -> np.ndarray:
        return self._stack(self.alpha_tau(np.asarray(t, dtype=float) / self.T), order)

    def gamma(self, t, order: int = 0) -> np.ndarray:
        return self._stack(self.gamma_tau(np.asarray(t, dtype=float) / self.T), order)

    def phase(self, t) -> np.ndarray:
        return self.phase_tau(np.asarray(t, dtype=float) / self.T)

    # Validation

    def validate(self) -> None:
        """Check boundary conditions and screen for tan(theta) poles"""
        tol = settings.boundary_tol
        ends = np.array([0.0, 1.0])
        theta = self.theta_tau(ends)[0]
        alpha = self.alpha_tau(ends)[0]

        if self.target == Target.TWO_LEVEL:
            expected = [(theta[0], 0.0, "theta(0)"), (theta[1], math.pi, "theta(T)")]
        elif self.approximate_boundary:
            expected = []
        else:
            expected = [
                (theta[0], -HALF_PI, "theta(0)"), (theta[1], HALF_PI, "theta(T)"),
                (alpha[0], 0.0, "alpha(0)"), (alpha[1], HALF_PI, "alpha(T)"),
            ]
        for value, target, label in expected:
            if not abs(value - target) <= tol:
                raise InvalidArgumentError(
                    f"{self.kind.value}: boundary condition {label}={target:.15g} violated "
                    f"(got {value:.15g})"
                )

        if self.target == Target.THREE_LEVEL and not self.regular_tan_term:
            tau = np.linspace(0.0, 1.0, settings.validation_grid)[1:-1]
            cos = np.cos(self.theta_tau(tau)[0])
            # leaving the open band (-pi/2, pi/2) or touching its edge puts a pole in tan(theta)
            bad = cos <= 1.0 / settings.tan_singularity_threshold
            if np.any(bad):
                t_bad = tau[np.argmax(bad)] * self.T
                raise InvalidArgumentError(
                    f"{self.kind.value}: |tan(theta)| exceeds "
                    f"{settings.tan_singularity_threshold:.0e} at t={t_bad:.6g}"
                )

    def descriptor(self) -> SchemeDescriptor:
        return SchemeDescriptor(kind=self.kind, params=dict(self.params), T=self.T, target=self.target)


class FlatPi(AncillaryScheme):
    kind = SchemeKind.FLAT_PI
    target = Target.TWO_LEVEL
    default_alpha = -HALF_PI

    def theta_tau(self, tau):
        stack = _zeros(tau)
        stack[0] = math.pi * np.asarray(tau)
        stack[1] = math.pi
        return stack


class ArcsinEps(AncillaryScheme):
    """theta = pi * arcsin((1 - eps) tau) / arcsin(1 - eps)"""
    kind = SchemeKind.ARCSIN_EPS
    target = Target.TWO_LEVEL
    param_names = ("eps",)
    default_alpha = -HALF_PI

    def _check_params(self):
        eps = self.params["eps"]
        if not 0.0 < eps < 1.0:
            raise InvalidArgumentError(f"arcsin_eps requires 0 < eps < 1, got {eps}")

    def theta_tau(self, tau):
        a = 1.0 - self.params["eps"]
        scale = math.pi / math.asin(a)
        tau = np.asarray(tau, dtype=float)
        u = 1.0 - (a * tau) ** 2
        stack = _zeros(tau)
        stack[0] = scale * np.arcsin(a * tau)
        stack[1] = scale * a / np.sqrt(u)
        stack[2] = scale * a ** 3 * tau / u ** 1.5
        stack[3] = scale * a ** 3 * (1.0 + 2.0 * (a * tau) ** 2) / u ** 2.5
        return stack


class QuarticLargeDelta(AncillaryScheme):
    """theta = pi (4 tau^3 - 3 tau^4); theta' = theta'' = 0 at tau = 0 and theta'(1) = 0"""
    kind = SchemeKind.QUARTIC_LARGE_DELTA
    target = Target.TWO_LEVEL
    default_alpha = -HALF_PI

    def theta_tau(self, tau):
        tau = np.asarray(tau, dtype=float)
        stack = _zeros(tau)
        stack[0] = math.pi * (4.0 * tau ** 3 - 3.0 * tau ** 4)
        stack[1] = math.pi * (12.0 * tau ** 2 - 12.0 * tau ** 3)
        stack[2] = math.pi * (24.0 * tau - 36.0 * tau ** 2)
        stack[3] = math.pi * (24.0 - 72.0 * tau)
        return stack


class Optimized2L(AncillaryScheme):
    """theta = (pi - c1) tau + c1 tau^3, gamma = c0 theta"""
    kind = SchemeKind.OPTIMIZED_2L
    target = Target.TWO_LEVEL
    param_names = ("c0", "c1")
    has_gamma = True

    def theta_tau(self, tau):
        c1 = self.params["c1"]
        tau = np.asarray(tau, dtype=float)
        stack = _zeros(tau)
        stack[0] = (math.pi - c1) * tau + c1 * tau ** 3
        stack[1] = math.pi - c1 + 3.0 * c1 * tau ** 2
        stack[2] = 6.0 * c1 * tau
        stack[3] = 6.0 * c1
        return stack

    def gamma_tau(self, tau):
        return self.params["c0"] * self.theta_tau(tau)

    def phase_tau(self, tau):
        # (1 + cos theta) theta' integrates to theta + sin theta
        theta = self.theta_tau(tau)[0]
        return 0.5 * self.params["c0"] * (theta + np.sin(theta))


class Ref3L(AncillaryScheme):
    """theta = eps - pi/2, alpha = pi tau / 2; misses theta(T) = pi/2 on purpose"""
    kind = SchemeKind.REF_3L
    target = Target.THREE_LEVEL
    param_names = ("eps",)
    approximate_boundary = True

    def _check_params(self):
        eps = self.params["eps"]
        if not 0.0 < eps < HALF_PI:
            raise InvalidArgumentError(f"ref_3l requires 0 < eps < pi/2, got {eps}")

    def theta_tau(self, tau):
        return _constant(self.params["eps"] - HALF_PI, tau)

    def alpha_tau(self, tau):
        stack = _zeros(tau)
        stack[0] = HALF_PI * np.asarray(tau, dtype=float)
        stack[1] = HALF_PI
        return stack


class Num1FourLevel(AncillaryScheme):
    """Cubic theta with alpha = (pi/4) sin(theta) + pi/4"""
    kind = SchemeKind.NUM1_4L
    target = Target.THREE_LEVEL
    param_names = ("c0", "c1")
    regular_tan_term = True

    def theta_tau(self, tau):
        c0, c1 = self.params["c0"], self.params["c1"]
        tau = np.asarray(tau, dtype=float)
        stack = _zeros(tau)
        stack[0] = -HALF_PI + (math.pi - c0 - c1) * tau + c0 * tau ** 2 + c1 * tau ** 3
        stack[1] = math.pi - c0 - c1 + 2.0 * c0 * tau + 3.0 * c1 * tau ** 2
        stack[2] = 2.0 * c0 + 6.0 * c1 * tau
        stack[3] = 6.0 * c1
        return stack

    def alpha_tau(self, tau):
        th, th1, th2, th3 = self.theta_tau(tau)
        sin, cos = np.sin(th), np.cos(th)
        q = 0.25 * math.pi
        stack = _zeros(tau)
        stack[0] = q * sin + q
        stack[1] = q * cos * th1
        stack[2] = q * (cos * th2 - sin * th1 ** 2)
        stack[3] = q * (cos * th3 - 3.0 * sin * th1 * th2 - cos * th1 ** 3)
        return stack

    def tan_term_tau(self, tau):
        theta = self.theta_tau(tau)
        return 0.25 * math.pi * np.sin(theta[0]) * theta[1]


class Num2FourLevel(AncillaryScheme):
    """
    Quartic theta fixed by d0 = theta(1/2) + pi/2, alpha cubic plus d1 sin(pi tau).
    Coefficients are written for T = 1 and evaluated in tau.
    """
    kind = SchemeKind.NUM2_4L
    target = Target.THREE_LEVEL
    param_names = ("d0", "d1")
    D0_RANGE = (0.55, 2.5)

    def _check_params(self):
        d0 = self.params["d0"]
        low, high = self.D0_RANGE
        if not low <= d0 <= high:
            raise InvalidArgumentError(f"num2_4l requires {low} <= d0 <= {high}, got {d0}")

    def theta_tau(self, tau):
        d0 = self.params["d0"]
        b4 = 8.0 * (math.pi - 2.0 * d0)
        b3 = 2.0 * (-16.0 * d0 + 1.0 + 7.0 * math.pi)
        b2 = -16.0 * d0 + 3.0 + 5.0 * math.pi
        tau = np.asarray(tau, dtype=float)
        stack = _zeros(tau)
        stack[0] = -HALF_PI + tau - b2 * tau ** 2 + b3 * tau ** 3 - b4 * tau ** 4
        stack[1] = 1.0 - 2.0 * b2 * tau + 3.0 * b3 * tau ** 2 - 4.0 * b4 * tau ** 3
        stack[2] = -2.0 * b2 + 6.0 * b3 * tau - 12.0 * b4 * tau ** 2
        stack[3] = 6.0 * b3 - 24.0 * b4 * tau
        return stack

    def alpha_tau(self, tau):
        d1 = self.params["d1"]
        pi = math.pi
        a2 = pi * d1 + 1.5 * pi
        a1 = -pi * d1
        tau = np.asarray(tau, dtype=float)
        sin, cos = np.sin(pi * tau), np.cos(pi * tau)
        stack = _zeros(tau)
        stack[0] = a2 * tau ** 2 + a1 * tau + d1 * sin - pi * tau ** 3
        stack[1] = 2.0 * a2 * tau + a1 + pi * d1 * cos - 3.0 * pi * tau ** 2
        stack[2] = 2.0 * a2 - pi ** 2 * d1 * sin - 6.0 * pi * tau
        stack[3] = -pi ** 3 * d1 * cos - 6.0 * pi
        return stack


class CustomScheme(AncillaryScheme):
    """Cubic-spline interpolated tabulated scheme; gamma is shifted so gamma(0) = 0"""
    kind = SchemeKind.CUSTOM
    has_alpha = True

    def __init__(self, T: float, table: CustomTable, target: Target):
        self.target = target
        self.table = table
        tau = np.asarray(table.tau, dtype=float)
        self._theta = CubicSpline(tau, table.theta)
        self._alpha = CubicSpline(tau, table.alpha)
        gamma = np.zeros_like(tau) if table.gamma is None else np.asarray(table.gamma, dtype=float)
        self.has_gamma = bool(np.any(gamma != gamma[0]))
        self._gamma = CubicSpline(tau, gamma - gamma[0])
        super().__init__(T)

    @staticmethod
    def _spline_stack(spline: CubicSpline, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        return np.stack([spline(tau, nu) for nu in range(4)])

    def theta_tau(self, tau):
        return self._spline_stack(self._theta, tau)

    def alpha_tau(self, tau):
        return self._spline_stack(self._alpha, tau)

    def gamma_tau(self, tau):
        return self._spline_stack(self._gamma, tau)

    def descriptor(self) -> SchemeDescriptor:
        return SchemeDescriptor(kind=self.kind, params={}, T=self.T, target=self.target, table=self.table)


SCHEME_CLASSES: Dict[SchemeKind, Type[AncillaryScheme]] = {
    cls.kind: cls for cls in
    (FlatPi, ArcsinEps, QuarticLargeDelta, Optimized2L, Ref3L, Num1FourLevel, Num2FourLevel)
}


def make_flat_pi(T: float) -> AncillaryScheme:
    return FlatPi(T)


def make_arcsin_eps(T: float, eps: float) -> AncillaryScheme:
    return ArcsinEps(T, eps=eps)


def make_quartic_large_delta(T: float) -> AncillaryScheme:
    return QuarticLargeDelta(T)


def make_optimized_2l(T: float, c0: float, c1: float) -> AncillaryScheme:
    return Optimized2L(T, c0=c0, c1=c1)


def make_ref_3l(T: float, eps: float) -> AncillaryScheme:
    return Ref3L(T, eps=eps)


def make_num1_4l(T: float, c0: float, c1: float) -> AncillaryScheme:
    return Num1FourLevel(T, c0=c0, c1=c1)


def make_num2_4l(T: float, d0: float, d1: float) -> AncillaryScheme:
    return Num2FourLevel(T, d0=d0, d1=d1)


def make_scheme(kind: SchemeKind, T: float, params: Dict[str, float]) -> AncillaryScheme:
    """Build a catalog scheme (not Custom) from its kind and parameter map"""
    kind = SchemeKind(kind)
    if kind == SchemeKind.CUSTOM:
        raise InvalidArgumentError("custom schemes need a table; use scheme_from_descriptor")
    return SCHEME_CLASSES[kind](T, **params)


def scheme_from_descriptor(descriptor: SchemeDescriptor) -> AncillaryScheme:
    if descriptor.kind == SchemeKind.CUSTOM:
        if descriptor.table is None or descriptor.target is None:
            raise InvalidArgumentError("custom schemes need both 'table' and 'target'")
        return CustomScheme(descriptor.T, descriptor.table, descriptor.target)
    scheme = make_scheme(descriptor.kind, descriptor.T, descriptor.params)
    if descriptor.target is not None and descriptor.target != scheme.target:
        raise InvalidArgumentError(
            f"{descriptor.kind.value} is a {scheme.target.value} scheme, "
            f"descriptor says {descriptor.target.value}"
        )
    return scheme


def boundary_profile(scheme: AncillaryScheme) -> BoundaryProfile:
    """Endpoint values and derivatives in physical time units"""
    ends = np.array([0.0, 1.0])
    powers = scheme.T ** -np.arange(4)
    theta = scheme.theta_tau(ends) * powers[:, None]
    alpha = scheme.alpha_tau(ends) * powers[:, None]
    return BoundaryProfile(
        theta_start=theta[:, 0].tolist(),
        theta_end=theta[:, 1].tolist(),
        alpha_start=alpha[:, 0].tolist(),
        alpha_end=alpha[:, 1].tolist(),
        analytic=True,
        error_estimate=0.0,
    )
