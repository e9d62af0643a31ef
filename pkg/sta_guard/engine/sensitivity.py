"""
Transition sensitivities for STA Guard.

q measures how a two-level inversion scheme leaks into an unwanted third level
coupled with relative strength beta (P2 = 1 - beta^2 q + O(beta^4)); Q is the
analogue for three-level transfer with an unwanted fourth level. Both are
squared moduli of oscillatory integrals over the protocol, evaluated in
dimensionless time with the phase Delta*T*tau.
"""
import cmath
import logging
import math
from enum import Enum
from typing import Callable, Iterable, Optional, Tuple

import numpy as np
import pandas as pd

from sta_guard.config import settings
from sta_guard.engine.ancillary import AncillaryScheme, boundary_profile
from sta_guard.engine.quadrature import integrate
from sta_guard.errors import InvalidArgumentError
from sta_guard.models.schemas import Objective, SensitivityReport, Target

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["DeltaT", "value", "lower_bound", "asymptotic", "quad_error", "asymptotic_ratio"]

# leading terms are selected by derivatives below this (dimensionless) size
VANISHING = 1e-10
# asymptotic estimates are compared with the quadrature from this |Delta T| on
ASYMPTOTIC_REGIME = 10.0
# value / estimate outside [1/RATIO_WARNING, RATIO_WARNING] is logged
RATIO_WARNING = 2.0


class AsymptoticCoefficient(str, Enum):
    """Coefficient of the 1/Delta^6 branch of q"""
    DISPLAYED = "displayed"                    # theta'''(0)^2 / Delta^6
    PARTIAL_INTEGRATION = "partial_integration"  # theta'''(0)^2 / (4 Delta^6)


def _panel_width(delta_t: float) -> float:
    width = 1.0 / settings.quad_min_panels
    if delta_t != 0:
        width = min(width, math.pi / (4.0 * abs(delta_t)))
    return width


def q_integrand(scheme: AncillaryScheme, delta_t: float) -> Callable[[np.ndarray], np.ndarray]:
    """d/dtau[sin(theta/2) e^{iF}] e^{i Delta T tau}"""
    def integrand(tau):
        theta = scheme.theta_tau(tau)
        gamma = scheme.gamma_tau(tau)
        phase_rate = 0.5 * (1.0 + np.cos(theta[0])) * gamma[1]
        half = 0.5 * theta[0]
        body = 0.5 * theta[1] * np.cos(half) + 1j * phase_rate * np.sin(half)
        return body * np.exp(1j * (scheme.phase_tau(tau) + delta_t * tau))
    return integrand


def q_integrand_alternate(scheme: AncillaryScheme, delta_t: float) -> Callable[[np.ndarray], np.ndarray]:
    """1/2 cos(theta/2)(sin(theta) gamma' - i theta') e^{i(F + Delta T tau)}; its integral is -i times the first form"""
    def integrand(tau):
        theta = scheme.theta_tau(tau)
        gamma = scheme.gamma_tau(tau)
        body = 0.5 * np.cos(0.5 * theta[0]) * (np.sin(theta[0]) * gamma[1] - 1j * theta[1])
        return body * np.exp(1j * (scheme.phase_tau(tau) + delta_t * tau))
    return integrand


def Q_integrand(scheme: AncillaryScheme, delta_t: float) -> Callable[[np.ndarray], np.ndarray]:
    """d/dtau[sin(theta) sin(alpha)] e^{i Delta T tau}"""
    def integrand(tau):
        theta = scheme.theta_tau(tau)
        alpha = scheme.alpha_tau(tau)
        body = (theta[1] * np.cos(theta[0]) * np.sin(alpha[0])
                + alpha[1] * np.sin(theta[0]) * np.cos(alpha[0]))
        return body * np.exp(1j * delta_t * tau)
    return integrand


def _squared_modulus(integrand, delta_t: float, abs_tol: Optional[float]) -> Tuple[float, float]:
    result = integrate(integrand, 0.0, 1.0, abs_tol=abs_tol, max_width=_panel_width(delta_t))
    modulus = abs(result.value)
    return modulus ** 2, 2.0 * modulus * result.error + result.error ** 2


def _require(scheme: AncillaryScheme, target: Target, name: str) -> None:
    if scheme.target != target:
        raise InvalidArgumentError(f"{name} needs a {target.value} scheme, got {scheme.kind.value}")


def q_value(scheme: AncillaryScheme, delta_t: float, abs_tol: Optional[float] = None) -> float:
    """q at dimensionless Delta*T, single integral form (optimizer objective)"""
    return _squared_modulus(q_integrand(scheme, delta_t), delta_t, abs_tol)[0]


def Q_value(scheme: AncillaryScheme, delta_t: float, abs_tol: Optional[float] = None) -> float:
    """Q at dimensionless Delta*T (optimizer objective)"""
    return _squared_modulus(Q_integrand(scheme, delta_t), delta_t, abs_tol)[0]


def q_lower_bound(delta_t: float) -> float:
    x = abs(delta_t)
    return (1.0 - x) ** 2 if x < 1.0 else 0.0


def Q_lower_bound(delta_t: float) -> float:
    return q_lower_bound(delta_t)


def q_flat_pi_closed_form(delta_t: float) -> float:
    """pi^2 (4x^2 - 4 pi x sin x + pi^2) / (pi^2 - 4x^2)^2 with x = Delta*T"""
    x = float(delta_t)
    gap = math.pi ** 2 - 4.0 * x * x
    if abs(gap) < 1e-4:
        # same integral written with sinc kernels; finite through the removable singularity
        a = 0.5 * math.pi

        def kernel(k):
            return cmath.exp(0.5j * k) * float(np.sinc(k / (2.0 * math.pi)))

        return (a * a / 4.0) * abs(kernel(x + a) + kernel(x - a)) ** 2
    return math.pi ** 2 * (4.0 * x * x - 4.0 * math.pi * x * math.sin(x) + math.pi ** 2) / gap ** 2


def q_critical_timing_closed_form(delta_t: float) -> float:
    """q of the ideal theta = 2 arcsin(t/T) scheme: |(1 - e^{ix})/x|^2, zero at x = 2n pi"""
    return float(np.sinc(float(delta_t) / (2.0 * math.pi))) ** 2


def q_asymptotic(scheme: AncillaryScheme, delta: float,
                 coefficient: AsymptoticCoefficient = AsymptoticCoefficient.DISPLAYED) -> Optional[float]:
    """
    Leading large-|Delta| estimate of q.

    theta'(0) != 0: theta'(0)^2 / (4 Delta^2).
    theta'(0) = theta'(T) = theta''(0) = 0: theta'''(0)^2 / Delta^6 by default;
    repeated partial integration gives a quarter of that, selectable
    with `coefficient`.
    Only theta'(0) = 0: |theta''(0)/2 + theta'(T)^2 e^{i Delta T}/4|^2 / Delta^4 (gamma' terms ignored).
    Returns None at Delta = 0.
    """
    if delta == 0:
        return None
    profile = boundary_profile(scheme)
    T = scheme.T
    d = abs(delta)
    th0 = profile.theta_start
    th1 = profile.theta_end
    if abs(th0[1]) * T > VANISHING:
        return th0[1] ** 2 / (4.0 * d ** 2)
    if abs(th1[1]) * T <= VANISHING and abs(th0[2]) * T ** 2 <= VANISHING:
        estimate = th0[3] ** 2 / d ** 6
        if AsymptoticCoefficient(coefficient) == AsymptoticCoefficient.PARTIAL_INTEGRATION:
            estimate /= 4.0
        return estimate
    boundary = 0.5 * th0[2] + 0.25 * th1[1] ** 2 * cmath.exp(1j * delta * T)
    return abs(boundary) ** 2 / d ** 4


def Q_asymptotic(scheme: AncillaryScheme, delta: float) -> Optional[float]:
    """alpha'(0)^2 / Delta^2 (0 when alpha'(0) vanishes); None at Delta = 0"""
    if delta == 0:
        return None
    alpha_rate = boundary_profile(scheme).alpha_start[1]
    if abs(alpha_rate) * scheme.T <= VANISHING:
        return 0.0
    return alpha_rate ** 2 / delta ** 2


def asymptotic_ratio(value: float, estimate: Optional[float], delta_t: float,
                     label: str = "") -> Optional[float]:
    """value / estimate; logged when they differ by more than RATIO_WARNING at large |Delta T|"""
    if estimate is None or estimate == 0:
        return None
    ratio = value / estimate
    if abs(delta_t) >= ASYMPTOTIC_REGIME and not 1.0 / RATIO_WARNING <= ratio <= RATIO_WARNING:
        logger.warning(
            f"Asymptotic estimate {estimate:.3e} is off by a factor {ratio:.3g} from the "
            f"quadrature value {value:.3e} for {label} at Delta T={delta_t:g}"
        )
    return ratio


def q_sensitivity(scheme: AncillaryScheme, delta: float, abs_tol: Optional[float] = None) -> SensitivityReport:
    """Two-level transition sensitivity at level splitting delta (angular frequency)"""
    _require(scheme, Target.TWO_LEVEL, "q")
    delta_t = delta * scheme.T
    value, error = _squared_modulus(q_integrand(scheme, delta_t), delta_t, abs_tol)
    alternate, alternate_error = _squared_modulus(q_integrand_alternate(scheme, delta_t), delta_t, abs_tol)
    mismatch = abs(value - alternate)
    if mismatch > 1e-8:
        logger.warning(f"q integral forms disagree by {mismatch:.2e} for {scheme!r} at Delta T={delta_t:g}")
    estimate = q_asymptotic(scheme, delta)
    return SensitivityReport(
        objective=Objective.Q_TWO_LEVEL,
        delta_t=delta_t,
        value=value,
        quadrature_error=max(error, alternate_error),
        lower_bound=q_lower_bound(delta_t),
        asymptotic_estimate=estimate,
        asymptotic_ratio=asymptotic_ratio(value, estimate, delta_t, repr(scheme)),
        form_mismatch=mismatch,
        approximate_boundary=False,
    )


def Q_sensitivity(scheme: AncillaryScheme, delta: float, abs_tol: Optional[float] = None) -> SensitivityReport:
    """Three-level transition sensitivity at level splitting delta (angular frequency)"""
    _require(scheme, Target.THREE_LEVEL, "Q")
    if scheme.approximate_boundary:
        logger.warning(f"{scheme!r} misses its boundary conditions; Q is approximate")
    delta_t = delta * scheme.T
    value, error = _squared_modulus(Q_integrand(scheme, delta_t), delta_t, abs_tol)
    # the integrand body is real, so Q is even in Delta
    mirrored, mirrored_error = _squared_modulus(Q_integrand(scheme, -delta_t), -delta_t, abs_tol)
    mismatch = abs(value - mirrored)
    if mismatch > 1e-8:
        logger.warning(f"Q(Delta) and Q(-Delta) disagree by {mismatch:.2e} for {scheme!r} at Delta T={delta_t:g}")
    estimate = Q_asymptotic(scheme, delta)
    return SensitivityReport(
        objective=Objective.Q_THREE_LEVEL,
        delta_t=delta_t,
        value=value,
        quadrature_error=max(error, mirrored_error),
        lower_bound=Q_lower_bound(delta_t),
        asymptotic_estimate=estimate,
        asymptotic_ratio=asymptotic_ratio(value, estimate, delta_t, repr(scheme)),
        form_mismatch=mismatch,
        approximate_boundary=scheme.approximate_boundary,
    )


def sensitivity(scheme: AncillaryScheme, delta: float, abs_tol: Optional[float] = None) -> SensitivityReport:
    """q or Q depending on the scheme target"""
    if scheme.target == Target.TWO_LEVEL:
        return q_sensitivity(scheme, delta, abs_tol)
    return Q_sensitivity(scheme, delta, abs_tol)


def sensitivity_sweep(scheme: AncillaryScheme, delta_t_grid: Iterable[float],
                      abs_tol: Optional[float] = None) -> pd.DataFrame:
    """One SensitivityReport per Delta*T, as a table with the sweep CSV columns"""
    rows = []
    for delta_t in delta_t_grid:
        report = sensitivity(scheme, float(delta_t) / scheme.T, abs_tol)
        rows.append({
            "DeltaT": float(delta_t),
            "value": report.value,
            "lower_bound": report.lower_bound,
            "asymptotic": np.nan if report.asymptotic_estimate is None else report.asymptotic_estimate,
            "quad_error": report.quadrature_error,
            "asymptotic_ratio": np.nan if report.asymptotic_ratio is None else report.asymptotic_ratio,
        })
    logger.info(f"Sensitivity sweep of {scheme!r}: {len(rows)} points")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
