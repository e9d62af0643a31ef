"""
Tests for the adaptive Gauss-Kronrod quadrature.
"""
import math

import numpy as np
import pytest

from sta_guard.engine.quadrature import integrate
from sta_guard.errors import NumericError

KINK_PANEL = (9 / 32, 10 / 32)


def kink(x):
    return np.abs(x - 0.3)


class TestAdaptiveQuadrature:
    """Panel refinement, error totals and the panel cap."""

    @pytest.fixture
    def kink_panel_error(self):
        """|K15 - G7| of the single panel holding the kink"""
        with pytest.raises(NumericError) as excinfo:
            integrate(kink, *KINK_PANEL, abs_tol=1e-300, rel_tol=0.0, max_panels=1)
        return excinfo.value.achieved_error

    def test_smooth_integrand(self):
        result = integrate(np.sin, 0.0, math.pi)
        assert result.value == pytest.approx(2.0, abs=1e-10)
        assert result.error <= 1e-10

    def test_oscillatory_complex_integrand(self):
        result = integrate(lambda x: np.exp(20j * x), 0.0, 1.0, max_width=1 / 64)
        assert result.value == pytest.approx((np.exp(20j) - 1) / 20j, abs=1e-10)

    def test_empty_interval(self):
        assert integrate(np.cos, 1.0, 1.0).value == 0.0

    def test_cap_accepts_when_total_error_meets_tolerance(self, kink_panel_error):
        assert kink_panel_error > 0
        result = integrate(kink, 0.0, 1.0, abs_tol=2 * kink_panel_error, rel_tol=0.0,
                           max_width=1 / 32, max_panels=32)
        assert result.panels == 32
        assert result.error == pytest.approx(kink_panel_error, rel=1e-6)
        assert result.value == pytest.approx(0.29, abs=2 * kink_panel_error)

    def test_cap_raises_with_achieved_error(self, kink_panel_error):
        with pytest.raises(NumericError) as excinfo:
            integrate(kink, 0.0, 1.0, abs_tol=0.5 * kink_panel_error, rel_tol=0.0,
                      max_width=1 / 32, max_panels=32)
        assert excinfo.value.achieved_error == pytest.approx(kink_panel_error, rel=1e-6)

    def test_non_finite_integrand(self):
        with pytest.raises(NumericError):
            integrate(lambda x: np.where(x > 0.5, np.nan, x), 0.0, 1.0)
