"""
Tests for the ancillary-function scheme catalog.
"""
import math

import numpy as np
import pytest

from sta_guard.engine.ancillary import (
    CustomScheme, Num2FourLevel, boundary_profile, make_arcsin_eps, make_num1_4l, make_num2_4l,
    make_optimized_2l, make_quartic_large_delta, make_ref_3l, make_scheme, scheme_from_descriptor
)
from sta_guard.errors import InvalidArgumentError
from sta_guard.models.schemas import CustomTable, SchemeDescriptor, SchemeKind, Target
from tests.conftest import NUM1_4L, NUM2_4L, OPTIMIZED_2L


class TestBoundaryConditions:
    """Endpoint values of the catalog schemes."""

    def test_flat_pi_endpoints(self, flat_pi):
        theta = flat_pi.theta(np.array([0.0, 1.0]))
        assert theta[0] == 0.0
        assert theta[1] == pytest.approx(math.pi, abs=1e-15)

    @pytest.mark.parametrize("params", list(OPTIMIZED_2L.values()))
    def test_optimized_2l_reaches_pi(self, params):
        scheme = make_optimized_2l(1.0, **params)
        assert scheme.theta(1.0) == pytest.approx(math.pi, abs=1e-12)
        assert scheme.gamma(0.0) == 0.0

    @pytest.mark.parametrize("params", list(NUM2_4L.values()))
    def test_num2_endpoints(self, params):
        scheme = make_num2_4l(1.0, **params)
        ends = np.array([0.0, 1.0])
        np.testing.assert_allclose(scheme.theta(ends), [-math.pi / 2, math.pi / 2], atol=1e-12)
        np.testing.assert_allclose(scheme.alpha(ends), [0.0, math.pi / 2], atol=1e-12)

    def test_num2_midpoint_is_d0(self):
        scheme = make_num2_4l(1.0, d0=1.3, d1=2.0)
        assert scheme.theta(0.5) == pytest.approx(1.3 - math.pi / 2, abs=1e-12)

    @pytest.mark.parametrize("params", list(NUM1_4L.values()))
    def test_num1_endpoints(self, params):
        scheme = make_num1_4l(1.0, **params)
        ends = np.array([0.0, 1.0])
        np.testing.assert_allclose(scheme.theta(ends), [-math.pi / 2, math.pi / 2], atol=1e-12)
        np.testing.assert_allclose(scheme.alpha(ends), [0.0, math.pi / 2], atol=1e-12)

    def test_ref_3l_is_flagged_approximate(self, ref_3l):
        assert ref_3l.approximate_boundary
        assert ref_3l.theta(1.0) == pytest.approx(0.002 - math.pi / 2)


class TestParameterDomains:
    """Construction rejects parameters outside each family's domain."""

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.1])
    def test_arcsin_eps_range(self, eps):
        with pytest.raises(InvalidArgumentError):
            make_arcsin_eps(1.0, eps)

    @pytest.mark.parametrize("d0", [0.5, 2.6])
    def test_num2_d0_range(self, d0):
        with pytest.raises(InvalidArgumentError):
            make_num2_4l(1.0, d0=d0, d1=0.0)

    def test_ref_3l_eps_range(self):
        with pytest.raises(InvalidArgumentError):
            make_ref_3l(1.0, 0.0)

    @pytest.mark.parametrize("T", [0.0, -1.0, float("nan")])
    def test_duration_must_be_positive(self, T):
        with pytest.raises(InvalidArgumentError):
            make_quartic_large_delta(T)

    def test_missing_and_unknown_parameters(self):
        with pytest.raises(InvalidArgumentError):
            make_scheme(SchemeKind.OPTIMIZED_2L, 1.0, {"c0": 1.0})
        with pytest.raises(InvalidArgumentError):
            make_scheme(SchemeKind.FLAT_PI, 1.0, {"c0": 1.0})

    def test_invalid_error_is_value_error(self):
        with pytest.raises(ValueError):
            make_arcsin_eps(1.0, 2.0)


class TestDerivatives:
    """Derivative stacks, physical-time scaling and phase integrals."""

    def test_quartic_boundary_profile(self):
        profile = boundary_profile(make_quartic_large_delta(1.0))
        assert profile.theta_start[1] == 0.0
        assert profile.theta_start[2] == 0.0
        assert profile.theta_start[3] == pytest.approx(24 * math.pi)
        assert profile.theta_end[1] == pytest.approx(0.0, abs=1e-12)
        assert profile.analytic

    def test_physical_time_scaling(self):
        profile = boundary_profile(make_quartic_large_delta(2.0))
        assert profile.theta_start[3] == pytest.approx(24 * math.pi / 8)

    def test_arcsin_derivatives_match_finite_differences(self, arcsin_eps):
        tau = np.linspace(0.1, 0.9, 9)
        h = 1e-6
        stack = arcsin_eps.theta_tau(tau)
        for order in (1, 2, 3):
            lower = arcsin_eps.theta_tau(tau - h)[order - 1]
            upper = arcsin_eps.theta_tau(tau + h)[order - 1]
            np.testing.assert_allclose((upper - lower) / (2 * h), stack[order], rtol=1e-6)

    def test_optimized_phase_matches_ode(self, optimized_2l):
        tau = np.linspace(0.0, 1.0, 11)
        np.testing.assert_allclose(optimized_2l._numeric_phase(tau), optimized_2l.phase_tau(tau), atol=1e-9)

    def test_num1_tan_term_is_regular(self, num1_4l):
        tau = np.linspace(0.0, 1.0, 4097)
        theta = num1_4l.theta_tau(tau)
        alpha = num1_4l.alpha_tau(tau)
        tan_term = num1_4l.tan_term_tau(tau)
        assert np.all(np.isfinite(tan_term))
        safe = np.abs(np.cos(theta[0])) > 1e-3
        np.testing.assert_allclose(tan_term[safe], (alpha[1] * np.tan(theta[0]))[safe], rtol=1e-9, atol=1e-9)

    def test_num2_tan_term_is_smooth_at_the_poles(self, num2_4l):
        tau = np.array([0.0, 1e-10, 1.0 - 1e-10, 1.0])
        tan_term = num2_4l.tan_term_tau(tau)
        assert np.all(np.isfinite(tan_term))
        assert tan_term[1] == pytest.approx(tan_term[0], rel=1e-7)
        assert tan_term[2] == pytest.approx(tan_term[3], rel=1e-7)

    def test_tan_term_expansion_matches_raw_quotient_in_band(self, num2_4l):
        gap = np.array([1.5e-5, 3e-5, 6e-5, 9e-5])
        tau = np.concatenate([gap, 1.0 - gap])
        theta = num2_4l.theta_tau(tau)
        alpha = num2_4l.alpha_tau(tau)
        cos = np.abs(np.cos(theta[0]))
        in_band = (cos > 1e-5) & (cos < 1e-4)
        assert in_band.sum() >= 4
        raw = alpha[1] * np.tan(theta[0])
        np.testing.assert_allclose(num2_4l.tan_term_tau(tau)[in_band], raw[in_band], rtol=1e-6)

    def test_tan_term_keeps_genuine_poles(self):
        class OffsetAlpha(Num2FourLevel):
            def alpha_tau(self, tau):
                stack = super().alpha_tau(tau)
                stack[1] += 1.0
                return stack

        scheme = OffsetAlpha(1.0, **NUM2_4L[3.0])
        tau = np.array([1.0 - 1e-6])
        theta = scheme.theta_tau(tau)[0]
        expected = scheme.alpha_tau(tau)[1] * np.tan(theta)
        assert scheme.tan_term_tau(tau)[0] == pytest.approx(expected[0], rel=1e-9)


class TestFiniteDifferences:
    """Analytic derivative stacks against central differences on 101 interior points."""

    STEP = 1e-6

    @pytest.fixture(params=["flat_pi", "arcsin_eps", "quartic", "optimized_2l", "ref_3l", "num1_4l", "num2_4l"])
    def scheme(self, request):
        return request.getfixturevalue(request.param)

    @pytest.mark.parametrize("component", ["theta_tau", "alpha_tau", "gamma_tau"])
    def test_derivatives(self, scheme, component):
        tau = np.linspace(0.0, 1.0, 103)[1:-1]
        stack_of = getattr(scheme, component)
        stack = stack_of(tau)
        lower, upper = stack_of(tau - self.STEP), stack_of(tau + self.STEP)
        for order in (1, 2, 3):
            difference = (upper[order - 1] - lower[order - 1]) / (2 * self.STEP)
            floor = 1e-6 * max(1.0, np.abs(stack[order]).max())
            np.testing.assert_allclose(difference, stack[order], rtol=1e-6, atol=floor,
                                       err_msg=f"{scheme.kind.value} {component} order {order}")


class TestArcsinLimit:
    """ArcsinEps approaches the flat pi pulse as eps tends to one."""

    def test_eps_close_to_one_matches_flat_pi(self, flat_pi):
        tau = np.linspace(0.0, 1.0, 1001)
        near_flat = make_arcsin_eps(1.0, 0.9999)
        np.testing.assert_allclose(near_flat.theta(tau), flat_pi.theta(tau), atol=1e-3)
        np.testing.assert_allclose(near_flat.theta(tau, order=1), flat_pi.theta(tau, order=1), atol=1e-3)

    def test_small_eps_is_far_from_flat_pi(self, flat_pi, arcsin_eps):
        tau = np.linspace(0.0, 1.0, 1001)
        assert np.abs(arcsin_eps.theta(tau) - flat_pi.theta(tau)).max() > 0.1


class TestDescriptors:
    """JSON descriptors and tabulated schemes."""

    def test_params_round_trip_exactly(self):
        scheme = make_optimized_2l(1.0, c0=0.1 + 0.2, c1=1.0 / 3.0)
        restored = scheme_from_descriptor(SchemeDescriptor.model_validate_json(scheme.descriptor().model_dump_json()))
        assert restored.params == scheme.params
        assert restored.target == Target.TWO_LEVEL

    def test_params_serialize_to_shortest_text(self):
        descriptor = make_optimized_2l(1.0, c0=1.376, c1=14.927).descriptor()
        assert descriptor.model_dump()["params"] == {"c0": "1.376", "c1": "14.927"}
        assert '"c0":"1.376"' in descriptor.model_dump_json()

    def test_target_mismatch(self):
        descriptor = SchemeDescriptor(kind=SchemeKind.FLAT_PI, target=Target.THREE_LEVEL)
        with pytest.raises(InvalidArgumentError):
            scheme_from_descriptor(descriptor)

    def test_custom_needs_table(self):
        with pytest.raises(InvalidArgumentError):
            scheme_from_descriptor(SchemeDescriptor(kind=SchemeKind.CUSTOM, target=Target.TWO_LEVEL))

    def test_custom_linear_table_reproduces_flat_pi(self, flat_pi):
        tau = np.linspace(0.0, 1.0, 201)
        table = CustomTable(tau=tau.tolist(), theta=(math.pi * tau).tolist(),
                            alpha=[-math.pi / 2] * tau.size)
        custom = CustomScheme(1.0, table, Target.TWO_LEVEL)
        samples = np.linspace(0.0, 1.0, 37)
        np.testing.assert_allclose(custom.theta(samples), flat_pi.theta(samples), atol=1e-12)
        np.testing.assert_allclose(custom.theta(samples, order=1), math.pi, atol=1e-10)

    def test_custom_table_validation(self):
        with pytest.raises(ValueError):
            CustomTable(tau=[0.0, 0.5, 0.4, 1.0], theta=[0, 1, 2, 3], alpha=[0, 0, 0, 0])
        with pytest.raises(ValueError):
            CustomTable(tau=[0.0, 0.5, 1.0], theta=[0, 1, 2], alpha=[0, 0, 0])

    def test_custom_boundary_violation(self):
        tau = np.linspace(0.0, 1.0, 11)
        table = CustomTable(tau=tau.tolist(), theta=(3.0 * tau).tolist(), alpha=[0.0] * tau.size)
        with pytest.raises(InvalidArgumentError):
            CustomScheme(1.0, table, Target.TWO_LEVEL)
