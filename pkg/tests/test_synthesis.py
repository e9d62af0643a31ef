"""
Tests for pulse synthesis and pulse area / energy.
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from sta_guard.engine.ancillary import CustomScheme, make_flat_pi, make_num1_4l, make_num2_4l, make_optimized_2l
from sta_guard.engine.dynamics import HamiltonianSpec, evolve, invariant_populations
from sta_guard.engine.synthesis import (
    choose_alpha_real, make_adiabatic_2l, make_baseline, make_stirap_3l, pulse_metrics,
    resolve_pulse, synth_three_level, synth_two_level, synthesize
)
from sta_guard.errors import InvalidArgumentError
from sta_guard.models.schemas import (
    AlphaMode, BaselineDescriptor, BaselineKind, CustomTable, PerturbedModel, PulseSource, SchemeDescriptor,
    SchemeKind, Target
)
from tests.conftest import NUM1_4L, NUM2_4L, OPTIMIZED_2L


class TestTwoLevelSynthesis:
    """Two-level controls from theta, alpha and gamma."""

    def test_flat_pi_is_constant_real_pulse(self, flat_pi):
        frame = synth_two_level(flat_pi).sample()
        assert list(frame.columns) == ["t", "Omega_R", "Omega_I", "delta2"]
        assert len(frame) == 1001
        np.testing.assert_allclose(frame["Omega_R"], math.pi, rtol=1e-14)
        np.testing.assert_allclose(frame["Omega_I"], 0.0, atol=1e-12)
        np.testing.assert_allclose(frame["delta2"], 0.0, atol=1e-12)

    def test_duration_scales_amplitude(self):
        pulse = synth_two_level(make_flat_pi(2.0))
        assert pulse.omega_r(1.0) == pytest.approx(math.pi / 2)

    def test_real_rabi_phase_makes_omega_real(self, optimized_2l):
        pulse = synth_two_level(optimized_2l, AlphaMode.REAL_RABI)
        t = np.linspace(0.0, 1.0, 4097)
        scale = np.abs(pulse.omega_r(t)).max()
        assert np.abs(pulse.omega_i(t)).max() < 1e-9 * scale

    def test_real_rabi_phase_is_continuous(self, optimized_2l):
        phase = choose_alpha_real(optimized_2l)
        alpha = phase.alpha(np.linspace(0.0, 1.0, 4097))
        assert np.abs(np.diff(alpha)).max() <= math.pi / 2

    def test_auto_mode_uses_real_rabi_for_gamma_schemes(self, optimized_2l):
        pulse = synth_two_level(optimized_2l)
        assert "real Rabi" in pulse.label

    def test_constant_alpha_override(self, flat_pi):
        pulse = synth_two_level(flat_pi, AlphaMode.CONSTANT, alpha0=0.0)
        np.testing.assert_allclose(pulse.omega_i(np.array([0.2, 0.7])), math.pi)

    def test_auto_mode_uses_tabulated_alpha(self):
        tau = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
        table = CustomTable(tau=tau.tolist(), theta=(math.pi * tau).tolist(), alpha=(0.3 * tau).tolist())
        pulse = synth_two_level(CustomScheme(1.0, table, Target.TWO_LEVEL))
        t = np.linspace(0.0, 1.0, 7)
        assert "scheme alpha" in pulse.label
        np.testing.assert_allclose(pulse.delta2(t), -0.3, atol=1e-12)
        np.testing.assert_allclose(pulse.omega12(t), 1j * math.pi * np.exp(0.3j * t), atol=1e-12)

    def test_tabulated_alpha_scales_with_duration(self):
        tau = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
        table = CustomTable(tau=tau.tolist(), theta=(math.pi * tau).tolist(), alpha=(0.3 * tau).tolist())
        pulse = synth_two_level(CustomScheme(2.0, table, Target.TWO_LEVEL))
        assert pulse.delta2(1.0) == pytest.approx(-0.15)

    def test_explicit_mode_overrides_tabulated_alpha(self):
        tau = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0])
        table = CustomTable(tau=tau.tolist(), theta=(math.pi * tau).tolist(), alpha=(0.3 * tau).tolist())
        pulse = synth_two_level(CustomScheme(1.0, table, Target.TWO_LEVEL), AlphaMode.CONSTANT, alpha0=0.0)
        np.testing.assert_allclose(pulse.delta2(np.array([0.2, 0.7])), 0.0, atol=1e-12)

    def test_rejects_three_level_scheme(self, num1_4l):
        with pytest.raises(InvalidArgumentError):
            synth_two_level(num1_4l)


class TestThreeLevelSynthesis:
    """Three-level Rabi frequencies."""

    def test_columns(self, num1_4l):
        frame = synth_three_level(num1_4l).sample(11)
        assert list(frame.columns) == ["t", "Omega12", "Omega23"]
        assert np.all(np.isfinite(frame[["Omega12", "Omega23"]].to_numpy()))

    def test_dispatch(self, num2_4l, flat_pi):
        assert synthesize(num2_4l).dimension == 4
        assert synthesize(flat_pi).dimension == 3

    def test_rejects_two_level_scheme(self, flat_pi):
        with pytest.raises(InvalidArgumentError):
            synth_three_level(flat_pi)


class TestPulseMetrics:
    """Area and energy in units of pi and pi^2 hbar / T."""

    def test_flat_pi(self, flat_pi):
        metrics = pulse_metrics(synthesize(flat_pi))
        assert metrics.area == pytest.approx(1.0, abs=1e-8)
        assert metrics.energy == pytest.approx(1.0, abs=1e-8)

    def test_quartic(self, quartic):
        metrics = pulse_metrics(synthesize(quartic))
        assert metrics.area == pytest.approx(1.0, abs=1e-8)
        assert metrics.energy == pytest.approx(48.0 / 35.0, abs=1e-8)

    def test_arcsin(self, arcsin_eps):
        metrics = pulse_metrics(synthesize(arcsin_eps))
        assert metrics.area == pytest.approx(1.0, abs=1e-8)
        assert metrics.energy == pytest.approx(1.28, rel=0.005)

    @pytest.mark.parametrize("delta_t,expected", [(1.0, (4.79, 36.56)), (3.0, (2.49, 10.51))])
    def test_optimized_2l(self, delta_t, expected):
        metrics = pulse_metrics(synthesize(make_optimized_2l(1.0, **OPTIMIZED_2L[delta_t])))
        assert metrics.area == pytest.approx(expected[0], rel=0.01)
        assert metrics.energy == pytest.approx(expected[1], rel=0.01)

    def test_ref_3l(self, ref_3l):
        metrics = pulse_metrics(synthesize(ref_3l))
        assert metrics.area == pytest.approx(500.00, rel=1e-4)
        assert metrics.energy == pytest.approx(249999, abs=1.0)

    @pytest.mark.parametrize("delta_t,expected", [(1.0, (6.71, 70.29)), (3.0, (6.61, 73.61))])
    def test_num1(self, delta_t, expected):
        metrics = pulse_metrics(synthesize(make_num1_4l(1.0, **NUM1_4L[delta_t])))
        assert metrics.area == pytest.approx(expected[0], rel=0.01)
        assert metrics.energy == pytest.approx(expected[1], rel=0.01)

    @pytest.mark.parametrize("delta_t,expected", [(1.0, (24.34, 1171.7)), (3.0, (18.65, 663.17))])
    def test_num2(self, delta_t, expected):
        metrics = pulse_metrics(synthesize(make_num2_4l(1.0, **NUM2_4L[delta_t])))
        assert metrics.area == pytest.approx(expected[0], rel=0.01)
        assert metrics.energy == pytest.approx(expected[1], rel=0.01)


class TestBaselines:
    """Sinusoidal adiabatic and STIRAP reference pulses."""

    @pytest.mark.parametrize("omega0_t", [5.0, 26.86])
    def test_adiabatic_closed_forms(self, omega0_t):
        metrics = pulse_metrics(make_adiabatic_2l(1.0, omega0_t, 3.0))
        assert metrics.area == pytest.approx(2 * omega0_t / math.pi ** 2, rel=1e-8)
        assert metrics.energy == pytest.approx(0.5 * omega0_t ** 2 / math.pi ** 2, rel=1e-8)

    def test_adiabatic_energy_match(self):
        omega0 = math.pi * math.sqrt(2 * 36.56)
        assert omega0 == pytest.approx(26.86, abs=0.01)
        assert pulse_metrics(make_adiabatic_2l(1.0, omega0, 0.0)).area == pytest.approx(5.44, rel=0.01)

    @pytest.mark.parametrize("energy,area", [(70.29, 8.38), (73.61, 8.58)])
    def test_stirap_energy_match(self, energy, area):
        metrics = pulse_metrics(make_stirap_3l(1.0, math.pi * math.sqrt(energy)))
        assert metrics.area == pytest.approx(area, rel=0.01)
        assert metrics.energy == pytest.approx(energy, rel=1e-8)

    def test_stirap_counterintuitive_order(self):
        pulse = make_stirap_3l(1.0, 10.0)
        assert pulse.omega23(0.0) == pytest.approx(10.0)
        assert pulse.omega12(0.0) == pytest.approx(0.0)

    def test_baseline_needs_omega0(self):
        with pytest.raises(InvalidArgumentError):
            make_baseline(BaselineDescriptor(kind=BaselineKind.STIRAP_3L, params={}))

    def test_baseline_rejects_unknown_parameters(self):
        descriptor = BaselineDescriptor(kind=BaselineKind.STIRAP_3L, params={"omega0": 1.0, "delta0": 2.0})
        with pytest.raises(InvalidArgumentError):
            make_baseline(descriptor)


class TestResolvePulse:
    """Pulse sources."""

    def test_scheme_source(self):
        pulse = resolve_pulse(PulseSource(scheme=SchemeDescriptor(kind=SchemeKind.FLAT_PI)))
        assert pulse.dimension == 3

    def test_baseline_source(self):
        source = PulseSource(baseline=BaselineDescriptor(kind=BaselineKind.ADIABATIC_2L,
                                                         params={"omega0": 5.0, "delta0": 1.0}))
        assert resolve_pulse(source).delta2(0.0) == pytest.approx(-1.0)

    def test_exactly_one_source(self):
        with pytest.raises(ValidationError):
            PulseSource()
        with pytest.raises(ValidationError):
            PulseSource(scheme=SchemeDescriptor(kind=SchemeKind.FLAT_PI),
                        baseline=BaselineDescriptor(kind=BaselineKind.STIRAP_3L, params={"omega0": 1.0}))


class TestInvariantRoundTrip:
    """Propagating a synthesized pulse reproduces the populations its scheme prescribes."""

    @pytest.mark.parametrize("fixture", ["flat_pi", "quartic", "num1_4l", "num2_4l"])
    def test_populations_follow_scheme(self, fixture, request):
        scheme = request.getfixturevalue(fixture)
        result = evolve(HamiltonianSpec(synthesize(scheme), PerturbedModel(delta=1.0)), record=True)
        populations = result.populations
        expected = invariant_populations(scheme, populations["t"].to_numpy())
        columns = [f"p{i}" for i in range(1, expected.shape[0] + 1)]
        np.testing.assert_allclose(populations[columns].to_numpy().T, expected, atol=1e-8)

    def test_tabulated_alpha_round_trip(self):
        tau = np.linspace(0.0, 1.0, 21)
        table = CustomTable(tau=tau.tolist(), theta=(math.pi * tau).tolist(), alpha=(0.3 * tau).tolist())
        scheme = CustomScheme(1.0, table, Target.TWO_LEVEL)
        result = evolve(HamiltonianSpec(synthesize(scheme), PerturbedModel(delta=1.0)), record=True)
        expected = invariant_populations(scheme, result.populations["t"].to_numpy())
        np.testing.assert_allclose(result.populations[["p1", "p2", "p3"]].to_numpy().T, expected, atol=1e-8)
        assert result.p_target >= 1 - 1e-8
