import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.special import wofz

from app.modules.base_interfaces import InvalidParameterError, QuadratureConvergenceError
from app.modules.core_types import PumpParams
from app.modules.dispersion import dispersion_point
from app.modules.doppler_average import (
    AdaptiveQuadIntegrator, ComplexSpectrum, FixedNodeIntegrator, QuadratureConfig,
    average_dS_domega, average_S, resonance_loci, spectrum_scan
)


def _line_scale(medium) -> float:
    return medium.prefactor_C * math.sqrt(math.pi / 2.0) / medium.doppler_width


def _voigt_reference(delta, Delta, medium) -> complex:
    """G=0 时的解析平均：S = i·C·sqrt(π/2)/D·w((Δ+δ+i/T2)/(√2·D))"""
    D = medium.doppler_width
    z = (Delta + delta + 1j / medium.T2) / (math.sqrt(2.0) * D)
    return complex(1j * medium.prefactor_C * math.sqrt(math.pi / 2.0) / D * wofz(z))


def test_empty_medium_gives_zero(medium, pump) -> None:
    empty = replace(medium, density_N=0.0)
    assert average_S(0.0, pump, empty) == 0j
    assert average_dS_domega(1e6, pump, empty) == 0j


@pytest.mark.parametrize("delta_in_gamma", [0.0, 0.7, -3.0, 12.0])
def test_unsaturated_average_matches_faddeeva(medium, gamma, delta_in_gamma) -> None:
    delta = delta_in_gamma * gamma
    S = average_S(delta, PumpParams(), medium)
    assert S == pytest.approx(_voigt_reference(delta, 0.0, medium), rel=1e-6)


def test_fixed_node_integrator_matches_faddeeva(medium, gamma, fixed) -> None:
    for delta in np.linspace(-8.0, 8.0, 9) * gamma:
        S = average_S(delta, PumpParams(detuning_Delta=0.5 * gamma), medium, integrator=fixed)
        assert S == pytest.approx(_voigt_reference(delta, 0.5 * gamma, medium), rel=1e-8)


def test_symmetry_at_resonant_pump(medium, pump, gamma, fixed) -> None:
    tolerance = 10.0 * QuadratureConfig().rel_tolerance * _line_scale(medium)
    for delta in np.linspace(0.0, 5.0, 51) * gamma:
        plus = average_S(delta, pump, medium, integrator=fixed)
        minus = average_S(-delta, pump, medium, integrator=fixed)
        assert abs(plus.imag - minus.imag) <= tolerance
        assert abs(plus.real + minus.real) <= tolerance


def test_symmetry_with_adaptive_quadrature(medium, pump, gamma) -> None:
    tolerance = 10.0 * QuadratureConfig().rel_tolerance * _line_scale(medium)
    for delta in (0.3, 1.0, 4.0):
        plus = average_S(delta * gamma, pump, medium)
        minus = average_S(-delta * gamma, pump, medium)
        assert abs(plus.imag - minus.imag) <= tolerance
        assert abs(plus.real + minus.real) <= tolerance


def test_two_integrators_agree(medium, gamma, fixed) -> None:
    rng = np.random.default_rng(2024)
    for _ in range(20):
        pump = PumpParams(rabi_G=rng.uniform(0.0, 1.0) * gamma,
                          detuning_Delta=rng.uniform(-2.0, 2.0) * gamma)
        delta = rng.uniform(-5.0, 5.0) * gamma
        adaptive = average_S(delta, pump, medium)
        oracle = average_S(delta, pump, medium, integrator=fixed)
        assert abs(adaptive - oracle) <= 1e-6 * abs(oracle)


def test_derivative_matches_finite_differences(medium, pump, gamma, fixed) -> None:
    h = 1e-3 * gamma
    for delta in np.array([0.0, 0.4, -1.3, 3.0]) * gamma:
        def central(step):
            return (average_S(delta + step, pump, medium, integrator=fixed)
                    - average_S(delta - step, pump, medium, integrator=fixed)) / (2.0 * step)
        richardson = (4.0 * central(h / 2.0) - central(h)) / 3.0
        analytic = average_dS_domega(delta, pump, medium, integrator=fixed)
        assert abs(richardson - analytic) <= 1e-5 * abs(analytic)


def test_derivative_matches_finite_differences_on_random_parameters(medium, gamma, fixed) -> None:
    rng = np.random.default_rng(101)
    h = 1e-3 * gamma
    for _ in range(10):
        pump = PumpParams(rabi_G=rng.uniform(0.0, 1.0) * gamma,
                          detuning_Delta=rng.uniform(-2.0, 2.0) * gamma)
        delta = rng.uniform(-3.0, 3.0) * gamma
        central = (average_S(delta + h, pump, medium, integrator=fixed)
                   - average_S(delta - h, pump, medium, integrator=fixed)) / (2.0 * h)
        analytic = average_dS_domega(delta, pump, medium, integrator=fixed)
        assert abs(central - analytic) <= 1e-4 * abs(analytic)


def test_lamb_dip_deepens_and_group_index_grows_with_pump(medium, gamma, fixed) -> None:
    absorption, group = [], []
    for g in (0.1, 0.2, 0.3, 0.4):
        pump = PumpParams(rabi_G=g * gamma)
        point = dispersion_point(0.0, pump, medium, integrator=fixed)
        absorption.append(point.S.imag)
        group.append(point.n_g)
    assert absorption == sorted(absorption, reverse=True)
    assert group == sorted(group)


def test_integration_window_is_wide_enough(medium, pump, gamma, fixed) -> None:
    wide = QuadratureConfig(integration_halfwidth=8.0)
    for delta in np.array([0.0, 0.6, 2.0, -5.0, 15.0]) * gamma:
        S6 = average_S(delta, pump, medium, integrator=fixed)
        S8 = average_S(delta, pump, medium, quad=wide, integrator=fixed)
        assert abs(S6 - S8) <= 1e-10 * abs(S8)


@pytest.mark.parametrize("g_in_gamma", [0.2, 0.4, 0.5])
def test_no_gain_around_the_dip(medium, gamma, fixed, g_in_gamma) -> None:
    pump = PumpParams(rabi_G=g_in_gamma * gamma)
    for delta in np.linspace(-20.0, 20.0, 81) * gamma:
        assert average_S(delta, pump, medium, integrator=fixed).imag > 0


def test_halving_tolerance_stays_within_error_estimate(medium, pump, gamma) -> None:
    coarse = AdaptiveQuadIntegrator(QuadratureConfig(rel_tolerance=1e-6))
    fine = AdaptiveQuadIntegrator(QuadratureConfig(rel_tolerance=5e-7))
    for delta in np.linspace(-10.0, 10.0, 50) * gamma:
        S_coarse = average_S(delta, pump, medium, integrator=coarse)
        bound = coarse.last_error_estimate
        S_fine = average_S(delta, pump, medium, integrator=fine)
        rounding = 1e-13 * abs(S_fine)
        assert abs(S_fine.real - S_coarse.real) <= bound.real + rounding
        assert abs(S_fine.imag - S_coarse.imag) <= bound.imag + rounding


def test_adaptive_integrator_enforces_requested_tolerance(monkeypatch) -> None:
    integrator = AdaptiveQuadIntegrator(QuadratureConfig(rel_tolerance=1e-8))

    def roundoff_stop(abserr):
        def fake_quad(fn, lower, upper, **kwargs):
            return 1.0, abserr, {"last": 7}, "roundoff detected"
        return fake_quad

    monkeypatch.setattr("app.modules.doppler_average._quadpack", roundoff_stop(5e-9))
    assert integrator.integrate(lambda x: 1.0 + 1.0j, 0.0, 1.0, [], 0.1, 1.0) == 1.0 + 1.0j
    assert integrator.last_error_estimate == complex(5e-9, 5e-9)

    monkeypatch.setattr("app.modules.doppler_average._quadpack", roundoff_stop(2e-8))
    with pytest.raises(QuadratureConvergenceError) as info:
        integrator.integrate(lambda x: 1.0 + 1.0j, 0.0, 1.0, [], 0.1, 1.0)
    assert info.value.error_estimate == 2e-8
    assert "roundoff" in str(info.value)


def test_spectrum_scan_is_independent_of_worker_count(medium, pump, gamma, fixed) -> None:
    grid = np.linspace(-2.0, 2.0, 7) * gamma
    serial = spectrum_scan(grid, pump, medium, integrator=fixed, workers=1)
    parallel = spectrum_scan(grid, pump, medium, integrator=fixed, workers=2)
    assert isinstance(serial, ComplexSpectrum)
    assert len(serial) == 7
    np.testing.assert_array_equal(serial.S_values, parallel.S_values)
    assert serial.metadata["integrator"] == "fixed"
    assert serial.metadata["medium"]["density_N"] == medium.density_N


def test_spectrum_scan_rejects_unsorted_grid(medium, pump) -> None:
    with pytest.raises(InvalidParameterError):
        spectrum_scan([1.0, 0.0], pump, medium)
    with pytest.raises(InvalidParameterError):
        spectrum_scan([], pump, medium)


def test_invalid_probe_detuning(medium, pump) -> None:
    with pytest.raises(InvalidParameterError):
        average_S(math.nan, pump, medium)


def test_resonance_loci_cover_all_denominators() -> None:
    loci = resonance_loci(Delta=3.0, delta=9.0)
    assert loci == [-3.0, 12.0, 2.0, 4.5, 0.0]


def test_fixed_mesh_is_refined_around_loci(gamma) -> None:
    integrator = FixedNodeIntegrator()
    edges = integrator.mesh(-1e10, 1e10, [0.0, 5 * gamma], gamma)
    assert np.all(np.diff(edges) > 0)
    assert np.min(np.abs(edges - 5 * gamma)) == 0.0
    assert np.min(np.diff(edges)) <= gamma / 64 * (1 + 1e-12)


def test_adaptive_integrator_reports_nonconvergence() -> None:
    integrator = AdaptiveQuadIntegrator(QuadratureConfig(max_subdivisions=100))
    with pytest.raises(QuadratureConvergenceError) as info:
        integrator.integrate(lambda x: complex(math.cos(1e6 * x), 0.0), 0.0, 1.0, [], 1e-3, 1.0)
    located = info.value.at_delta(42.0)
    assert located.delta == 42.0
    assert located.error_estimate == info.value.error_estimate
    assert located.category == "convergence"


def test_quadrature_config_validation() -> None:
    with pytest.raises(InvalidParameterError):
        QuadratureConfig(integration_halfwidth=3.0)
    with pytest.raises(InvalidParameterError):
        QuadratureConfig(rel_tolerance=0.0)
    with pytest.raises(InvalidParameterError):
        QuadratureConfig(max_subdivisions=50)
