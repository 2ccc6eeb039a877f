import math
from dataclasses import replace

import pytest

from app.modules.base_interfaces import InvalidParameterError
from app.modules.core_types import (
    PRESETS, RB87_GAMMA, MediumParams, ProbeParams, PumpParams, calibrate_prefactor,
    doppler_width, load_preset
)
from app.utils.units import ATOMIC_MASS_UNIT, wavelength_to_omega


def test_doppler_width_of_rb87_vapor_at_room_temperature() -> None:
    omega = wavelength_to_omega(780.24e-7)
    D = doppler_width(300.0, 87 * ATOMIC_MASS_UNIT, omega)
    assert D == pytest.approx(1.33e9, rel=0.03)


@pytest.mark.parametrize("factor", [4.0, 0.37, 2.9e3])
def test_doppler_width_scaling(factor) -> None:
    T, M, omega = 300.0, 87 * ATOMIC_MASS_UNIT, wavelength_to_omega(780.24e-7)
    D = doppler_width(T, M, omega)
    assert doppler_width(factor * T, M, omega) == pytest.approx(math.sqrt(factor) * D, rel=2e-15)
    assert doppler_width(T, factor * M, omega) == pytest.approx(D / math.sqrt(factor), rel=2e-15)
    assert doppler_width(T, M, factor * omega) == pytest.approx(factor * D, rel=2e-15)
    assert doppler_width(4.0 * T, M, omega) == 2.0 * D
    assert doppler_width(T, 4.0 * M, omega) == 0.5 * D


def test_prefactor_is_inverse_in_lifetime(medium) -> None:
    reference = calibrate_prefactor(medium.density_N, medium.T1, medium.omega_1g) * medium.T1
    for factor in (0.1, 0.5, 3.0, 47.0):
        T1 = factor * medium.T1
        C = calibrate_prefactor(medium.density_N, T1, medium.omega_1g)
        assert C * T1 == pytest.approx(reference, rel=2e-15)


def test_preset_relaxation_times_and_linewidth(medium) -> None:
    assert medium.homogeneous_width == pytest.approx(RB87_GAMMA, rel=1e-15)
    assert medium.T2 == pytest.approx(2.0 * medium.T1, rel=1e-15)
    assert medium.density_N == 2e11
    assert medium.length_l == 1.0
    assert medium.doppler_width == pytest.approx(1.3636e9, rel=2e-3)


def test_preset_pump_is_resonant_at_four_tenths_gamma(pump) -> None:
    assert pump.rabi_G == pytest.approx(0.4 * RB87_GAMMA)
    assert pump.detuning_Delta == 0.0


def test_dipole_calibration_prefactor(medium) -> None:
    # |d|² = 3ħc³/(4ω³T1) 给出 C = N|d|²/ħ ≈ 5.41e3 rad/s
    assert medium.prefactor_C == pytest.approx(5414.0, rel=5e-3)


def test_prefactor_is_exactly_linear_in_density(medium) -> None:
    doubled = replace(medium, density_N=2.0 * medium.density_N)
    assert doubled.prefactor_C == 2.0 * medium.prefactor_C
    empty = replace(medium, density_N=0.0)
    assert empty.prefactor_C == 0.0


def test_to_dict_carries_derived_quantities(medium) -> None:
    data = medium.to_dict()
    assert data["prefactor_C"] == medium.prefactor_C
    assert data["doppler_width_D"] == medium.doppler_width


@pytest.mark.parametrize("field, value", [
    ("T2", -1e-7), ("T1", 0.0), ("length_l", 0.0), ("temperature", -3.0),
    ("mass_M", 0.0), ("density_N", -1.0), ("omega_1g", math.inf),
])
def test_medium_rejects_invalid_values(medium, field, value) -> None:
    with pytest.raises(InvalidParameterError):
        replace(medium, **{field: value})


def test_pump_and_probe_validation() -> None:
    with pytest.raises(InvalidParameterError):
        PumpParams(rabi_G=-1.0)
    with pytest.raises(InvalidParameterError):
        PumpParams(detuning_Delta=math.nan)
    with pytest.raises(InvalidParameterError):
        ProbeParams(modulation_index_m=-0.1)
    assert PumpParams().rabi_G == 0.0


def test_calibrate_prefactor_rejects_nonpositive_lifetime() -> None:
    with pytest.raises(InvalidParameterError):
        calibrate_prefactor(1e10, 0.0, 2.4e15)


def test_preset_registry() -> None:
    assert "rb87-vapor" in PRESETS
    medium, pump, probe = load_preset("rb87-vapor")
    assert isinstance(medium, MediumParams)
    assert probe == ProbeParams()
    with pytest.raises(InvalidParameterError, match="rb87-vapor"):
        load_preset("cs133")


def test_rb87_preset_is_registered_under_both_names() -> None:
    assert "rb87-paper" in PRESETS
    assert load_preset("rb87-paper") == load_preset("rb87-vapor")
