import json
import math

import numpy as np
import pytest

from app.modules.base_interfaces import (
    OutputColumn, OutputError, OutputFormat, SweepVariable
)
from app.modules.dispersion import assemble_point
from app.modules.doppler_average import ComplexSpectrum
from app.modules.sweep_optimize import OptimizationResult, SweepResult, SweepRow, SweepSpec
from app.services.output_writer import (
    OPTIMIZE_COLUMNS, PULSE_COLUMNS, SPECTRUM_COLUMNS, emit, read_csv_rows, read_json,
    render_csv, table_from_spectrum, table_from_sweep, to_table
)

SNAPSHOT = {"preset": "rb87-vapor", "medium": {"density_N": 2e11}, "overrides": {}}
STAMP = "2024-01-01T00:00:00"


@pytest.fixture
def synthetic_sweep(medium, pump, gamma) -> SweepResult:
    """不做积分的合成扫描结果，数值取随机的非整齐浮点"""
    rng = np.random.default_rng(99)
    grid = np.sort(rng.uniform(-3.0, 3.0, 12)) * gamma
    spec = SweepSpec(variable=SweepVariable.PROBE_DETUNING, grid=grid, medium=medium, pump=pump)
    rows = []
    for delta in spec.grid:
        S = complex(rng.normal(0.0, 1e-6), rng.uniform(0.0, 4e-6))
        dS = complex(rng.normal(0.0, 1e-13), rng.normal(0.0, 1e-13))
        point = assemble_point(delta, S, dS, pump, medium)
        rows.append(SweepRow(value=delta, delta=delta, rabi_G=pump.rabi_G,
                             detuning_Delta=pump.detuning_Delta, point=point))
    return SweepResult(spec=spec, rows=rows)


def test_json_round_trip_is_bit_exact(synthetic_sweep, tmp_path) -> None:
    path = tmp_path / "sweep.json"
    emit(synthetic_sweep, OutputFormat.JSON, str(path), SNAPSHOT, generated_at=STAMP)
    document = read_json(str(path))
    assert document["generated_at"] == STAMP
    assert document["parameters"] == SNAPSHOT
    assert document["columns"][0] == "delta_rad_per_s"
    n_g_index = document["columns"].index("n_g")
    for row, source in zip(document["rows"], synthetic_sweep.rows):
        assert row[0] == source.delta
        assert row[1] == source.point.S.real
        assert row[2] == source.point.S.imag
        assert row[n_g_index] == source.point.n_g


def test_csv_keeps_seventeen_significant_digits(synthetic_sweep, tmp_path) -> None:
    path = tmp_path / "sweep.csv"
    emit(synthetic_sweep, OutputFormat.CSV, str(path), SNAPSHOT, generated_at=STAMP)
    rows = read_csv_rows(str(path))
    assert len(rows) == len(synthetic_sweep)
    for row, source in zip(rows, synthetic_sweep.rows):
        assert float(row["delta_rad_per_s"]) == source.delta
        assert float(row["theta_s"]) == source.point.theta
        assert float(row["transmission"]) == source.point.transmission
        assert row["error"] == ""


def test_csv_header_carries_parameters(synthetic_sweep) -> None:
    text = render_csv(table_from_sweep(synthetic_sweep), SNAPSHOT, STAMP)
    lines = text.splitlines()
    assert lines[0] == f"# generated_at: {STAMP}"
    assert json.loads(lines[1][len("# parameters: "):]) == SNAPSHOT
    assert lines[2].startswith("# results: ")
    assert lines[3].split(",")[:len(SPECTRUM_COLUMNS)] == SPECTRUM_COLUMNS


def test_output_is_deterministic_apart_from_timestamp(synthetic_sweep, capsys) -> None:
    for fmt in OutputFormat:
        first = emit(synthetic_sweep, fmt, None, SNAPSHOT, generated_at=STAMP)
        second = emit(synthetic_sweep, fmt, None, SNAPSHOT, generated_at=STAMP)
        assert first == second
        later = emit(synthetic_sweep, fmt, None, SNAPSHOT, generated_at="2030-01-01T00:00:00")
        assert first.replace(STAMP, "") == later.replace("2030-01-01T00:00:00", "")
    assert STAMP in capsys.readouterr().out


def test_sweep_variable_and_error_columns(medium, pump, gamma) -> None:
    spec = SweepSpec(variable=SweepVariable.PUMP_RABI, grid=[0.1 * gamma, 0.2 * gamma],
                     medium=medium, pump=pump, outputs=(OutputColumn.S,))
    point = assemble_point(0.0, complex(1e-6, 2e-6), complex("nan+nanj"), pump, medium)
    rows = [
        SweepRow(value=0.1 * gamma, delta=0.0, rabi_G=0.1 * gamma, detuning_Delta=0.0, point=point),
        SweepRow(value=0.2 * gamma, delta=0.0, rabi_G=0.2 * gamma, detuning_Delta=0.0,
                 error="convergence: 未收敛"),
    ]
    table = table_from_sweep(SweepResult(spec=spec, rows=rows))
    assert table.columns[0] == "rabi_G_rad_per_s"
    assert table.columns[-1] == "error"
    first = dict(zip(table.columns, table.rows[0]))
    assert first["rabi_G_rad_per_s"] == 0.1 * gamma
    assert first["re_S"] == 1e-6
    assert first["n_g"] is None
    assert first["transmission"] is None
    second = dict(zip(table.columns, table.rows[1]))
    assert second["re_S"] is None
    assert second["error"] == "convergence: 未收敛"
    assert table.extra["outputs"] == ["S"]


def test_spectrum_table_derives_attenuation(medium, pump, gamma) -> None:
    grid = np.array([-gamma, 0.0, gamma])
    values = np.array([1e-6 + 2e-6j, 3e-6j, -1e-6 + 2e-6j])
    spectrum = ComplexSpectrum(grid, values, {"medium": medium.to_dict(), "pump": pump.to_dict(),
                                              "integrator": "fixed"})
    table = table_from_spectrum(spectrum)
    assert table.columns == SPECTRUM_COLUMNS
    row = dict(zip(table.columns, table.rows[1]))
    assert row["im_S"] == 3e-6
    assert row["n_g"] is None
    assert row["transmission"] == math.exp(-row["attenuation_exponent"])
    assert row["attenuation_exponent"] > 0
    assert table.extra["integrator"] == "fixed"


def test_optimization_table_and_csv_booleans() -> None:
    result = OptimizationResult(rabi_G=1.5e6, n_g=1400.0, transmission=0.05,
                                attenuation_exponent=3.0, theta=4.6e-8,
                                constraint_active=True, evaluations=37)
    table = to_table(result)
    assert table.columns == OPTIMIZE_COLUMNS
    text = render_csv(table, SNAPSHOT, STAMP)
    assert text.splitlines()[-1].endswith(",true,37")


def test_json_writes_nan_as_null(medium, pump, tmp_path) -> None:
    spec = SweepSpec(variable=SweepVariable.PROBE_DETUNING, grid=[0.0], medium=medium,
                     pump=pump, outputs=(OutputColumn.S, OutputColumn.N_G))
    point = assemble_point(0.0, complex(1e-6, 2e-6), complex("nan+nanj"), pump, medium)
    result = SweepResult(spec=spec, rows=[SweepRow(0.0, 0.0, pump.rabi_G, 0.0, point)])
    path = tmp_path / "nan.json"
    emit(result, "json", str(path), SNAPSHOT, generated_at=STAMP)
    document = read_json(str(path))
    assert document["rows"][0][document["columns"].index("n_g")] is None


def test_unwritable_path_raises_output_error(synthetic_sweep, tmp_path) -> None:
    target = tmp_path / "missing" / "dir" / "out.csv"
    with pytest.raises(OutputError) as info:
        emit(synthetic_sweep, OutputFormat.CSV, str(target), SNAPSHOT)
    assert info.value.exit_code == 7
    with pytest.raises(OutputError):
        read_json(str(target))


def test_unknown_result_type_is_rejected() -> None:
    with pytest.raises(TypeError):
        to_table(object())


def test_pulse_columns_are_time_and_intensities() -> None:
    assert PULSE_COLUMNS == ["t_s", "intensity_vacuum", "intensity_medium"]
