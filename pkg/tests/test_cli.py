import json

import pytest

from app.cli import build_parser, main
from app.services.output_writer import read_csv_rows, read_json
from make_reference import reference_runs


@pytest.fixture(autouse=True)
def _quiet_environment(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("LAMBDIP_LOG_LEVEL", "WARNING")
    monkeypatch.setenv("LAMBDIP_WORKERS", "1")
    monkeypatch.delenv("LAMBDIP_LOG_FILE", raising=False)


def test_presets_lists_builtin_medium(capsys) -> None:
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "rb87-vapor" in out
    assert "γ = " in out


def test_show_config_prints_snapshot(capsys) -> None:
    assert main(["show-config", "--set", "pump.rabi_G=0.3 gamma", "--format", "json"]) == 0
    captured = capsys.readouterr()
    snapshot = json.loads(captured.out)
    assert snapshot["overrides"]["pump.rabi_G"] == "0.3 gamma"
    assert snapshot["pump"]["rabi_G"] == pytest.approx(0.3 * snapshot["gamma_rad_per_s"])
    assert "lambdip: warnings: 0, errors: 0" in captured.err


def test_unknown_key_exits_with_config_error(capsys) -> None:
    assert main(["spectrum", "--set", "medium.densty=1e11"]) == 3
    err = capsys.readouterr().err
    assert "error: config-error:" in err
    assert "medium.densty" in err


def test_missing_config_file_is_a_config_error(capsys, tmp_path) -> None:
    assert main(["spectrum", "--config", str(tmp_path / "absent.conf")]) == 3


def test_spectrum_writes_csv(tmp_path) -> None:
    out = tmp_path / "spectrum.csv"
    code = main(["spectrum", "--integrator", "fixed", "--set", "sweep.points=5",
                 "--out", str(out)])
    assert code == 0
    rows = read_csv_rows(str(out))
    assert len(rows) == 5
    assert all(float(row["im_S"]) > 0 for row in rows)
    assert all(row["n_g"] == "" for row in rows)
    header = out.read_text(encoding="utf-8").splitlines()[1]
    assert json.loads(header[len("# parameters: "):])["integrator"] == "fixed"


def test_groupindex_reads_config_file_and_writes_json(tmp_path) -> None:
    config = tmp_path / "run.conf"
    config.write_text("sweep.start = -0.5 gamma\nsweep.stop = 0.5 gamma\nsweep.points = 3\n",
                      encoding="utf-8")
    out = tmp_path / "groupindex.json"
    code = main(["groupindex", "--config", str(config), "--integrator", "fixed",
                 "--format", "json", "--out", str(out)])
    assert code == 0
    document = read_json(str(out))
    assert len(document["rows"]) == 3
    n_g = [row[document["columns"].index("n_g")] for row in document["rows"]]
    assert n_g[1] > n_g[0]
    assert n_g[1] > n_g[2]


def test_infeasible_optimization_exits_5(capsys) -> None:
    code = main(["optimize", "--integrator", "fixed", "--set", "optimize.min_transmission=1"])
    assert code == 5
    assert "error: infeasible:" in capsys.readouterr().err


def test_unwritable_output_exits_7(tmp_path, capsys) -> None:
    out = tmp_path / "no" / "such" / "dir.csv"
    code = main(["spectrum", "--integrator", "fixed", "--set", "sweep.points=2", "--out", str(out)])
    assert code == 7
    assert "error: io:" in capsys.readouterr().err


def test_invalid_choice_is_rejected_by_parser() -> None:
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["spectrum", "--format", "xml"])
    assert info.value.code == 2


def test_reference_runs_cover_figure_commands(tmp_path) -> None:
    runs = reference_runs(tmp_path, workers=1)
    assert [argv[0] for argv in runs] == ["spectrum", "groupindex", "gscan", "pulse"]
    parser = build_parser()
    for argv in runs:
        args = parser.parse_args(argv)
        assert args.out == str(tmp_path / f"{argv[0]}.csv")
        assert args.overrides == ["run.preset=rb87-paper"]


def test_reference_groupindex_run_writes_csv(tmp_path) -> None:
    argv = reference_runs(tmp_path, workers=1)[1]
    code = main(argv + ["--integrator", "fixed", "--set", "sweep.points=3"])
    assert code == 0
    rows = read_csv_rows(str(tmp_path / "groupindex.csv"))
    assert len(rows) == 3
    assert float(rows[1]["n_g"]) > max(float(rows[0]["n_g"]), float(rows[2]["n_g"]))
