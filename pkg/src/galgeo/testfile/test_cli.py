# src/galgeo/testfile/test_cli.py
import io
import json
import math

import pandas as pd
import pytest

from main import main
from src.galgeo.base import ArgumentSpecError
from src.galgeo.cli.commands import EXIT_BLOWUP, EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_OK
from src.galgeo.cli.points import parse_grid, parse_point
from src.galgeo.geodesy.integrator import integrate_geodesic
from src.galgeo.geometry.connection import SecondOrderSystem
from src.galgeo.symbolic.expr import ChartPoint

from .conftest import system_path


def _csv(text):
    return pd.read_csv(io.StringIO(text), comment="#", float_precision="round_trip")


def _summary(text):
    line = next(l for l in text.splitlines() if l.startswith("# summary: "))
    return dict(item.split("=", 1) for item in line[len("# summary: "):].split(","))


def _write_system(tmp_path, payload):
    path = tmp_path / "system.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


# ---------- point specifications ----------
def test_parse_point_forms():
    assert parse_point("t=0,x=[2],y=[1]", 1) == ChartPoint(0.0, (2.0,), (1.0,))
    assert parse_point("x2=3, y1=-1", 2) == ChartPoint(0.0, (0.0, 3.0), (-1.0, 0.0))
    assert parse_point("", 1) == ChartPoint(0.0, (0.0,), (0.0,))


@pytest.mark.parametrize("spec", ["t=0,z=[1]", "x=[1,2]", "x3=1", "t=abc", "t=1,t=2"])
def test_parse_point_errors(spec):
    with pytest.raises(ArgumentSpecError):
        parse_point(spec, 1)


def test_grid_varies_time_slowest():
    points = parse_grid("t=0:1:2,x1=-1:1:3,y1=0.5", 1)
    assert len(points) == 6
    assert [p.t for p in points] == [0.0, 0.0, 0.0, 1.0, 1.0, 1.0]
    assert [p.x[0] for p in points[:3]] == [-1.0, 0.0, 1.0]
    assert all(p.y[0] == 0.5 for p in points)


def test_grid_rejects_bad_items():
    with pytest.raises(ArgumentSpecError):
        parse_grid("t=0:1", 1)
    with pytest.raises(ArgumentSpecError):
        parse_grid("t=0:1:0", 1)


# ---------- check ----------
def test_check_free_particle(capsys):
    assert main(["check", system_path("free_particle"), "--points", "10"]) == EXIT_OK
    table = _csv(capsys.readouterr().out)
    assert list(table.columns) == ["equation", "max_residual", "tolerance", "passed"]
    checked = table[table.equation != "curvature_R"]
    assert (checked.max_residual <= 1e-14).all()


def test_check_oscillator(capsys):
    assert main(["check", system_path("oscillator"), "--points", "100", "--tol", "1e-6"]) == EXIT_OK
    table = _csv(capsys.readouterr().out)
    assert set(table.equation) >= {"dtau", "omega", "phi_oracle", "phi_phi", "curvature_R"}


def test_check_with_appendix(capsys):
    code = main(["check", system_path("coupled_normalized"), "--points", "20", "--appendix", "--tol", "1e-7"])
    assert code == EXIT_OK
    table = _csv(capsys.readouterr().out)
    assert "appendix:chern_vertical_torsion" in set(table.equation)


def test_check_is_deterministic(capsys):
    main(["check", system_path("trig_drag"), "--points", "15", "--seed", "5"])
    first = capsys.readouterr().out
    main(["check", system_path("trig_drag"), "--points", "15", "--seed", "5"])
    assert capsys.readouterr().out == first


def test_check_rejects_asymmetric_Qsym(tmp_path, caplog):
    path = _write_system(
        tmp_path,
        {"n": 2, "gamma": ["0", "0"], "Qsym": [[["0", "x1"], ["0", "0"]], [["0", "0"], ["0", "0"]]]},
    )
    assert main(["check", path]) == EXIT_INPUT_ERROR
    assert "symmetry violation at (1, 1, 2)" in caplog.text


def test_check_rejects_bad_expression(tmp_path, caplog):
    path = _write_system(tmp_path, {"n": 1, "gamma": ["y2 + 1"]})
    assert main(["check", path]) == EXIT_INPUT_ERROR
    assert "out of range" in caplog.text


def test_check_overflowing_constant_is_input_error(tmp_path, caplog):
    path = _write_system(tmp_path, {"n": 1, "gamma": ["1e300*1e300*y1"]})
    assert main(["check", path, "--points", "5"]) == EXIT_INPUT_ERROR
    assert "gave up" in caplog.text


def test_check_rejects_literal_out_of_range(tmp_path, caplog):
    path = _write_system(tmp_path, {"n": 1, "gamma": ["1e999*y1"]})
    assert main(["check", path]) == EXIT_INPUT_ERROR
    assert "out of range" in caplog.text


def test_check_missing_file(tmp_path):
    assert main(["check", str(tmp_path / "missing.json")]) == EXIT_INPUT_ERROR


def test_check_json_output(capsys):
    assert main(["check", system_path("free_particle"), "--points", "5", "--format", "json"]) == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert {row["equation"] for row in rows} >= {"dtau", "omega"}


# ---------- invariants ----------
def test_invariants_oscillator(capsys):
    assert main(["invariants", system_path("oscillator"), "--at", "t=0,x=[0.5],y=[0.1]"]) == EXIT_OK
    table = _csv(capsys.readouterr().out)
    assert table["P[1][1]"].iloc[0] == pytest.approx(-1.0, abs=1e-12)
    assert table["status"].iloc[0] == "ok"


def test_invariants_position_damping(capsys):
    assert main(["invariants", system_path("position_damping"), "--at", "t=0,x=[2],y=[1]", "--deviation"]) == EXIT_OK
    table = _csv(capsys.readouterr().out)
    assert table["P[1][1]"].iloc[0] == pytest.approx(0.5, abs=1e-12)
    assert table["eig[1]_re"].iloc[0] == pytest.approx(0.5, abs=1e-12)


def test_invariants_grid_on_flat_system(capsys):
    assert main(["invariants", system_path("free_particle"), "--grid", "t=-1:1:3,x1=0:2:2"]) == EXIT_OK
    table = _csv(capsys.readouterr().out)
    assert len(table) == 6
    labels = [c for c in table.columns if c[0] in "DQPT" and "[" in c]
    assert (table[labels].abs() == 0.0).all().all()


def test_invariants_chern_drops_normalization(capsys):
    path = system_path("oscillator_normalized")
    assert main(["invariants", path, "--at", "t=0,x=[0.5],y=[0.3]"]) == EXIT_OK
    supplied = _csv(capsys.readouterr().out)
    assert main(["invariants", path, "--at", "t=0,x=[0.5],y=[0.3]", "--chern"]) == EXIT_OK
    chern = _csv(capsys.readouterr().out)
    assert supplied["D[1][1]"].iloc[0] == pytest.approx(0.3)
    assert chern["D[1][1]"].iloc[0] == pytest.approx(0.0, abs=1e-12)


def test_invariants_flag_domain_errors(tmp_path, capsys):
    path = _write_system(tmp_path, {"n": 1, "gamma": ["1/x1"]})
    code = main(["invariants", path, "--at", "t=0,x=[0],y=[1]", "--at", "t=0,x=[1],y=[1]", "--format", "json"])
    assert code == EXIT_OK
    rows = json.loads(capsys.readouterr().out)
    assert rows[0]["status"].startswith("error")
    assert rows[0]["P[1][1]"] is None
    assert rows[1]["status"] == "ok"


def test_invariants_bad_point(capsys):
    assert main(["invariants", system_path("oscillator"), "--at", "t=0,x=[1,2]"]) == EXIT_INPUT_ERROR


# ---------- geodesic ----------
def test_geodesic_free_particle(capsys):
    code = main(["geodesic", system_path("free_particle"), "--init", "t=0,x=[0],y=[1]", "--end", "1", "--step", "0.1"])
    assert code == EXIT_OK
    table = _csv(capsys.readouterr().out)
    assert list(table.columns[:4]) == ["s", "t", "x1", "y1"]
    assert len(table) == 11
    assert table["x1"].to_numpy() == pytest.approx(table["s"].to_numpy(), abs=1e-12)


def test_geodesic_values_round_trip_through_csv(capsys):
    main(["geodesic", system_path("oscillator"), "--init", "t=0,x=[0],y=[1]", "--end", "0.5", "--step", "0.05"])
    table = _csv(capsys.readouterr().out)
    system = SecondOrderSystem.from_strings(["x1"])
    curve = integrate_geodesic(system, ChartPoint(0.0, (0.0,), (1.0,)), 0.5, 0.05)
    assert table["x1"].tolist() == curve.points[:, 1].tolist()
    assert table["y1"].tolist() == curve.points[:, 2].tolist()


def test_geodesic_oscillator_with_development(capsys):
    args = ["geodesic", system_path("oscillator"), "--init", "t=0,x=[0],y=[1]"]
    code = main(args + ["--end", repr(math.pi / 2), "--develop"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    table = _csv(out)
    assert table["x1"].iloc[-1] == pytest.approx(1.0, abs=1e-6)
    assert {"dev_t", "dev_x1", "dev_y1"} <= set(table.columns)
    summary = _summary(out)
    assert summary["passed"] == "True"
    assert float(summary["straight_line_residual"]) <= 1e-5


def test_geodesic_blowup_exit_code(tmp_path, capsys):
    path = _write_system(tmp_path, {"n": 1, "gamma": ["-y1^2"]})
    code = main(["geodesic", path, "--init", "t=0,x=[0],y=[1]", "--end", "3", "--step", "0.01"])
    assert code == EXIT_BLOWUP
    table = _csv(capsys.readouterr().out)
    assert table["flag"].iloc[-1] == "blowup"


def test_geodesic_help_describes_step_bound(capsys):
    with pytest.raises(SystemExit):
        main(["geodesic", "--help"])
    assert "largest step in t" in " ".join(capsys.readouterr().out.split())


def test_geodesic_end_before_start():
    code = main(["geodesic", system_path("oscillator"), "--init", "t=1,x=[0],y=[1]", "--end", "0"])
    assert code == EXIT_INPUT_ERROR


def test_exit_codes_are_distinct():
    assert len({EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_BLOWUP}) == 4
