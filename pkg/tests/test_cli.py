import csv
import io
import json
import math

import pytest

from critlab.cli import main, parse_range, UsageError
from critlab.report import RunConfig, load_config, read_config_file, to_csv, to_json

CHECK_KEYS = {"name", "paper_anchor", "lhs", "rhs", "residual", "tol", "status"}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    header = lines[0][2:].split(",")
    return header, list(csv.reader(io.StringIO("\n".join(lines[1:]))))


def test_config_defaults():
    cfg = load_config({}, environ={})
    assert cfg == RunConfig()
    assert (cfg.tol_closed_form, cfg.tol_bvp, cfg.grid_size, cfg.f_floor_fraction) == (1e-9, 1e-6, 2048, 0.02)


def test_config_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\ngrid_size = 1024\ntol-bvp = 1e-5\nformat = csv\n")
    env_path = tmp_path / "env.cfg"
    env_path.write_text("grid_size = 512\n")
    env = {"CRITLAB_CONFIG": str(env_path)}
    assert load_config({}, environ=env).grid_size == 512
    cfg = load_config({"grid_size": 4096, "format": None}, str(path), environ=env)
    assert (cfg.grid_size, cfg.tol_bvp, cfg.format) == (4096, 1e-5, "csv")


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    with pytest.raises(ValueError):
        read_config_file(bad)
    with pytest.raises(ValueError):
        RunConfig(grid_size=32)
    with pytest.raises(ValueError):
        RunConfig(tol_bvp=0.0)


@pytest.mark.parametrize("text,expected", [("0.25:1.0:0.25", [0.25, 0.5, 0.75, 1.0]), ("3:9:1", [3, 4, 5, 6, 7, 8, 9]),
                                           ("1.6:1.8:0.1", [1.6, 1.7, 1.8])])
def test_parse_range(text, expected):
    assert parse_range(text) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["1:0:0.1", "1:2:0", "a:b", "1:2"])
def test_parse_range_rejects(text):
    with pytest.raises(UsageError):
        parse_range(text)


def test_verify_euclidean_ball_json(capsys):
    code, out, _ = run(capsys, "verify", "ball", "--space", "euclidean", "--dim", "3", "--radius", "1")
    assert code == 0
    report = json.loads(out)
    assert set(report) == {"config", "solution", "checks", "overall_pass"}
    assert report["overall_pass"] is True
    for check in report["checks"]:
        assert CHECK_KEYS <= set(check)
        assert check["paper_anchor"]
    mc = next(c for c in report["checks"] if c["name"] == "mean_curvature_bound")
    assert mc["rhs"] == pytest.approx(2.0, rel=1e-15) and mc["equality"] is True


def test_verify_is_byte_identical(capsys):
    argv = ("verify", "schwarzschild", "--dim", "3", "--mass", "1", "--r2", "6")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first[0] == 0
    assert first[1] == second[1]


def test_verify_output_file(tmp_path, capsys):
    out = tmp_path / "report.csv"
    code, stdout, _ = run(capsys, "verify", "ball", "--space", "hyperbolic", "--dim", "4", "--radius", "1.5",
                          "--format", "csv", "--output", str(out))
    assert code == 0 and stdout == ""
    header, rows = _rows(out.read_text())
    assert header[:2] == ["name", "status"]
    assert all(r[1] in ("pass", "informational", "hypothesis_failed", "inconclusive") for r in rows)


def test_verify_unsupported_ball(capsys):
    code, _, err = run(capsys, "verify", "ball", "--space", "spherical", "--dim", "3", "--radius", "1.6")
    assert code == 2
    assert "UnsupportedDomainError" in err


def test_verify_non_critical_annulus_explains(capsys):
    code, _, err = run(capsys, "verify", "schwarzschild", "--dim", "3", "--mass", "1", "--r1", "2.2", "--r2", "6")
    assert code == 2
    assert "NotCriticalError" in err and "2.0692" in err


def test_verify_reports_failure_with_exit_one(capsys):
    # a coarse grid leaves the finite-volume identities above the default tolerance
    code, out, _ = run(capsys, "verify", "schwarzschild", "--dim", "3", "--mass", "1", "--r2", "9", "--format", "text")
    assert code == 1
    assert "fail" in out and out.rstrip().endswith("overall_pass=False")


def test_verify_tolerance_flag_changes_outcome(capsys):
    code, _, _ = run(capsys, "verify", "schwarzschild", "--dim", "3", "--mass", "1", "--r2", "9", "--tol-bvp", "1e-5")
    assert code == 0


@pytest.mark.parametrize("argv", [
    ("verify",),
    ("verify", "ball", "--space", "euclidean", "--dim", "3"),
    ("verify", "ball", "--space", "flat", "--dim", "3", "--radius", "1"),
    ("profile", "curvature", "--dim", "3", "--space", "euclidean", "--radius", "1"),
    ("frobnicate",),
])
def test_usage_errors_exit_two(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(list(argv))
    assert exc.value.code == 2


@pytest.mark.parametrize("argv", [
    ("profile", "F", "--dim", "3"),
    ("profile", "F", "--dim", "3", "--space", "euclidean"),
    ("profile", "F", "--dim", "3", "--space", "euclidean", "--radius", "1", "--mass", "1", "--r2", "6"),
    ("profile", "F", "--dim", "3", "--space", "euclidean", "--radius", "1", "--component", "3"),
    ("scan", "ball", "--space", "euclidean", "--dim", "3", "--radius-range", "2:1:0.5"),
    ("verify", "ball", "--space", "euclidean", "--dim", "3", "--radius", "1", "--grid", "16"),
])
def test_semantic_usage_errors_exit_two(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "critlab" in err


def test_config_file_via_environment(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("format = text\n")
    monkeypatch.setenv("CRITLAB_CONFIG", str(cfg))
    code, out, _ = run(capsys, "verify", "ball", "--space", "euclidean", "--dim", "3", "--radius", "1")
    assert code == 0 and out.startswith("euclidean_ball n=3")
    code, out, _ = run(capsys, "verify", "ball", "--space", "euclidean", "--dim", "3", "--radius", "1",
                       "--format", "json")
    assert json.loads(out)["config"]["format"] == "json"


def test_profile_F(capsys):
    code, out, _ = run(capsys, "profile", "F", "--space", "euclidean", "--dim", "3", "--radius", "1")
    assert code == 0
    header, rows = _rows(out)
    assert header == ["t", "F"]
    assert len(rows) == 64
    assert all(abs(float(F) - 16 * math.pi) <= 1e-6 for _, F in rows)


def test_profile_phi(capsys):
    code, out, _ = run(capsys, "profile", "phi", "--space", "spherical", "--dim", "3",
                       "--radius", "1.0471975511965976")
    assert code == 0
    _, rows = _rows(out)
    assert all(float(phi) == pytest.approx(1.0, rel=1e-10) for _, phi in rows)


def test_profile_gradient_bound(capsys):
    code, out, _ = run(capsys, "profile", "gradient_bound", "--space", "euclidean", "--dim", "3", "--radius", "1")
    header, rows = _rows(out)
    assert code == 0 and header == ["coordinate", "grad_f_squared", "bound"]
    assert all(abs(float(g) - float(h)) < 1e-15 for _, g, h in rows)


def test_profile_residual_small_at_every_grid(capsys):
    maxima = []
    for grid in ("2048", "4096"):
        code, out, _ = run(capsys, "profile", "residual", "--dim", "3", "--mass", "1", "--r2", "6", "--grid", grid)
        assert code == 0
        _, rows = _rows(out)
        assert len(rows) == int(grid)
        maxima.append(max(float(r) for _, r in rows if r != "nan"))
    assert max(maxima) < 1e-10


def test_profile_F_second_component(capsys):
    code, out, _ = run(capsys, "profile", "F", "--dim", "3", "--mass", "1", "--r2", "6", "--component", "1")
    _, rows = _rows(out)
    assert code == 0 and len(rows) == 64


def test_scan_hyperbolic_family(capsys):
    code, out, _ = run(capsys, "scan", "ball", "--space", "hyperbolic", "--dim", "3",
                       "--radius-range", "0.25:2.0:0.25", "--format", "csv")
    assert code == 0
    header, rows = _rows(out)
    assert len(rows) == 8
    eq = header.index("equality")
    assert all(r[eq] == "true" for r in rows)
    assert [float(r[0]) for r in rows] == pytest.approx([0.25 * k for k in range(1, 9)])


def test_scan_spherical_unsupported(capsys):
    code, out, _ = run(capsys, "scan", "ball", "--space", "spherical", "--dim", "3",
                       "--radius-range", "1.6:1.8:0.1")
    assert code == 2
    rows = json.loads(out)["scan"]["rows"]
    assert len(rows) == 3
    assert all(r["status"] == "error" and "UnsupportedDomainError" in r["error"] for r in rows)


def test_scan_schwarzschild_margins(capsys):
    code, out, _ = run(capsys, "scan", "schwarzschild", "--dim", "3", "--mass", "1",
                       "--r2-range", "3:7:1", "--format", "json")
    assert code == 0
    rows = json.loads(out)["scan"]["rows"]
    assert len(rows) == 5
    assert all(r["margin"] > 0 and not r["equality"] for r in rows)


def test_scan_fixed_r1_records_errors(capsys):
    code, out, _ = run(capsys, "scan", "schwarzschild", "--dim", "3", "--mass", "1", "--r1", "2.2",
                       "--r2-range", "3:9:1")
    rows = json.loads(out)["scan"]["rows"]
    assert code == 2 and len(rows) == 7
    assert all(r["status"] == "error" for r in rows)


def test_scan_workers_match_serial(capsys):
    argv = ["scan", "ball", "--space", "euclidean", "--dim", "4", "--radius-range", "0.5:2:0.5", "--format", "csv"]
    serial = run(capsys, *argv)
    parallel = run(capsys, *argv, "--workers", "2")
    assert serial == parallel


def test_json_rendering_of_non_finite():
    assert json.loads(to_json({"a": math.inf, "b": [1.5, math.nan]})) == {"a": "inf", "b": [1.5, "nan"]}


def test_csv_rendering():
    text = to_csv(("x", "y"), [(0.1, True), (1, None)])
    assert text == "# x,y\n0.10000000000000001,true\n1,\n"
