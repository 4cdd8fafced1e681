import json
import subprocess
import sys

import pytest

from ess.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_RUNTIME, main
from ess.csvio import read_csv
from ess.suites import verify_manifest

SMALL_GROWTH = {
    "domain": {"kind": "disk"},
    "solver": {"grid": 64},
    "evolution": {"dt": 1e-2, "t_max": 0.3, "snapshot_every": 5},
}


def _cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data, indent=2))
    return str(p)


def test_print_schema(capsys):
    assert main(["print-schema"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["title"] == "ess experiment"


def test_validate_geometry_disk_and_ellipse(tmp_path, capsys):
    out = tmp_path / "g"
    assert main(["validate-geometry", "--out", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    for name in ("projection_residual", "jacobian_fd", "exteriority", "involution"):
        assert f"[PASS] {name}" in text
    assert verify_manifest(out)
    cfg = _cfg(tmp_path, {"domain": {"kind": "ellipse"}})
    assert main(["validate-geometry", "--config", cfg, "--out", str(tmp_path / "e")]) == EXIT_OK


def test_validity_radius_negative_control(tmp_path, capsys):
    cfg = _cfg(tmp_path, {"domain": {"kind": "disk", "validity_radius": 0.9},
                          "initial_data": {"delta_strip": 1e-3},
                          "sector": {"delta": 0.0625}})
    assert main(["validate-geometry", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_FAIL
    assert "[FAIL] involution" in capsys.readouterr().out


def test_config_error_exit(tmp_path, capsys):
    cfg = _cfg(tmp_path, {"domain": {"kind": "disk"}, "bogus": 1})
    assert main(["validate-geometry", "--config", cfg, "--out", str(tmp_path / "x")]) == EXIT_CONFIG
    assert "bogus" in capsys.readouterr().err


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ESS_THREADS", "many")
    assert main(["validate-geometry", "--out", str(tmp_path / "t")]) == EXIT_CONFIG


def test_model_field_mode(tmp_path, capsys):
    cfg = _cfg(tmp_path, {"domain": {"kind": "disk"}, "evolution": {"dt": 1e-3, "t_max": 3.0}})
    out = tmp_path / "m"
    assert main(["run-growth", "--config", cfg, "--model-field", "xlogx:1.0",
                 "--out", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "[PASS] model_closed_form" in text and "[PASS] gronwall_fit" in text
    d = read_csv(out / "growth_trace.csv", ("t", "a", "b"))
    assert d["t"][-1] == pytest.approx(3.0)
    assert verify_manifest(out)


def test_bad_model_field(tmp_path):
    assert main(["run-growth", "--model-field", "cubic:1", "--out", str(tmp_path)]) in (
        EXIT_CONFIG, EXIT_RUNTIME)


def test_small_field_run_and_plots(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["run-growth", "--config", _cfg(tmp_path, SMALL_GROWTH), "--out", str(out)])
    assert code in (EXIT_OK, EXIT_FAIL)
    rep = json.loads((out / "growth_report.json").read_text())
    assert {c["name"] for c in rep["checks"]} >= {"markers_decreasing", "region_integrity",
                                                 "diagonal_outflow", "loglog_fit",
                                                 "gradient_lower_bound"}
    assert verify_manifest(out)
    man = json.loads((out / "manifest.json").read_text())
    assert set(man["suites"]) == {"geometry", "growth"}
    assert "growth_trace.csv" in man["files"] and "integrity.csv" in man["files"]
    capsys.readouterr()
    plots = tmp_path / "plots"
    assert main(["emit-plots", str(out / "growth_trace.csv"), "--out", str(plots)]) == EXIT_OK
    assert (plots / "growth_trace_loglog.dat").read_text().startswith("# t loglog_inv_a")
    summary = json.loads((plots / "plots_summary.json").read_text())
    assert "loglog_r2" in summary["inputs"]["growth_trace.csv"]


def test_cfl_control_path(tmp_path, capsys):
    data = dict(SMALL_GROWTH, evolution={"dt": 0.2, "t_max": 0.4, "cfl_cap": 0.05,
                                         "snapshot_every": 1})
    code = main(["run-growth", "--config", _cfg(tmp_path, data), "--out", str(tmp_path / "c")])
    err = capsys.readouterr().err
    assert code == EXIT_RUNTIME and "CFLError" in err


def test_emit_plots_schema_errors(tmp_path, capsys):
    bad = tmp_path / "trace.csv"
    bad.write_text("t,a,log_a\n0,1,0\n")
    assert main(["emit-plots", str(bad), "--out", str(tmp_path / "p")]) == EXIT_CONFIG
    assert "b" in capsys.readouterr().err
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["emit-plots", str(empty), "--out", str(tmp_path / "p")]) == EXIT_CONFIG
    header_only = tmp_path / "h.csv"
    header_only.write_text("t,a,b,log_a,log_b\n")
    assert main(["emit-plots", str(header_only), "--out", str(tmp_path / "p")]) == EXIT_CONFIG
    assert main(["emit-plots", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "p")]) \
        == EXIT_CONFIG


def test_emit_plots_residual_and_lambda(tmp_path):
    from ess.plots import emit_plots

    r = tmp_path / "residual_b1.csv"
    r.write_text("x1,x2,radius,u1_over_x1,lambda,b1\n"
                 "0.01,0,0.01,-3,3.1,0.1\n0.005,0,0.005,-3.5,3.6,0.1\n0.0025,0,0.0025,-4,4.1,0.1\n")
    lam = tmp_path / "lambda_scaling.csv"
    lam.write_text("delta,log_inv_delta,lambda\n0.01,4.6,3\n0.001,6.9,4.5\n0.0001,9.2,6\n")
    s = emit_plots([r, lam], tmp_path / "p")
    assert "residual_b1_u_over_x.dat" in s["files"] and "residual_b1_b1.dat" in s["files"]
    assert s["inputs"]["lambda_scaling.csv"]["r2"] == pytest.approx(1.0)


def test_console_script(tmp_path):
    r = subprocess.run([sys.executable, "-m", "ess.cli", "print-schema"], capture_output=True,
                       text=True, check=False)
    assert r.returncode == 0 and '"title"' in r.stdout
