import json
import subprocess
import sys

import numpy as np
import pytest

from polarwalk.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_TOLERANCE, main
from polarwalk.dumps import read_field
from polarwalk.harness import THREADS_ENV, RunConfig
from polarwalk.observables import read_audit_csv

SMALL = ["--n-theta", "16", "--n-r", "12"]


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_evolve_writes_artifacts(tmp_path, capsys):
    code, out, _ = run(["evolve", *SMALL, "--steps", "4", "--dump-every", "2",
                        "--output-dir", str(tmp_path)], capsys)
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["steps"] == 4 and report["norm_drift"] < 1e-13
    for name in ("field_000000.bin", "field_000002.bin", "field_000004.bin",
                 "field_final.bin", "audit.csv", "evolve.json"):
        assert (tmp_path / name).is_file()
    assert (tmp_path / "audit.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(read_audit_csv(tmp_path / "audit.csv").rows) == 5


def test_no_plot(tmp_path, capsys):
    code, _, _ = run(["evolve", *SMALL, "--steps", "2", "--no-plot",
                      "--output-dir", str(tmp_path)], capsys)
    assert code == EXIT_OK and not (tmp_path / "audit.png").exists()


def test_zero_steps_returns_input(tmp_path, capsys):
    code, _, _ = run(["evolve", *SMALL, "--steps", "0", "--output-dir", str(tmp_path)], capsys)
    assert code == EXIT_OK
    a = read_field(tmp_path / "field_000000.bin")
    b = read_field(tmp_path / "field_final.bin")
    assert np.array_equal(a.data, b.data)


def test_restart_from_dump_is_bit_exact(tmp_path, capsys):
    full, half = tmp_path / "full", tmp_path / "half"
    base = ["evolve", *SMALL, "--mass", "1.0", "--seed", "3"]
    assert run([*base, "--steps", "6", "--dump-every", "3", "--output-dir", str(full)],
               capsys)[0] == EXIT_OK
    assert run([*base, "--steps", "3", "--initial-dump", str(full / "field_000003.bin"),
                "--output-dir", str(half)], capsys)[0] == EXIT_OK
    a = read_field(full / "field_final.bin")
    b = read_field(half / "field_final.bin")
    assert np.array_equal(a.data, b.data)


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_theta": 16, "n_r": 12, "steps": 5, "mass": 0.5}))
    code, out, _ = run(["evolve", "--config", str(cfg), "--steps", "2",
                        "--output-dir", str(tmp_path / "o")], capsys)
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["steps"] == 2 and report["grid"]["n_theta"] == 16


def test_potential_table(tmp_path, capsys):
    table = tmp_path / "pot.csv"
    rows = ["j,h,A_t,A_r,A_theta"] + [f"{j},{h},0.0,0.0,{0.1 * j}" for j in range(12)
                                      for h in range(16)]
    table.write_text("\n".join(rows) + "\n")
    code, out, _ = run(["momentum-audit", *SMALL, "--steps", "20", "--potential-table", str(table),
                        "--output-dir", str(tmp_path / "o")], capsys)
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["axisymmetric"] and report["J_conserved"]


def test_momentum_audit_uniform_b(tmp_path, capsys):
    code, out, _ = run(["momentum-audit", *SMALL, "--steps", "30", "--potential", "uniform-b",
                        "--beta", "0.2", "--mass", "1", "--output-dir", str(tmp_path)], capsys)
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["J_drift"] < 1e-10 and report["max_even_mode_fraction"] < 1e-12


def test_momentum_audit_ripple_reports_drift(tmp_path, capsys):
    code, out, _ = run(["momentum-audit", *SMALL, "--steps", "30", "--potential",
                        "angular-ripple", "--output-dir", str(tmp_path)], capsys)
    assert code == EXIT_OK
    report = json.loads(out)
    assert not report["axisymmetric"] and report["J_drift"] > 1e-6


def test_momentum_audit_tolerance_failure(tmp_path, capsys):
    code, _, err = run(["momentum-audit", *SMALL, "--steps", "5", "--j-tolerance", "0",
                        "--output-dir", str(tmp_path)], capsys)
    assert code == EXIT_TOLERANCE
    assert json.loads(err)["error"] == "tolerance"


def test_convergence_small(tmp_path, capsys):
    code, out, _ = run(["convergence", "--n-theta-list", "32,64", "--output-dir",
                        str(tmp_path)], capsys)
    assert code == EXIT_OK
    report = json.loads(out)
    assert [r["n_theta"] for r in report["rows"]] == [32, 64]
    assert report["delta_strictly_decreasing"]
    lines = (tmp_path / "convergence.csv").read_text().splitlines()
    assert lines[0] == "# format: polarwalk.convergence/1 tau=2eps"
    assert lines[1] == "n_theta,eps,delta,fidelity_deviation,delta_other_tau"
    assert (tmp_path / "convergence.png").is_file()
    assert (tmp_path / "convergence_timing.csv").is_file()


def test_landau_check(tmp_path, capsys):
    code, out, _ = run(["landau-check", "--n-theta", "128", "--check-steps", "10",
                        "--output-dir", str(tmp_path)], capsys)
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["angular_momentum"] == pytest.approx(-5.5, abs=1e-10)
    assert all(report["checks"].values())


def test_geometry_verify(tmp_path, capsys):
    assert run(["geometry-verify", "--output-dir", str(tmp_path)], capsys)[0] == EXIT_OK
    code, _, err = run(["geometry-verify", "--inject-typo", "--output-dir", str(tmp_path)], capsys)
    assert code == EXIT_TOLERANCE
    assert "Gamma^r_thth" in json.loads(err)["message"]


@pytest.mark.parametrize(
    "args",
    [
        ["evolve", "--n-theta", "15"],
        ["evolve", "--r-min", "0.5"],
        ["landau-check", "--n", "0"],
        ["landau-check", "--n-theta", "64", "--r-max", "15"],
        ["evolve", *SMALL, "--initial-dump", "/nonexistent/field.bin"],
        ["evolve", *SMALL, "--potential", "uniform-b", "--beta", "-1"],
    ],
)
def test_config_errors(tmp_path, capsys, args):
    code, _, err = run([*args, "--output-dir", str(tmp_path)], capsys)
    assert code == EXIT_CONFIG
    assert json.loads(err)["exit_code"] == EXIT_CONFIG


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_thetas": 16}))
    assert run(["evolve", "--config", str(cfg)], capsys)[0] == EXIT_CONFIG
    cfg.write_text("{not json")
    assert run(["evolve", "--config", str(cfg)], capsys)[0] == EXIT_CONFIG


def test_bad_thread_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "many")
    code, _, _ = run(["convergence", "--n-theta-list", "32", "--output-dir", str(tmp_path)],
                     capsys)
    assert code == EXIT_CONFIG


def test_io_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(["evolve", *SMALL, "--steps", "1", "--output-dir", str(blocker)], capsys)
    assert code == EXIT_IO
    assert json.loads(err)["error"] == "io"


def test_run_config_round_trip():
    cfg = RunConfig(n_theta=16, n_r=12, steps=3)
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "polarwalk", "geometry-verify", "--output-dir", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["passed"]
