import json
import subprocess
import sys
from pathlib import Path

import pytest

from dmnls.cli import main, rerun_manifest
from dmnls.io import read_results, table_bytes

ROOT = Path(__file__).resolve().parents[1]
KERR = ROOT / "demos" / "kerr.cfg"
FAST = ["--set", "grid.L=25", "--set", "grid.N=256", "--set", "study.M=0.5", "--epsilons", "0.2,0.1,0.05"]


def test_no_args_is_usage_error(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [["bogus"], ["converge", "--bogus"], ["--format", "xml", "average"],
                                  ["--seed", "x", "average"]])
def test_usage_errors(argv, capsys, tmp_path):
    assert main(argv + ["--out-dir", str(tmp_path)]) == 1
    assert "usage" in capsys.readouterr().err


def test_validation_error_exit_1(tmp_path, capsys):
    assert main(["average", "--out-dir", str(tmp_path), "--set", "physics.alpha=-1"]) == 1
    assert "physics.alpha" in capsys.readouterr().err
    assert main(["average", "--out-dir", str(tmp_path), "--config", str(tmp_path / "none.cfg")]) == 1


def test_resolution_failure_exit_2(tmp_path, capsys):
    argv = ["average", "--out-dir", str(tmp_path), "--set", "physics.width=0.05"]
    assert main(argv) == 2
    assert "resolved" in capsys.readouterr().err


def test_blowup_exit_2(tmp_path):
    argv = ["average", "--out-dir", str(tmp_path), "--set", "physics.alpha=6", "--set", "physics.amplitude=2",
            "--set", "stepper.h1_cap_factor=10"] + FAST
    assert main(argv) == 2


def test_converge_outputs(tmp_path):
    assert main(["converge", "--config", str(KERR), "--out-dir", str(tmp_path), "--plot", "--no-timings"] + FAST) == 0
    table = read_results(tmp_path / "convergence.csv")
    assert table.columns == ["epsilon", "sup_h1_error", "sup_l2_error", "mass_drift", "wall_time_seconds"]
    assert len(table.rows) == 3
    manifest = json.loads((tmp_path / "convergence.manifest.json").read_text())
    assert manifest["config"]["grid.N"] == "256" and "order" in manifest["extra"]
    assert (tmp_path / "convergence.svg").exists()
    # re-running from the manifest reproduces the table
    again = rerun_manifest(tmp_path / "convergence.manifest.json")
    assert table_bytes(again, "csv") == (tmp_path / "convergence.csv").read_bytes()


def test_converge_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert main(["converge", "--out-dir", str(tmp_path / d), "--no-timings", "--seed", "4"] + FAST) == 0
    assert (tmp_path / "a" / "convergence.csv").read_bytes() == (tmp_path / "b" / "convergence.csv").read_bytes()


def test_out_dir_env_and_flag(tmp_path, monkeypatch):
    monkeypatch.setenv("DMNLS_OUT_DIR", str(tmp_path / "env"))
    assert main(["average"] + FAST) == 0
    assert (tmp_path / "env" / "average.csv").exists()
    assert main(["average", "--out-dir", str(tmp_path / "flag")] + FAST) == 0
    assert (tmp_path / "flag" / "average.csv").exists()


def test_simulate_and_average_tables(tmp_path):
    assert main(["simulate", "--epsilon", "0.1", "--out-dir", str(tmp_path), "--format", "json"] + FAST) == 0
    t = read_results(tmp_path / "simulate_eps0.1.json")
    assert t.columns == ["time", "mass", "h1_norm", "averaged_energy", "boundary_amplitude"]
    assert t.provenance["subcommand"] == "simulate"
    mass = t.column("mass")
    assert max(abs(m / mass[0] - 1) for m in mass) < 1e-9
    assert main(["--format", "json", "average", "--out-dir", str(tmp_path)] + FAST) == 0


def test_residual_table(tmp_path):
    assert main(["residual", "--out-dir", str(tmp_path)] + FAST) == 0
    t = read_results(tmp_path / "residual.csv")
    assert t.columns == ["epsilon", "residual", "ratio_to_previous"]
    assert t.rows[0][2] is None and all(0.3 < r[2] < 0.7 for r in t.rows[1:])


def test_plot_subcommand(tmp_path):
    assert main(["converge", "--out-dir", str(tmp_path)] + FAST) == 0
    assert main(["plot", str(tmp_path / "convergence.csv"), "--out", str(tmp_path / "c.svg")]) == 0
    assert (tmp_path / "c.svg").read_text().lstrip().startswith("<?xml")
    assert main(["plot", str(tmp_path / "convergence.csv"), "--y", "nope"]) == 1


@pytest.mark.slow
def test_verify_deterministic(tmp_path):
    outs = []
    for d in ("a", "b"):
        proc = subprocess.run([sys.executable, "-m", "dmnls", "verify", "--seed", "42", "--set", "study.trials=100",
                               "--out-dir", str(tmp_path / d)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(proc.stdout.replace(str(tmp_path / d), ""))
    assert outs[0] == outs[1]
    assert (tmp_path / "a" / "verify.csv").read_bytes() == (tmp_path / "b" / "verify.csv").read_bytes()
    assert "passed" in outs[0]
