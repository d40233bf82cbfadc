import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from levylab import cli, runner

GOLDEN = Path(__file__).parent / "golden"


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_constants_json_matches_golden_keys(capsys):
    code, out, _ = run_cli(capsys, "constants", "--dim", "2", "--alpha", "0.5")
    assert code == 0
    data = json.loads(out)
    assert list(data) == json.loads((GOLDEN / "constants_keys.json").read_text())
    assert data["C"] == pytest.approx(1 / (2 * math.pi))
    assert data["identity_residual"] < 1e-10


def test_multipliers_csv_header(capsys):
    code, out, _ = run_cli(capsys, "multipliers", "--alpha", "0.5", "--lmax", "6", "--quad-nodes", "400")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == (GOLDEN / "multipliers_header.csv").read_text().strip()
    assert len(lines) == 8
    assert lines[1].split(",")[:2] == ["0", "0.0"]


def test_simulate_csv_header(capsys):
    code, out, _ = run_cli(capsys, "--format", "csv", "simulate", "--manifold", "ball", "--eps", "1", "--samples", "150", "--delta", "0.05")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == (GOLDEN / "trajectories_header.csv").read_text().strip()
    assert len(lines) == 151


def test_solve_outputs_key_sets(capsys, tmp_path):
    dump = tmp_path / "u.bin"
    code, out, _ = run_cli(capsys, "solve-torus", "--grid", "64", "--eps", "0.1", "--dump", str(dump))
    assert code == 0
    assert list(json.loads(out)) == json.loads((GOLDEN / "solve_torus_keys.json").read_text())
    assert dump.read_bytes()[:4] == b"LVYT"
    code, out, _ = run_cli(capsys, "solve-sphere", "--degree", "60", "--eps", "0.3", "--quad-nodes", "500")
    assert code == 0
    assert list(json.loads(out)) == json.loads((GOLDEN / "solve_sphere_keys.json").read_text())
    code, out, _ = run_cli(capsys, "ball-check", "--dim", "2", "--alpha", "0.25")
    assert set(json.loads(out)) == {"max_residual", "center_residual", "points"}


def test_exit_codes(capsys, tmp_path):
    assert run_cli(capsys, "constants", "--alpha", "1.5")[0] == 2
    assert run_cli(capsys, "sweep", "--eps-list", "0.1,0.2")[0] == 2
    assert run_cli(capsys, "--format", "csv", "constants")[0] == 2
    assert run_cli(capsys, "fit", "--input", str(tmp_path / "missing.json"))[0] == 2
    assert run_cli(capsys, "solve-torus", "--grid", "64", "--eps", "0.01")[0] == 2


def test_numerical_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(runner, "TORUS_RESIDUAL_TOL", 0.0)
    code, _, err = run_cli(capsys, "solve-torus", "--grid", "32", "--eps", "0.2")
    assert code == 3
    assert "numerical failure" in err


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"dim": 3, "alpha": 0.5}}))
    _, out, _ = run_cli(capsys, "--config", str(cfg), "constants")
    assert json.loads(out)["c"] == pytest.approx(1 / math.pi**2)
    _, out, _ = run_cli(capsys, "--config", str(cfg), "constants", "--dim", "2")
    assert json.loads(out)["c"] == pytest.approx(0.25)


def test_sweep_and_fit(capsys, tmp_path):
    out_path = tmp_path / "sweep.json"
    code, _, _ = run_cli(capsys, "--out", str(out_path), "sweep", "--grid", "64", "--eps-list", "0.3,0.2,0.1")
    assert code == 0
    rec = json.loads(out_path.read_text())
    eps = [p[0] for p in rec["outputs"]["points"]]
    assert eps == [0.3, 0.2, 0.1]
    assert sorted(p.name for p in (tmp_path / "sweep.json.d").iterdir()) == ["point_000.json", "point_001.json", "point_002.json"]
    code, out, _ = run_cli(capsys, "fit", "--input", str(out_path))
    assert code == 0
    assert json.loads(out)["slope"] == pytest.approx(rec["outputs"]["fit"]["slope"])
    csvp = tmp_path / "pts.csv"
    csvp.write_text("eps,value\n0.1,70\n0.2,35\n0.4,17.5\n")
    _, out, _ = run_cli(capsys, "fit", "--input", str(csvp))
    assert json.loads(out)["slope"] == pytest.approx(-1.0)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "levylab", "constants", "--dim", "2", "--alpha", "0.25"], capture_output=True, text=True, check=True)
    assert json.loads(r.stdout)["C"] == pytest.approx(0.083243, rel=2e-5)


def test_global_flags_after_command(capsys, tmp_path):
    out = tmp_path / "c.json"
    code, _, _ = run_cli(capsys, "--seed", "5", "constants", "--dim", "3", "--alpha", "0.5", "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text())["c"] == pytest.approx(1 / math.pi**2, rel=1e-12)
    # a value given before the command is not reset by the subcommand defaults
    code, text, _ = run_cli(capsys, "--format", "csv", "simulate", "--manifold", "torus", "--dim", "2", "--eps", "0.2", "--samples", "100")
    assert code == 0 and text.splitlines()[0] == "idx,tau,censored,n_jumps"
