import csv
import io
import json
import subprocess
import sys

import pytest

from qreg import cli, replica
from qreg.replica import CSV_HEADER, Phase


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr().out


def test_solve_ridge(capsys):
    code, out = run(["solve", "--scheme", "ridge", "--alpha", "2", "--sigma2", "1", "--lambda", "1e-6"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert out.splitlines()[0] == CSV_HEADER
    assert rows[0]["scheme"] == "ridge" and rows[0]["omega"] == ""
    assert float(rows[0]["E_g"]) == pytest.approx(1.0, abs=1e-3)


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"np": 3, "omega": 2.0, "alpha": 1.4, "lambda": 0.01, "sigma2": 1e-4}))
    _, a = run(["solve", "--config", str(cfg)], capsys)
    _, b = run(["solve", "--config", str(cfg), "--np", "4"], capsys)
    ra, rb = (next(csv.DictReader(io.StringIO(t))) for t in (a, b))
    assert (ra["n_p"], rb["n_p"], ra["omega"]) == ("3", "4", "2.0")


@pytest.mark.parametrize("content", ['{"np": "x"}', '{"unknown": 1}', "[1, 2]", "{not json"])
def test_invalid_config_exits_2(tmp_path, capsys, content):
    cfg = tmp_path / "bad.json"
    cfg.write_text(content)
    assert cli.main(["solve", "--config", str(cfg)]) == cli.EXIT_INVALID


def test_invalid_values_exit_2(capsys):
    assert cli.main(["solve", "--alpha", "-1"]) == cli.EXIT_INVALID
    assert cli.main(["solve", "--np", "0"]) == cli.EXIT_INVALID
    assert cli.main(["phase", "--scheme", "ridge"]) == cli.EXIT_INVALID
    assert cli.main(["solve", "--config", "/nonexistent/cfg.json"]) == cli.EXIT_INVALID


def test_strict_nonconvergence_exits_3(monkeypatch, capsys):
    real = replica.solve

    def starved(p, cb, **kw):
        kw["max_iter"] = 1
        return real(p, cb, **kw)

    monkeypatch.setattr(replica, "solve", starved)
    assert cli.main(["solve", "--np", "6", "--omega", "3"]) == 0
    assert cli.main(["solve", "--np", "6", "--omega", "3", "--strict"]) == cli.EXIT_NONCONVERGED


def test_out_file_matches_stdout(tmp_path, capsys):
    argv = ["sweep-omega", "--np-list", "2,6", "--omega-grid", "0.5,4,5", "--schemes", "uniform"]
    _, out = run(argv, capsys)
    path = tmp_path / "o.csv"
    assert cli.main(argv + ["--out", str(path)]) == 0
    assert path.read_text() == out
    assert len(out.splitlines()) == 1 + 2 * 5


def test_phase_subcommand(capsys):
    code, out = run(["phase", "--np-list", "1-3", "--omega-grid", "0.1,9,4", "--alpha", "1.5"], capsys)
    assert code == 0
    phases = [r["phase"] for r in csv.DictReader(io.StringIO(out))]
    assert len(phases) == 12 and set(phases) <= {p.value for p in Phase}


def test_sweep_alpha_and_bits(capsys):
    code, out = run(["sweep-alpha", "--alpha-grid", "0.8,1.2,0.1", "--omega-list", "4", "--np-list", "30",
                     "--sigma2", "1", "--lambda", "1e-6", "--schemes", "uniform"], capsys)
    assert code == 0 and len(out.splitlines()) == 1 + 2 * 5
    code, out = run(["sweep-bits", "--np-list", "1-3", "--omega", "2"], capsys)
    assert code == 0 and out.splitlines()[-1].startswith("ridge,")


def test_se_subcommand(capsys):
    code, out = run(["se", "--np", "6", "--omega", "3", "--alpha", "1.4", "--lambda", "0.01"], capsys)
    assert code == 0 and out.startswith("t,V,E,xi,Lambda\n")


def test_amp_and_trajectory(tmp_path, capsys):
    traj = tmp_path / "t.csv"
    code, out = run(["amp", "--N", "200", "--alpha", "1.4", "--np", "6", "--omega", "1.8", "--lambda", "0.01",
                     "--T-max", "20", "--trajectory", str(traj), "--seed", "3"], capsys)
    assert code == 0
    summary = json.loads(out)
    assert set(summary) == {"seed", "converged", "iterations", "gen_error"} and summary["seed"] == 3
    assert traj.read_text().startswith("t,V_mean,E_emp\n")


def test_amp_ensemble_and_oracle(capsys):
    code, out = run(["amp-ensemble", "--N", "100", "--runs", "3", "--T-max", "10", "--np", "6",
                     "--omega", "1.8", "--alpha", "1.4"], capsys)
    assert code == 0 and len(out.splitlines()) == 4
    code, out = run(["oracle", "--np", "2", "--omega", "1.07", "--alpha", "1.5", "--sigma2", "0.01",
                     "--lambda", "0.01"], capsys)
    res = json.loads(out)
    assert code == 0 and len(res["w_hat"]) == 6 and res["energy"] <= res["amp_energy"] + 1e-12


def test_module_entry_point_is_byte_identical(tmp_path):
    argv = [sys.executable, "-m", "qreg", "sweep-omega", "--np-list", "3", "--omega-grid", "0.5,5,4"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a.startswith(CSV_HEADER.encode())
