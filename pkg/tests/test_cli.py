from __future__ import annotations

import csv
import json
from importlib import resources

import numpy as np
import pytest

from aibvp.cli import fmt, main, parse_values, UsageError


def scenario_path(name):
    return str(resources.files("aibvp").joinpath(f"scenarios/{name}.json"))


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_config(tmp_path, raw):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw), encoding="utf-8")
    return str(path)


SMALL = {
    "model": "heat",
    "n_nodes": 9,
    "initial": {"f": "sin_pi", "g": [0.5, -0.25]},
    "times": {"t_end": 0.5, "n_steps": 50},
}


def test_fmt_round_trip():
    x = 0.1 + 0.2
    assert float(fmt(x)) == x
    assert fmt(True) == "true" and fmt(None) == ""


def test_parse_values():
    assert parse_values("0,1,4", "--k") == [0.0, 1.0, 4.0]
    assert parse_values("-1:1:0.5", "--c") == [-1.0, -0.5, 0.0, 0.5, 1.0]
    for bad in ("2:1:1", "0:1:0", "", "a,b", "1:2"):
        with pytest.raises(UsageError):
            parse_values(bad, "--c")


def test_solve_heat_boundary_constant(tmp_path):
    out = tmp_path / "run"
    assert main(["solve", "--config", write_config(tmp_path, SMALL), "--out", str(out)]) == 0
    header, rows = read_csv(out / "trajectory.csv")
    assert header == ["t"] + [f"u_{i}" for i in range(1, 8)] + ["v_1", "v_2"]
    assert len(rows) == 51
    data = np.array(rows, dtype=float)
    assert np.all(data[:, -2] == 0.5) and np.all(data[:, -1] == -0.25)
    report = json.loads((out / "report.json").read_text())
    assert report["integrated_residual"] >= 0 and report["seed"] == 42 and report["p"] == 7
    assert "integrated residual" in (out / "run.log").read_text()


def test_solve_ramp_final_trace(tmp_path):
    raw = dict(SMALL, initial={"f": "zero", "g": [0.0, 0.0]}, boundary_signal={"kind": "constant", "values": [1.0, 1.0]})
    raw["times"] = {"t_end": 0.5, "n_steps": 10}
    out = tmp_path / "ramp"
    assert main(["solve", "--config", write_config(tmp_path, raw), "--out", str(out)]) == 0
    _, rows = read_csv(out / "trajectory.csv")
    assert [float(v) for v in rows[-1][-2:]] == pytest.approx([0.5, 0.5], abs=1e-12)


def test_solve_deterministic(tmp_path, monkeypatch):
    cfg = scenario_path("dt_feedback")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    for name in ("trajectory.csv", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    monkeypatch.setenv("AIBVP_SEED", "5")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "c")]) == 0
    assert json.loads((tmp_path / "c" / "report.json").read_text())["seed"] == 5


def test_solve_malformed_config(tmp_path, capsys):
    out = tmp_path / "bad"
    assert main(["solve", "--config", write_config(tmp_path, dict(SMALL, extra=1)), "--out", str(out)]) == 2
    assert not out.exists()
    assert "extra" in capsys.readouterr().err


def test_solve_io_failure(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["solve", "--config", write_config(tmp_path, SMALL), "--out", str(blocker / "sub")]) == 3


def test_verify_identities(tmp_path):
    assert main(["verify", "--suite", "identities", "--n", "9", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["pass"] and doc["reports"][0]["checks"]["dirichlet_identity"]["pass"]
    for entry in doc["reports"][0]["checks"].values():
        assert set(entry) >= {"residual", "tolerance", "pass"} and "wall_time" not in entry


def test_verify_forced_failure(tmp_path):
    assert main(["verify", "--suite", "identities", "--n", "9", "--tol", "0", "--out", str(tmp_path)]) == 1


def test_verify_bad_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "unknown"])
    assert exc.value.code == 2
    assert main(["verify", "--suite", "identities", "--tol-scale", "-1"]) == 2


def test_verify_stdout(capsys):
    assert main(["verify", "--suite", "identities", "--model", "diffusion_transport", "--n", "9"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["reports"][0]["suite"] == "identities:diffusion_transport"


def test_convergence_command(tmp_path):
    assert main(["convergence", "--model", "heat", "--levels", "3", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "convergence.csv")
    assert header == ["h", "error", "observed_order"]
    assert rows[0][2] == "" and 1.8 <= float(rows[-1][2]) <= 2.2


def test_convergence_bad_flags(tmp_path):
    assert main(["convergence", "--model", "heat", "--levels", "1", "--out", str(tmp_path)]) == 2
    assert main(["convergence", "--model", "heat", "--levels", "3", "--scenario", "dirichlet_map", "--out", str(tmp_path)]) == 2


def test_convergence_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["convergence", "--model", "heat", "--levels", "3", "--out", str(blocker / "x")]) == 3


def test_sweep_single_cell(tmp_path):
    assert main(["sweep", "--k", "0", "--c=-3", "--d=-3", "--n", "65", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "sweep.csv")
    assert header == ["k", "c", "d", "sbound_generator", "sbound_B0", "positivity", "agreement"]
    (row,) = rows
    assert float(row[3]) < 0 and float(row[4]) == pytest.approx(-3.0)
    assert row[5:] == ["true", "true"]


def test_sweep_empty_range(tmp_path):
    assert main(["sweep", "--c", "2:1:1", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "--k=-1", "--out", str(tmp_path)]) == 2
    assert not (tmp_path / "sweep.csv").exists()
