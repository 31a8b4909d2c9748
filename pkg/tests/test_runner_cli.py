import json
import subprocess
import sys

import numpy as np
import pytest

from trustregion import FiniteGame, MvaSolution, TrustInterval
from trustregion.cli import main
from trustregion.runner import (ConfigError, ExperimentConfig, csv_text, format_cell,
                                parse_alphas)

from instances import LO_075, tiny_binary_game_dict


def write_config(tmp_path, doc, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return str(p)


def run(tmp_path, doc, command="solve", out="out", extra=()):
    cfg = write_config(tmp_path, doc)
    code = main([command, "--config", cfg, "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


TRUST = {"task": "binary-trust", "utility": "quadratic", "tau": "uniform", "alpha": "0.75"}


def test_binary_trust_row_matches_golden(tmp_path, capsys):
    code, out = run(tmp_path, TRUST)
    assert code == 0
    raw = (out / "binary_trust.csv").read_bytes()
    assert b"\r" not in raw
    header, row = raw.decode().splitlines()
    assert header == "alpha,lo,hi,cutoff"
    assert row == "0.75,%.6g,%.6g,0.5" % (LO_075, 1 - LO_075)
    assert "binary-trust alpha=0.75" in capsys.readouterr().out


def test_json_artifacts_round_trip(tmp_path):
    _, out = run(tmp_path, TRUST)
    doc = json.loads((out / "binary_trust.json").read_text())
    assert doc["schema_version"] == "1"
    sol = TrustInterval.from_dict(doc["solutions"][0])
    assert TrustInterval.from_dict(json.loads(json.dumps(sol.to_dict()))) == sol
    assert sol.lo == pytest.approx(LO_075, abs=1e-9)
    assert json.loads((out / "transport_map.json").read_text())["schema_version"] == "1"


def test_sweep_over_decimal_range_is_monotone(tmp_path):
    doc = {"task": "sweep", "target": "binary-trust", "utility": "quadratic",
           "alphas": {"start": "0.5", "stop": "1.0", "step": "0.1"}}
    code, out = run(tmp_path, doc, command="sweep")
    assert code == 0
    table = np.loadtxt(out / "sweep_binary_trust.csv", delimiter=",", skiprows=1)
    assert table[:, 0].tolist() == [0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    assert np.all(np.diff(table[:, 1]) < 0) and np.all(np.diff(table[:, 2]) > 0)


def test_sweep_command_accepts_a_sweepable_task(tmp_path):
    doc = {"task": "spherical", "instance": {"center": [0.5, 0.5], "r0": 0.3},
           "alphas": ["0.6", "0.9"]}
    code, out = run(tmp_path, doc, command="sweep")
    assert code == 0 and (out / "sweep_spherical.csv").is_file()


def test_parallel_sweep_is_byte_identical(tmp_path):
    doc = {"task": "binary-trust", "utility": "log-score", "alphas": ["0.6", "0.7", "0.8"]}
    run(tmp_path, doc, out="serial")
    run(tmp_path, doc, out="parallel", extra=("--jobs", "2"))
    run(tmp_path, doc, out="again")
    serial = (tmp_path / "serial" / "binary_trust.csv").read_bytes()
    assert (tmp_path / "parallel" / "binary_trust.csv").read_bytes() == serial
    assert (tmp_path / "again" / "binary_trust.csv").read_bytes() == serial


def test_mva_from_identity_csv(tmp_path):
    (tmp_path / "eye.csv").write_text("1,0,0\n0,1,0\n0,0,1\n")
    code, out = run(tmp_path, {"task": "mva", "matrix_csv": "eye.csv",
                               "random_audit": {"count": 20}}, extra=("--seed", "7"))
    assert code == 0
    doc = json.loads((out / "mva.json").read_text())
    assert MvaSolution.from_dict(doc["solution"]).alpha_star == pytest.approx(1 / 3, abs=1e-9)
    audit = (out / "mva_audit.csv").read_text().splitlines()
    assert len(audit) == 21 and all(line.endswith("true") for line in audit[1:])


def test_binary_action_and_oracle_tasks(tmp_path):
    code, out = run(tmp_path, {"task": "binary-action",
                               "distribution": {"atoms": [["-1", "0.5"], ["2", "0.5"]]},
                               "alphas": ["0.5", "0.9"]}, out="action")
    assert code == 0
    rows = (out / "binary_action.csv").read_text().splitlines()
    assert rows[1].split(",")[1:3] == ["0.666667", "no-trust"]
    assert rows[2].split(",")[2] == "full-trust"

    (tmp_path / "game.json").write_text(json.dumps(tiny_binary_game_dict()))
    code, out = run(tmp_path, {"task": "oracle", "game": "game.json", "alphas": [0.3, 0.8]},
                    command="oracle", out="oracle")
    assert code == 0
    table = np.loadtxt(out / "oracle.csv", delimiter=",", skiprows=1)
    assert table.shape == (2, 6) and np.all(table[:, 4:] <= 1e-8)


def test_fresh_bundle_verifies(tmp_path, capsys):
    _, out = run(tmp_path, TRUST)
    run(tmp_path, {"task": "mva", "matrix": [[0.8, 0.2], [0.3, 0.7]]}, out="out")
    capsys.readouterr()
    assert main(["verify", "--out", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)
    assert any("margin=" in line for line in lines)


def test_corrupted_hi_fails_verification(tmp_path, capsys):
    _, out = run(tmp_path, TRUST)
    path = out / "binary_trust.json"
    doc = json.loads(path.read_text())
    doc["solutions"][0]["hi"] += 0.05
    path.write_text(json.dumps(doc))
    capsys.readouterr()
    assert main(["verify", "--out", str(out)]) == 1
    fails = [l for l in capsys.readouterr().out.splitlines() if l.startswith("FAIL")]
    consistency = [l for l in fails if "posterior consistency" in l]
    assert consistency
    assert max(float(l.rsplit("margin=", 1)[1]) for l in consistency) > 0.01


def test_empty_bundle_is_invalid(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["verify", "--out", str(tmp_path / "empty")]) == 2
    assert main(["verify", "--out", str(tmp_path / "missing")]) == 2


@pytest.mark.parametrize("doc, field", [
    ({"task": "nonsense"}, "config.task"),
    ({"task": "binary-trust", "alpha": 1.5}, "config.alpha"),
    ({"task": "binary-trust", "alpha": 0.7, "utility": "cubic"}, "config.utility"),
    ({"task": "mva", "matrix_csv": "nowhere.csv"}, "config.matrix_csv"),
    ({"task": "binary-action", "alpha": 0.7,
      "distribution": {"atoms": [[1, 0.5], [2, 0.5]]}}, "genericity"),
    ({"task": "oracle", "game": "nowhere.json"}, "config.game"),
])
def test_invalid_configs_exit_two_naming_the_field(tmp_path, capsys, doc, field):
    code, _ = run(tmp_path, doc)
    assert code == 2
    assert field in capsys.readouterr().err


def test_missing_config_file_exits_two(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "none.json")]) == 2


def test_solver_failure_exits_three(tmp_path, capsys):
    code, _ = run(tmp_path, TRUST, extra=("--tolerance", "1e-30"))
    assert code == 3
    assert "solver error" in capsys.readouterr().err


def test_decimal_ranges_include_the_stop_value():
    assert parse_alphas({"alphas": {"start": "0.1", "stop": "0.3", "step": "0.1"}}) == [0.1, 0.2, 0.3]
    with pytest.raises(ConfigError, match="config.alphas.step"):
        parse_alphas({"alphas": {"start": "0.1", "stop": "0.3", "step": "0"}})


def test_csv_formatting():
    assert format_cell(0.3603796100280512) == "0.36038"
    assert format_cell(True) == "true" and format_cell(3) == "3"
    assert csv_text(["a", "b"], [(1.0, "x")]) == "a,b\n1,x\n"


def test_config_rejects_non_integer_seed():
    with pytest.raises(ConfigError, match="config.seed"):
        ExperimentConfig.from_dict({**TRUST, "seed": "abc"})


def test_console_script_help_documents_csv_columns():
    out = subprocess.run([sys.executable, "-m", "trustregion.cli", "solve", "--help"],
                         capture_output=True, text=True, check=True).stdout
    assert "alpha,lo,hi,cutoff" in out and "--tolerance" in out


def test_log_level_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("TRUST_REGION_LOG", "debug")
    code, _ = run(tmp_path, TRUST)
    assert code == 0


def test_oracle_game_file_round_trip(tmp_path):
    game = FiniteGame.from_dict(tiny_binary_game_dict())
    game.save(tmp_path / "g.json")
    assert FiniteGame.load(tmp_path / "g.json") == game
