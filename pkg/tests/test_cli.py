import json

import pytest

from edabench.cli import main
from edabench.graphs import load_instance


def test_bound_prints_value(capsys):
    code = main(["bound", "--p", "1", "--U", "2", "--b", "1", "--mu-tilde", "10", "--T", "10"])
    assert code == 0
    assert capsys.readouterr().out.strip() == "333.333333333"


def test_bound_rejects_bad_probability(capsys):
    code = main(["bound", "--p", "0.5", "--U", "2", "--b", "1", "--mu-tilde", "1", "--T", "1"])
    assert code == 1
    assert "invalid input" in capsys.readouterr().err


def test_recommend_b(capsys):
    code = main(["recommend-b", "--kernel", "pbil", "--eta", "0.1", "--rho", "1",
                 "--variant", "aggressive"])
    assert code == 0
    assert capsys.readouterr().out.strip() == "9.6"


def test_recommend_b_conservative_cga(capsys):
    code = main(["recommend-b", "--kernel", "cga", "--n", "100", "--variant", "conservative"])
    assert code == 0
    assert capsys.readouterr().out.strip().startswith("0.21714")


def test_gen_instance_round_trip(tmp_path, capsys):
    out = tmp_path / "inst.txt"
    code = main(["gen-instance", "--n", "12", "--cross-density", "0.8", "--seed", "7",
                 "--out", str(out)])
    assert code == 0
    instance = load_instance(out)
    assert instance.graph.n_nodes == 12


def test_unknown_subcommand_exits_nonzero():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code != 0


def test_run_writes_csv(tmp_path, capsys):
    config = {
        "objective": {"name": "onemax", "n": 15},
        "algorithm": {"kind": "smart-restart", "kernel": "cga", "budget_factor": 16},
        "repetitions": 3,
        "base_seed": 7,
        "eval_cap": None,
        "output": str(tmp_path / "om"),
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    assert main(["run", "--config", str(path)]) == 0
    runs = (tmp_path / "om.runs.csv").read_text().splitlines()
    summary = (tmp_path / "om.summary.csv").read_text().splitlines()
    assert runs[0] == "axis,seed,success,evaluations,generations"
    assert summary[0] == "axis,median,q1,q3,successes,censored"
    assert len(runs) == 4
    assert len(summary) == 2


def test_sweep_writes_summary_per_axis_value(tmp_path):
    config = {
        "objective": {"name": "onemax", "n": 12},
        "algorithm": {"kind": "cga", "mu": 2},
        "repetitions": 2,
        "base_seed": 3,
        "eval_cap": 30000,
        "output": str(tmp_path / "sweep"),
        "sweep": {"parameter": "mu", "values": [4, 8, 16]},
    }
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(config))
    assert main(["sweep", "--config", str(path)]) == 0
    summary = (tmp_path / "sweep.summary.csv").read_text().splitlines()
    assert len(summary) == 4


def test_malformed_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["run", "--config", str(path)]) == 1
    assert "config error" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == 1
    assert "config error" in capsys.readouterr().err


def test_invalid_config_contents(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"objective": {"name": "onemax", "n": 5}}))
    assert main(["run", "--config", str(path)]) == 1
    assert "config error" in capsys.readouterr().err


def test_unwritable_output(tmp_path, capsys):
    config = {
        "objective": {"name": "onemax", "n": 8},
        "algorithm": {"kind": "cga", "mu": 4},
        "repetitions": 1,
        "eval_cap": 1000,
        "output": "/dev/null/nested/out",
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    assert main(["run", "--config", str(path)]) == 1
    assert "output error" in capsys.readouterr().err


def test_missing_output_is_config_error(tmp_path, capsys):
    config = {
        "objective": {"name": "onemax", "n": 8},
        "algorithm": {"kind": "cga", "mu": 4},
        "repetitions": 1,
        "eval_cap": 1000,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(config))
    assert main(["run", "--config", str(path)]) == 1
    assert "config error" in capsys.readouterr().err
