"""Command-line interface tests."""

import json

from acool.cli import main


def test_run_prints_valid_json(capsys):
    code = main(["run", "--n", "4", "--t", "1", "--len", "64", "--seed", "7"])
    out = capsys.readouterr().out
    report = json.loads(out)
    assert code == 0
    assert report["reason"] == "ok"
    outputs = set(v["output"] for v in report["outputs"].values())
    assert len(outputs) == 1


def test_run_scenario_split_input(capsys):
    code = main(["run", "--scenario", "split-input", "--n", "7", "--t", "2",
                 "--len", "64", "--abba", "coin"])
    report = json.loads(capsys.readouterr().out)
    assert code == 0 and report["reason"] == "ok"


def test_run_resilience_violation_exits_1(capsys):
    code = main(["run", "--n", "3", "--t", "1"])
    err = capsys.readouterr().err
    assert code == 1 and "3t+1" in err


def test_bad_flag_exits_1(capsys):
    assert main(["run", "--no-such-flag"]) == 1


def test_liveness_failure_exits_3(capsys):
    code = main(["run", "--scenario", "split-input", "--n", "4", "--t", "1",
                 "--len", "64", "--abba", "coin", "--legacy-cool",
                 "--event-cap", "20000"])
    assert code == 3


def test_out_writes_report_log_and_csv(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["run", "--n", "4", "--t", "1", "--len", "64",
                 "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["reason"] == "ok"
    log_lines = (tmp_path / "report.json.ndjson").read_text().splitlines()
    assert log_lines and all(
        set(json.loads(l)) == {"step", "from", "to", "tag", "bits", "round"}
        for l in log_lines)
    header, row = (tmp_path / "report.json.csv").read_text().splitlines()
    assert header.startswith("protocol,n,t") and row.startswith("acool,4,1")


def test_env_override(monkeypatch, capsys):
    monkeypatch.setenv("ACOOL_SEED", "9")
    code = main(["run", "--n", "4", "--t", "1", "--len", "64"])
    report = json.loads(capsys.readouterr().out)
    assert code == 0 and report["config"]["seed"] == 9


def test_scenario_list(capsys):
    assert main(["scenario-list"]) == 0
    assert "split-input" in capsys.readouterr().out


def test_sweep_emits_csv(capsys):
    code = main(["sweep", "--n-list", "4,7", "--len", "256", "--seeds", "1"])
    out = capsys.readouterr().out.splitlines()
    assert code == 0
    assert out[0].startswith("n,t,mean_bits")
    assert len(out) == 3


def test_auto_protocol_selects_committee_at_ratio(capsys):
    code = main(["run", "--protocol", "auto", "--n", "10", "--t", "1",
                 "--len", "64"])
    report = json.loads(capsys.readouterr().out)
    assert code == 0 and report["config"]["protocol"] == "small_t"
    code = main(["run", "--protocol", "auto", "--n", "7", "--t", "2",
                 "--len", "64"])
    report = json.loads(capsys.readouterr().out)
    assert code == 0 and report["config"]["protocol"] == "acool"


def test_unbalanced_rbc_flag(capsys):
    code = main(["run", "--protocol", "rbc", "--n", "7", "--t", "2",
                 "--len", "64", "--unbalanced"])
    report = json.loads(capsys.readouterr().out)
    assert code == 0
    assert report["metrics"]["bits_by_tag"].get("LEADERMESSAGE", 0) > 0
