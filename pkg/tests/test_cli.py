"""Command-line interface tests.

Everything runs in-process through main() so exit codes and stderr text can
be asserted cheaply; one subprocess test checks the module entry point.
"""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sdfl.cli import main

CSV_HEADER = "round,worker,cluster,is_head,accuracy,loss"


def scenario(**overrides):
    raw = {
        "workers": 3,
        "num_clusters": 1,
        "rounds": 2,
        "epochs_per_round": 1,
        "optimizer": {"batch_size": 16},
        "contract": {
            "fixed_deposit": 100,
            "score_threshold": 20.0,
            "penalty_pct": 20,
            "top_k": 2,
            "reward_pool": 100,
        },
        "data": {
            "samples_per_worker": 40,
            "features": 4,
            "classes": 3,
            "validation_samples": 60,
        },
        "master_seed": 9,
    }
    raw.update(overrides)
    return raw


def write_config(tmp_path, name="scenario.json", **overrides):
    path = tmp_path / name
    path.write_text(json.dumps(scenario(**overrides)))
    return str(path)


def run_cli(*argv):
    return main(list(argv))


def test_run_writes_all_artifacts(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert run_cli("run", cfg, "--out-dir", str(out)) == 0
    for name in ("metrics.csv", "summary.json", "events.jsonl", "manifest.json"):
        assert (out / name).is_file(), name

    lines = (out / "metrics.csv").read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 3 * 2  # header + workers * rounds

    summary = json.loads((out / "summary.json").read_text())
    assert {r["round"] for r in summary["rounds"]} == {1, 2}
    assert "token_flows" in summary and "total_simulated_time" in summary

    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["files"]) == {"metrics.csv", "summary.json", "events.jsonl"}
    assert manifest["master_seed"] == 9


def test_metrics_agree_with_summary(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    run_cli("run", cfg, "--out-dir", str(out))
    by_round = {}
    with open(out / "metrics.csv") as fh:
        for row in csv.DictReader(fh):
            by_round.setdefault(int(row["round"]), []).append(float(row["accuracy"]))
            assert row["is_head"] in ("0", "1")
    summary = json.loads((out / "summary.json").read_text())
    for entry in summary["rounds"]:
        accs = by_round[entry["round"]]
        assert abs(entry["mean_accuracy"] - float(np.mean(accs))) < 1e-12
        assert abs(entry["std_accuracy"] - float(np.std(accs))) < 1e-12


def test_repeat_runs_are_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli("run", cfg, "--out-dir", str(a))
    run_cli("run", cfg, "--out-dir", str(b))
    for name in ("metrics.csv", "summary.json", "events.jsonl", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_seed_override_changes_results(tmp_path):
    cfg = write_config(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli("run", cfg, "--out-dir", str(a))
    assert run_cli("run", cfg, "--seed", "10", "--out-dir", str(b)) == 0
    assert (a / "metrics.csv").read_bytes() != (b / "metrics.csv").read_bytes()
    assert json.loads((b / "manifest.json").read_text())["master_seed"] == 10


def test_out_dir_falls_back_to_environment(tmp_path, monkeypatch):
    cfg = write_config(tmp_path)
    target = tmp_path / "from_env"
    monkeypatch.setenv("SDFL_OUT_DIR", str(target))
    assert run_cli("run", cfg) == 0
    assert (target / "metrics.csv").is_file()


def test_invalid_field_value_exits_2(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        contract={
            "fixed_deposit": 100,
            "score_threshold": 20.0,
            "penalty_pct": 150,
            "top_k": 2,
            "reward_pool": 100,
        },
    )
    assert run_cli("run", cfg, "--out-dir", str(tmp_path / "x")) == 2
    err = capsys.readouterr().err
    assert "contract.penalty_pct" in err


def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = write_config(tmp_path, typo_field=1)
    assert run_cli("run", cfg) == 2
    assert "typo_field" in capsys.readouterr().err


def test_missing_and_malformed_configs_exit_2(tmp_path, capsys):
    assert run_cli("run", str(tmp_path / "nope.json")) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert run_cli("run", str(bad)) == 2


def test_sweep_runs_each_value(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "sweep"
    assert run_cli("sweep", cfg, "--vary", "workers=3,4", "--out-dir", str(out)) == 0
    for sub in ("workers=3", "workers=4"):
        for name in ("metrics.csv", "summary.json", "events.jsonl", "manifest.json"):
            assert (out / sub / name).is_file()

    summary = json.loads((out / "sweep_summary.json").read_text())
    assert summary["field"] == "workers"
    assert [run["value"] for run in summary["runs"]] == [3, 4]
    for run in summary["runs"]:
        by_round = {}
        with open(out / run["directory"] / "metrics.csv") as fh:
            for row in csv.DictReader(fh):
                by_round.setdefault(int(row["round"]), []).append(float(row["accuracy"]))
        for entry in run["rounds"]:
            accs = by_round[entry["round"]]
            assert abs(entry["mean_accuracy"] - float(np.mean(accs))) < 1e-12
            assert abs(entry["std_accuracy"] - float(np.std(accs))) < 1e-12


def test_sweep_nested_field_and_single_value(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "sweep"
    code = run_cli("sweep", cfg, "--vary", "data.noniid_skew=0.5", "--out-dir", str(out))
    assert code == 0
    assert (out / "data.noniid_skew=0.5" / "metrics.csv").is_file()


def test_sweep_rejects_bad_specs(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert run_cli("sweep", cfg, "--vary", "workers=abc") == 2
    assert "not numeric" in capsys.readouterr().err
    assert run_cli("sweep", cfg, "--vary", "workers") == 2
    assert run_cli("sweep", cfg, "--vary", "contract.penalty_pct=150") == 2


def test_replay_accepts_untouched_log(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    run_cli("run", cfg, "--out-dir", str(out))
    assert run_cli("replay", str(out / "events.jsonl")) == 0
    assert "replay verified" in capsys.readouterr().out


def test_replay_flags_tampered_settlement(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    run_cli("run", cfg, "--out-dir", str(out))
    lines = (out / "events.jsonl").read_text().splitlines()
    doctored = []
    for line in lines:
        ev = json.loads(line)
        if ev["kind"] == "RoundSettled" and ev["payload"]["round"] == 1:
            ev["payload"]["report"]["requester_credit"] += 1
        doctored.append(json.dumps(ev, sort_keys=True))
    (out / "events.jsonl").write_text("\n".join(doctored) + "\n")
    assert run_cli("replay", str(out / "events.jsonl")) == 4
    assert "RoundSettled" in capsys.readouterr().err


def test_replay_flags_tampered_training_metrics(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    run_cli("run", cfg, "--out-dir", str(out))
    lines = (out / "events.jsonl").read_text().splitlines()
    doctored = []
    for line in lines:
        ev = json.loads(line)
        if ev["kind"] == "TrainComplete" and ev["payload"]["round"] == 1:
            ev["payload"]["accuracy"] += 1.0
        doctored.append(json.dumps(ev, sort_keys=True))
    (out / "events.jsonl").write_text("\n".join(doctored) + "\n")
    assert run_cli("replay", str(out / "events.jsonl")) == 4
    assert "metrics" in capsys.readouterr().err


def test_replay_rejects_empty_log(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    run_cli("run", cfg, "--out-dir", str(out))
    (out / "events.jsonl").write_text("")
    assert run_cli("replay", str(out / "events.jsonl")) == 2
    assert "empty" in capsys.readouterr().err


def test_replay_requires_manifest(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    run_cli("run", cfg, "--out-dir", str(out))
    (out / "manifest.json").unlink()
    assert run_cli("replay", str(out / "events.jsonl")) == 2

    run_cli("run", cfg, "--out-dir", str(out))
    (out / "manifest.json").write_text("{} invalid")
    assert run_cli("replay", str(out / "events.jsonl")) == 2

    run_cli("run", cfg, "--out-dir", str(out))
    (out / "manifest.json").write_text("{}")
    assert run_cli("replay", str(out / "events.jsonl")) == 2


def test_replay_rejects_malformed_event_lines(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    run_cli("run", cfg, "--out-dir", str(out))
    (out / "events.jsonl").write_text("this is not json\n")
    assert run_cli("replay", str(out / "events.jsonl")) == 2


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    proc = subprocess.run(
        [sys.executable, "-m", "sdfl", "run", cfg, "--out-dir", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "final mean accuracy" in proc.stdout
    assert (out / "manifest.json").is_file()
