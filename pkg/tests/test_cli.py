import json
import subprocess
import sys

import pytest
import yaml

from tendonwalk.cli import main

SMALL = {
    "babble_duration_s": 15.0,
    "tracking_duration_s": 8.0,
    "seeds": [1, 2],
    "trials": 2,
}


@pytest.fixture(scope="module")
def cfg_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "small.yaml"
    path.write_text(yaml.safe_dump(SMALL))
    return str(path)


def test_pipeline_stage_chain(cfg_file, tmp_path):
    out = tmp_path / "stage"
    assert main(["babble", "--config", cfg_file, "--seed", "1",
                 "--kind", "natural", "--out", str(out)]) == 0
    assert main(["rollout", "--config", cfg_file,
                 "--left", str(out / "babble_left.csv"),
                 "--right", str(out / "babble_right.csv"),
                 "--out", str(out / "log.csv")]) == 0
    assert main(["train", "--config", cfg_file, "--seed", "1",
                 "--log", str(out / "log.csv"),
                 "--left", str(out / "babble_left.csv"),
                 "--right", str(out / "babble_right.csv"),
                 "--out", str(out)]) == 0
    assert main(["track", "--config", cfg_file, "--seed", "1", "--condition", "3",
                 "--net-left", str(out / "net_left.json"),
                 "--net-right", str(out / "net_right.json"),
                 "--out", str(out / "track")]) == 0
    assert (out / "track" / "displacement.csv").exists()


def test_trial_and_analyze_and_report(cfg_file, tmp_path):
    tdir = tmp_path / "trial"
    assert main(["trial", "--config", cfg_file, "--seed", "2",
                 "--kind", "naive", "--condition", "2", "--out", str(tdir)]) == 0
    assert main(["analyze", "--config", cfg_file, "--trial-dir", str(tdir)]) == 0


def test_experiment_subcommand(cfg_file, tmp_path):
    out = tmp_path / "run"
    assert main(["experiment", "--config", cfg_file, "--out", str(out)]) == 0
    assert (out / "summary.csv").exists()
    assert main(["report", "--run-dir", str(out)]) == 0


def test_error_record_on_failure(capsys):
    rc = main(["rollout", "--left", "/no/such.csv", "--right", "/no/such.csv",
               "--out", "/tmp/x.csv"])
    assert rc == 1
    err = capsys.readouterr().err.strip()
    record = json.loads(err)
    assert record["error"] == "FileNotFoundError"


def test_console_script_installed():
    proc = subprocess.run([sys.executable, "-m", "tendonwalk.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "babble" in proc.stdout and "experiment" in proc.stdout
