import json
from pathlib import Path

import numpy as np
import pytest

from tendonwalk.config import ExperimentConfig
from tendonwalk.harness import (
    analyze_trial,
    dfa_comparisons,
    group_stats,
    prepare_trial,
    regenerate_report,
    run_experiment,
    run_trial,
)
from tendonwalk.io import read_json

# short-duration config: trial mechanics only, not the acceptance trends
SMALL = {
    "babble_duration_s": 20.0,
    "tracking_duration_s": 10.0,
    "seeds": [1, 2],
    "trials": 2,
}


@pytest.fixture(scope="module")
def small_cfg():
    return ExperimentConfig(SMALL)


@pytest.fixture(scope="module")
def small_run(small_cfg, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    result = run_experiment(small_cfg, out)
    return out, result


class TestRunTrial:
    def test_artifacts_complete(self, small_cfg, tmp_path):
        rec = run_trial(small_cfg, 1, "natural", 1, tmp_path / "t")
        names = {p.name for p in (tmp_path / "t").iterdir()}
        expected = {
            "babble_left.csv", "babble_right.csv", "babble_log.csv",
            "net_left.json", "net_right.json", "desired_trajectory.csv",
            "tracking_log.csv", "displacement.csv", "commands_left.csv",
            "commands_right.csv", "stats.json", "spread.json", "dfa.json",
            "manifest.json",
        }
        assert expected <= names
        assert rec["error"] is None
        # condition 1 is in the air: displacement identically zero
        assert rec["displacement_m"] == 0.0

    def test_config_hash_in_headers(self, small_cfg, tmp_path):
        run_trial(small_cfg, 1, "naive", 1, tmp_path / "t")
        for name in ("babble_left.csv", "tracking_log.csv", "displacement.csv"):
            first = (tmp_path / "t" / name).read_text().splitlines()[0]
            assert first == f"# config_hash={small_cfg.hash()}"
        doc = read_json(tmp_path / "t" / "stats.json")
        assert doc["config_hash"] == small_cfg.hash()

    def test_rerun_byte_identical(self, small_cfg, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run_trial(small_cfg, 2, "natural", 2, a)
        run_trial(small_cfg, 2, "natural", 2, b)
        for fa in sorted(a.iterdir()):
            assert fa.read_bytes() == (b / fa.name).read_bytes(), fa.name


class TestRunExperiment:
    def test_record_combinatorics(self, small_run):
        _, result = small_run
        records = result["records"]
        assert len(records) == 2 * 3 * 2  # kinds x conditions x trials
        keys = {(r["kind"], r["condition"], r["seed"]) for r in records}
        assert len(keys) == len(records)

    def test_summary_files_written(self, small_run):
        out, _ = small_run
        for name in ("summary.csv", "group_summary.csv", "dfa_tests.json",
                     "report.txt", "manifest.json", "config.yaml"):
            assert (out / name).exists(), name

    def test_success_rate_arithmetic(self, small_run):
        _, result = small_run
        for g in group_stats(result["records"]):
            assert g["success_rate"] == g["n_success"] / g["n_trials"]

    def test_trial_uses_own_babbling(self, small_run):
        # each trial dir records its own (kind, seed) net provenance
        out, _ = small_run
        for tdir in (out / "trials").iterdir():
            man = read_json(tdir / "manifest.json")
            net = read_json(tdir / "net_left.json")
            assert net["extra"]["kind"] == man["kind"]
            assert net["extra"]["trial_seed"] == man["seed"]

    def test_report_regeneration_idempotent(self, small_run):
        out, _ = small_run
        before = {n: (out / n).read_bytes()
                  for n in ("summary.csv", "group_summary.csv", "report.txt")}
        regenerate_report(out)
        for n, blob in before.items():
            assert (out / n).read_bytes() == blob

    def test_analyze_matches_persisted(self, small_cfg, small_run):
        out, result = small_run
        rec = next(r for r in result["records"]
                   if r["kind"] == "natural" and r["condition"] == 2)
        tdir = out / "trials" / f"natural_c2_s{rec['seed']}"
        redone = analyze_trial(small_cfg, tdir)
        assert redone["spread"] == pytest.approx(rec["spread"], abs=0)
        assert redone["alpha"] == pytest.approx(rec["alpha"], rel=1e-12)

    def test_dfa_comparisons_shape(self, small_run):
        _, result = small_run
        rows = dfa_comparisons(result["records"])
        kinds = {r["kind"] for r in rows}
        assert kinds == {"naive", "natural"}
        for r in rows:
            assert 0.0 <= r["p_value"] <= 1.0


class TestShortBabbleGuard:
    def test_dataset_still_trains(self, small_cfg):
        prep = prepare_trial(small_cfg, "naive", 1)
        assert len(prep.nets) == 2
