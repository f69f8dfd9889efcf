"""Read-only access to a run directory's persisted CSV/JSON artifacts.

plotkit never re-runs simulation or training; it only consumes the file
schemas the experiment harness writes (comment-prefixed CSV headers, one
manifest per run and per trial).
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


class MissingArtifact(Exception):
    """A required artifact file is absent; the message names the files."""

    def __init__(self, paths):
        if isinstance(paths, (str, Path)):
            paths = [paths]
        self.paths = [str(p) for p in paths]
        super().__init__("missing artifacts: " + ", ".join(self.paths))


def _require(*paths) -> None:
    missing = [p for p in paths if not Path(p).exists()]
    if missing:
        raise MissingArtifact(missing)


def read_csv_rows(path):
    _require(path)
    with open(path) as fh:
        reader = csv.reader(r for r in fh if not r.startswith("#"))
        header = next(reader)
        rows = list(reader)
    return header, rows


def read_kinematics(path):
    """Long-format kinematics CSV -> dict of per-leg arrays."""
    header, rows = read_csv_rows(path)
    idx = {name: i for i, name in enumerate(header)}
    out = {}
    for leg in ("L", "R"):
        sel = [r for r in rows if r[idx["leg"]] == leg]
        arr = np.array(
            [[float(r[idx[c]]) for c in
              ("t_s", "q_hip", "q_knee", "foot_x_m", "foot_z_m")] for r in sel]
        )
        out[leg] = {
            "t": arr[:, 0],
            "q_hip": arr[:, 1],
            "q_knee": arr[:, 2],
            "foot_x": arr[:, 3],
            "foot_z": arr[:, 4],
        }
    return out


def read_trajectory(path):
    header, rows = read_csv_rows(path)
    pts = np.array([[float(r[1]), float(r[2])] for r in rows])
    hip_height = None
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            if "hip_height_m=" in line:
                hip_height = float(line.split("hip_height_m=")[1])
    return pts, hip_height


class RunArtifacts:
    """A run directory: manifest, config snapshot, and trial lookups."""

    def __init__(self, run_dir):
        self.root = Path(run_dir)
        manifest_path = self.root / "manifest.json"
        _require(manifest_path)
        with open(manifest_path) as fh:
            self.manifest = json.load(fh)
        self.config = self.manifest.get("config", {})

    def trials(self, kind=None, condition=None):
        out = []
        for entry in self.manifest["trials"]:
            if entry.get("error"):
                continue
            if kind is not None and entry["kind"] != kind:
                continue
            if condition is not None and entry["condition"] != condition:
                continue
            out.append(entry)
        return out

    def trial_path(self, entry, name):
        path = self.root / entry["dir"] / name
        _require(path)
        return path

    def kinds(self):
        return sorted({e["kind"] for e in self.manifest["trials"]})

    def conditions(self):
        return sorted({e["condition"] for e in self.manifest["trials"]})

    def joint_limits_deg(self):
        plant = self.config.get("plant", {})
        hip = plant.get("hip_limits_deg", [-60.0, 60.0])
        knee = plant.get("knee_limits_deg", [0.0, 120.0])
        return hip, knee

    def dfa_alphas(self, entry):
        path = self.trial_path(entry, "dfa.json")
        with open(path) as fh:
            doc = json.load(fh)
        return [leg["alpha"] for leg in doc["legs"]]
