"""CSV and JSON artifact formats shared by the CLI stages and the plot
frontend.  All floats are written with repr so files round-trip exactly
and re-runs are byte-identical; header comment lines carry the config
hash."""

from __future__ import annotations

import csv
import json

import numpy as np

from .plant import KinematicsLog

LEG_NAMES = ("L", "R")


def _write_headers(fh, header_lines):
    for line in header_lines:
        fh.write(f"# {line}\n")


def write_kinematics_csv(path, log: KinematicsLog, header_lines=()) -> None:
    with open(path, "w", newline="") as fh:
        _write_headers(fh, header_lines)
        w = csv.writer(fh)
        w.writerow(
            [
                "t_s", "leg", "q_hip", "q_knee", "qd_hip", "qd_knee",
                "qdd_hip", "qdd_knee", "foot_x_m", "foot_z_m", "contact",
            ]
        )
        for i in range(len(log)):
            for leg in range(2):
                w.writerow(
                    [
                        repr(float(log.t[i])),
                        LEG_NAMES[leg],
                        repr(float(log.q[i, leg, 0])),
                        repr(float(log.q[i, leg, 1])),
                        repr(float(log.qd[i, leg, 0])),
                        repr(float(log.qd[i, leg, 1])),
                        repr(float(log.qdd[i, leg, 0])),
                        repr(float(log.qdd[i, leg, 1])),
                        repr(float(log.foot[i, leg, 0])),
                        repr(float(log.foot[i, leg, 1])),
                        int(log.contact[i, leg]),
                    ]
                )


def read_kinematics_csv(path, hip_height: float = 1.0) -> KinematicsLog:
    rows = {"L": [], "R": []}
    times = []
    with open(path) as fh:
        reader = csv.reader(r for r in fh if not r.startswith("#"))
        next(reader)
        for row in reader:
            leg = row[1]
            rows[leg].append([float(v) for v in row[2:10]] + [int(row[10])])
            if leg == "L":
                times.append(float(row[0]))
    n = len(times)
    q = np.empty((n, 2, 2))
    qd = np.empty((n, 2, 2))
    qdd = np.empty((n, 2, 2))
    foot = np.empty((n, 2, 2))
    contact = np.zeros((n, 2), dtype=bool)
    for leg, name in enumerate(LEG_NAMES):
        arr = np.asarray(rows[name])
        q[:, leg, :] = arr[:, 0:2]
        qd[:, leg, :] = arr[:, 2:4]
        qdd[:, leg, :] = arr[:, 4:6]
        foot[:, leg, :] = arr[:, 6:8]
        contact[:, leg] = arr[:, 8].astype(bool)
    t = np.asarray(times)
    rate = 1.0 / (t[1] - t[0]) if n > 1 else 200.0
    return KinematicsLog(
        t=t, q=q, qd=qd, qdd=qdd, foot=foot, contact=contact,
        limit_hit=np.zeros((n, 2), dtype=bool), hip_x=np.zeros(n),
        hip_x0=0.0, hip_height=hip_height, sample_rate=rate,
    )


def write_displacement_csv(path, t, hip_x, displacement, header_lines=()) -> None:
    with open(path, "w", newline="") as fh:
        _write_headers(fh, header_lines)
        w = csv.writer(fh)
        w.writerow(["t_s", "hip_x_m", "displacement_m"])
        for ti, xi, di in zip(t, hip_x, displacement):
            w.writerow([repr(float(ti)), repr(float(xi)), repr(float(di))])


def read_displacement_csv(path):
    arr = []
    with open(path) as fh:
        reader = csv.reader(r for r in fh if not r.startswith("#"))
        next(reader)
        for row in reader:
            arr.append([float(v) for v in row])
    a = np.asarray(arr)
    return a[:, 0], a[:, 1], a[:, 2]


def write_json(path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
