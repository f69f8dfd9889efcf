"""Experiment orchestration: seeded trials of (babbling kind x ground
condition), artifact persistence, and summary reports.

A trial babbles both legs, replays the commands open loop, trains one
inverse map per leg, tracks the placed desired trajectory, and analyzes
the results.  Within an experiment the babble/rollout/training work is
shared across the three conditions of the same (kind, seed); every
artifact is persisted per trial directory so each trial stands alone.
"""

from __future__ import annotations

import csv
import traceback
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, babbling, invmap, io, kinematics
from . import plant as plant_mod
from .config import ExperimentConfig, SCHEMA_VERSION, babble_seed, schedule_seed, train_seed
from .errors import TendonWalkError

KINDS = ("naive", "natural")


@dataclass
class TrialPrep:
    """Condition-independent products of one (kind, seed): babbling,
    rollout log, trained nets, and babbling analyses."""

    seq_left: babbling.PwmSequence
    seq_right: babbling.PwmSequence
    babble_log: plant_mod.KinematicsLog
    nets: list
    histories: list
    spread: list


def generate_babbling(cfg: ExperimentConfig, kind: str, trial_seed: int):
    params = cfg.plant_params()
    duration = cfg.data["babble_duration_s"]
    rate = params.control_rate()
    if kind == "natural":
        gen = lambda s: babbling.generate_natural(duration, s, cfg.natural_params(), rate)
    elif kind == "naive":
        gen = lambda s: babbling.generate_naive(duration, s, cfg.naive_params(), rate)
    else:
        raise ValueError(f"unknown babbling kind {kind!r}")
    return gen(babble_seed(trial_seed, 0)), gen(babble_seed(trial_seed, 1))


def prepare_trial(cfg: ExperimentConfig, kind: str, trial_seed: int) -> TrialPrep:
    params = cfg.plant_params()
    seq_l, seq_r = generate_babbling(cfg, kind, trial_seed)
    blog = plant_mod.run_open_loop(plant_mod.initial_state(), seq_l, seq_r, params)

    region = cfg.trajectory().polygon()
    spreads = [analysis.spread(blog.foot[:, leg, :], region).ratio for leg in range(2)]

    nets, hists = [], []
    for leg, seq in ((0, seq_l), (1, seq_r)):
        ds = invmap.dataset_from_log(blog, leg, seq, kind)
        net, hist = invmap.train(ds, cfg.train_config(train_seed(trial_seed, leg)))
        nets.append(net)
        hists.append(hist)
    return TrialPrep(seq_l, seq_r, blog, nets, hists, spreads)


def trial_dfa(cfg: ExperimentConfig, log: plant_mod.KinematicsLog):
    a = cfg.data["analysis"]
    dec = max(1, int(a["dfa_decimation"]))
    dist = analysis.endpoint_distance_series(log)
    out = []
    for leg in range(2):
        series = dist[::dec, leg]
        scales = analysis.default_scales(len(series), smallest=a["dfa_min_scale"])
        out.append(
            analysis.dfa(series, scales=scales, integrate_profile=a["dfa_profile"])
        )
    return out


def run_trial(cfg: ExperimentConfig, seed: int, kind: str, condition: int,
              out_dir, prep: TrialPrep | None = None) -> dict:
    """Execute one full trial and persist all artifacts; returns the record."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    headers = [f"config_hash={cfg.hash()}", f"schema={SCHEMA_VERSION}"]
    params = cfg.plant_params()
    condition = kinematics.Condition(condition)

    if prep is None:
        prep = prepare_trial(cfg, kind, seed)

    io_files = {}

    def record_file(name):
        io_files[name] = name
        return out / name

    babbling.write_pwm_csv(record_file("babble_left.csv"), prep.seq_left, headers)
    babbling.write_pwm_csv(record_file("babble_right.csv"), prep.seq_right, headers)
    io.write_kinematics_csv(record_file("babble_log.csv"), prep.babble_log, headers)
    for leg, name in ((0, "net_left.json"), (1, "net_right.json")):
        invmap.save_checkpoint(
            record_file(name), prep.nets[leg], prep.histories[leg],
            extra={"config_hash": cfg.hash(), "kind": kind, "trial_seed": seed},
        )

    traj = cfg.trajectory()
    placed = kinematics.place_for_condition(traj, condition, **cfg.placement_kwargs())
    kinematics.write_trajectory_csv(
        record_file("desired_trajectory.csv"), placed,
        headers + [f"condition={int(condition)}", f"hip_height_m={placed.hip_height!r}"],
    )

    res = plant_mod.run_tracking(
        prep.nets[0], prep.nets[1], placed, cfg.data["tracking_duration_s"], params,
        schedule_jitter=cfg.data["tracking"]["schedule_jitter"],
        schedule_seed=schedule_seed(seed),
    )
    io.write_kinematics_csv(record_file("tracking_log.csv"), res.log, headers)
    io.write_displacement_csv(
        record_file("displacement.csv"), res.log.t, res.log.hip_x, res.displacement,
        headers,
    )
    for cmds, name in ((res.commands_left, "commands_left.csv"),
                       (res.commands_right, "commands_right.csv")):
        seq = babbling.PwmSequence(cmds, params.control_rate(),
                                   cfg.data["tracking_duration_s"], seed)
        babbling.write_pwm_csv(record_file(name), seq, headers)

    stats = analysis.trial_stats(
        res.displacement, cfg.data["tracking_duration_s"],
        sample_rate=params.control_rate(),
        condition=int(condition), kind=kind, seed=seed,
    )
    rms = plant_mod.tracking_error_rms(res.log, placed, res.phases)
    dfa_results = trial_dfa(cfg, res.log)

    io.write_json(out / "spread.json", {
        "config_hash": cfg.hash(),
        "ratio": prep.spread,
        "pixel_m": analysis.PIXEL_SIZE,
    })
    io_files["spread.json"] = "spread.json"
    io.write_json(out / "dfa.json", {
        "config_hash": cfg.hash(),
        "decimation": cfg.data["analysis"]["dfa_decimation"],
        "legs": [
            {
                "alpha": r.alpha,
                "fit_r2": r.fit_r2,
                "scales": [int(s) for s in r.scales],
                "fluctuations": [float(f) for f in r.fluctuations],
            }
            for r in dfa_results
        ],
    })
    io_files["dfa.json"] = "dfa.json"

    record = {
        "kind": kind,
        "condition": int(condition),
        "seed": seed,
        "success": stats.success,
        "travel_time_s": stats.travel_time,
        "speed_cm_s": stats.speed,
        "displacement_m": float(res.displacement.max()),
        "rms_err_m": [float(v) for v in rms],
        "spread": prep.spread,
        "alpha": [r.alpha for r in dfa_results],
        "dfa_r2": [r.fit_r2 for r in dfa_results],
        "babble_limit_ticks": int(prep.babble_log.limit_hit.sum()),
        "contact_fraction": float(res.log.contact.mean()),
        "hip_height_m": placed.hip_height,
        "error": None,
    }
    io.write_json(out / "stats.json", {"config_hash": cfg.hash(), **record})
    io_files["stats.json"] = "stats.json"
    io.write_json(out / "manifest.json", {
        "schema": SCHEMA_VERSION,
        "config_hash": cfg.hash(),
        "kind": kind,
        "condition": int(condition),
        "seed": seed,
        "files": sorted(io_files),
    })
    return record


def trial_dir_name(kind: str, condition: int, seed: int) -> str:
    return f"{kind}_c{int(condition)}_s{seed}"


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> dict:
    """All kind x condition x trial combinations plus summary tables."""
    out = Path(out_dir or cfg.data["output_dir"])
    trials_dir = out / "trials"
    trials_dir.mkdir(parents=True, exist_ok=True)
    cfg.save(out / "config.yaml")

    records = []
    seeds = cfg.data["seeds"][: cfg.data["trials"]]
    for kind in cfg.data["kinds"]:
        for seed in seeds:
            try:
                prep = prepare_trial(cfg, kind, seed)
            except TendonWalkError as exc:
                prep = None
                prep_error = f"{type(exc).__name__}: {exc}"
            for condition in cfg.data["conditions"]:
                tdir = trials_dir / trial_dir_name(kind, condition, seed)
                if prep is None:
                    records.append({
                        "kind": kind, "condition": int(condition), "seed": seed,
                        "success": False, "error": prep_error,
                    })
                    tdir.mkdir(parents=True, exist_ok=True)
                    io.write_json(tdir / "manifest.json", {
                        "schema": SCHEMA_VERSION, "config_hash": cfg.hash(),
                        "kind": kind, "condition": int(condition), "seed": seed,
                        "files": [], "error": prep_error,
                    })
                    continue
                try:
                    records.append(run_trial(cfg, seed, kind, condition, tdir, prep))
                except TendonWalkError as exc:
                    records.append({
                        "kind": kind, "condition": int(condition), "seed": seed,
                        "success": False,
                        "error": f"{type(exc).__name__}: {exc}",
                    })
                    io.write_json(tdir / "manifest.json", {
                        "schema": SCHEMA_VERSION, "config_hash": cfg.hash(),
                        "kind": kind, "condition": int(condition), "seed": seed,
                        "files": sorted(p.name for p in tdir.iterdir()),
                        "error": f"{type(exc).__name__}: {exc}",
                    })

    manifest = {
        "schema": SCHEMA_VERSION,
        "config_hash": cfg.hash(),
        "config": cfg.to_dict(),
        "trials": [
            {
                "dir": f"trials/{trial_dir_name(r['kind'], r['condition'], r['seed'])}",
                "kind": r["kind"],
                "condition": r["condition"],
                "seed": r["seed"],
                "error": r.get("error"),
            }
            for r in records
        ],
    }
    io.write_json(out / "manifest.json", manifest)
    write_summaries(out, cfg, records)
    return {"records": records, "out_dir": str(out)}


SUMMARY_COLUMNS = [
    "kind", "condition", "seed", "success", "travel_time_s", "speed_cm_s",
    "displacement_m", "rms_err_l_m", "rms_err_r_m", "spread_l", "spread_r",
    "alpha_l", "alpha_r", "dfa_r2_l", "dfa_r2_r", "babble_limit_ticks",
    "contact_fraction", "error",
]


def _summary_row(r: dict) -> list:
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, (bool, np.bool_)):
            return int(v)
        if isinstance(v, float):
            return repr(float(v))
        return v

    pairs = {
        "rms_err_l_m": r.get("rms_err_m", [None, None])[0],
        "rms_err_r_m": r.get("rms_err_m", [None, None])[1],
        "spread_l": r.get("spread", [None, None])[0],
        "spread_r": r.get("spread", [None, None])[1],
        "alpha_l": r.get("alpha", [None, None])[0],
        "alpha_r": r.get("alpha", [None, None])[1],
        "dfa_r2_l": r.get("dfa_r2", [None, None])[0],
        "dfa_r2_r": r.get("dfa_r2", [None, None])[1],
    }
    out = []
    for col in SUMMARY_COLUMNS:
        if col in pairs:
            out.append(fmt(pairs[col]))
        else:
            out.append(fmt(r.get(col)))
    return out


def group_stats(records: list[dict]) -> list[dict]:
    groups = {}
    for r in records:
        groups.setdefault((r["kind"], r["condition"]), []).append(r)
    rows = []
    for (kind, condition), rs in sorted(groups.items()):
        ok = [r for r in rs if r.get("error") is None]
        speeds = [r["speed_cm_s"] for r in ok if r.get("success")]
        alphas_trial = [float(np.mean(r["alpha"])) for r in ok if "alpha" in r]
        rows.append({
            "kind": kind,
            "condition": condition,
            "n_trials": len(rs),
            "n_success": sum(bool(r.get("success")) for r in rs),
            "success_rate": sum(bool(r.get("success")) for r in rs) / len(rs),
            "mean_speed_cm_s": float(np.mean(speeds)) if speeds else None,
            "mean_spread": float(np.mean([v for r in ok for v in r.get("spread", [])]))
            if ok else None,
            "mean_alpha": float(np.mean(alphas_trial)) if alphas_trial else None,
            "alpha_trial_var": float(np.var(alphas_trial)) if alphas_trial else None,
        })
    return rows


def _alpha_legs(records, kind, condition):
    return np.array(
        [a for r in records
         if r["kind"] == kind and r["condition"] == condition and r.get("alpha")
         for a in r["alpha"]]
    )


def dfa_comparisons(records: list[dict]) -> list[dict]:
    """Welch tests of the fractal scaling component, deep-contact versus
    slight-contact, per babbling kind."""
    rows = []
    for kind in KINDS:
        a2 = _alpha_legs(records, kind, 2)
        a3 = _alpha_legs(records, kind, 3)
        if len(a2) >= 2 and len(a3) >= 2:
            t, df = analysis.welch_statistic(a3, a2)
            p = analysis.two_sample_test(a3, a2)
            rows.append({
                "kind": kind,
                "mean_alpha_c2": float(a2.mean()),
                "mean_alpha_c3": float(a3.mean()),
                "t": t,
                "df": df,
                "p_value": p,
                "var_c2": float(a2.var()),
                "var_c3": float(a3.var()),
            })
    return rows


def write_summaries(out_dir, cfg: ExperimentConfig, records: list[dict]) -> None:
    out = Path(out_dir)
    headers = [f"config_hash={cfg.hash()}", f"schema={SCHEMA_VERSION}"]

    with open(out / "summary.csv", "w", newline="") as fh:
        for line in headers:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for r in records:
            w.writerow(_summary_row(r))

    groups = group_stats(records)
    with open(out / "group_summary.csv", "w", newline="") as fh:
        for line in headers:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        cols = ["kind", "condition", "n_trials", "n_success", "success_rate",
                "mean_speed_cm_s", "mean_spread", "mean_alpha", "alpha_trial_var"]
        w.writerow(cols)
        for g in groups:
            w.writerow(["" if g[c] is None else
                        (repr(float(g[c])) if isinstance(g[c], float) else g[c])
                        for c in cols])

    comparisons = dfa_comparisons(records)
    io.write_json(out / "dfa_tests.json", {
        "config_hash": cfg.hash(),
        "comparisons": comparisons,
    })

    with open(out / "report.txt", "w") as fh:
        fh.write(render_report(cfg, records, groups, comparisons))


def render_report(cfg, records, groups, comparisons) -> str:
    lines = [
        "Walking-from-babbling experiment summary",
        f"config_hash: {cfg.hash()}",
        "",
        "Success rates and mean first-40cm speeds per group:",
    ]
    for g in groups:
        speed = f"{g['mean_speed_cm_s']:.2f} cm/s" if g["mean_speed_cm_s"] else "n/a"
        lines.append(
            f"  {g['kind']:7s} condition {g['condition']}: "
            f"{g['n_success']}/{g['n_trials']} success ({g['success_rate']:.0%}), "
            f"mean speed {speed}"
        )

    by = {(g["kind"], g["condition"]): g for g in groups}
    if ("natural", 2) in by and ("naive", 2) in by:
        lines += [
            "",
            "Slight ground contact (condition 2): "
            f"natural babbling success {by[('natural', 2)]['success_rate']:.0%} vs "
            f"naive {by[('naive', 2)]['success_rate']:.0%}.",
        ]
    if ("natural", 3) in by and ("natural", 2) in by:
        v2 = by[("natural", 2)]["mean_speed_cm_s"]
        v3 = by[("natural", 3)]["mean_speed_cm_s"]
        if v2 and v3:
            lines.append(
                f"Natural-trained mean speed rises from {v2:.2f} cm/s (condition 2) "
                f"to {v3:.2f} cm/s (condition 3), a {100 * (v3 - v2) / v2:.0f}% increase."
            )
    sp = {k: by.get((k, 2), by.get((k, 1))) for k in KINDS}
    if all(sp.values()):
        lines.append(
            "Mean babbling spread inside the desired-path region: "
            f"natural {sp['natural']['mean_spread']:.2f} vs naive {sp['naive']['mean_spread']:.2f}."
        )
    for c in comparisons:
        lines.append(
            f"Fractal scaling ({c['kind']}): condition 3 alpha {c['mean_alpha_c3']:.3f} vs "
            f"condition 2 {c['mean_alpha_c2']:.3f}, Welch p = {c['p_value']:.4f}; "
            f"leg-series variance {c['var_c3']:.5f} vs {c['var_c2']:.5f}."
        )
    return "\n".join(lines) + "\n"


def analyze_trial(cfg: ExperimentConfig, trial_dir) -> dict:
    """Recompute spread, fractal scaling, and trial stats from the persisted
    CSV logs of a trial directory; rewrites the analysis JSON files."""
    tdir = Path(trial_dir)
    manifest = io.read_json(tdir / "manifest.json")
    params = cfg.plant_params()
    blog = io.read_kinematics_csv(tdir / "babble_log.csv")
    region = cfg.trajectory().polygon()
    spreads = [analysis.spread(blog.foot[:, leg, :], region).ratio for leg in range(2)]

    tlog = io.read_kinematics_csv(tdir / "tracking_log.csv")
    t, hip_x, disp = io.read_displacement_csv(tdir / "displacement.csv")
    stats = analysis.trial_stats(
        disp, cfg.data["tracking_duration_s"], sample_rate=params.control_rate(),
        condition=manifest["condition"], kind=manifest["kind"], seed=manifest["seed"],
    )
    dfa_results = trial_dfa(cfg, tlog)

    io.write_json(tdir / "spread.json", {
        "config_hash": cfg.hash(),
        "ratio": spreads,
        "pixel_m": analysis.PIXEL_SIZE,
    })
    io.write_json(tdir / "dfa.json", {
        "config_hash": cfg.hash(),
        "decimation": cfg.data["analysis"]["dfa_decimation"],
        "legs": [
            {
                "alpha": r.alpha,
                "fit_r2": r.fit_r2,
                "scales": [int(s) for s in r.scales],
                "fluctuations": [float(f) for f in r.fluctuations],
            }
            for r in dfa_results
        ],
    })
    return {
        "spread": spreads,
        "alpha": [r.alpha for r in dfa_results],
        "success": stats.success,
        "speed_cm_s": stats.speed,
    }


def regenerate_report(run_dir) -> None:
    """Rebuild the summary files of a run directory from trial artifacts."""
    out = Path(run_dir)
    manifest = io.read_json(out / "manifest.json")
    cfg = ExperimentConfig(manifest["config"])
    records = []
    for entry in manifest["trials"]:
        stats_path = out / entry["dir"] / "stats.json"
        if entry.get("error") or not stats_path.exists():
            records.append({
                "kind": entry["kind"], "condition": entry["condition"],
                "seed": entry["seed"], "success": False,
                "error": entry.get("error", "missing artifacts"),
            })
            continue
        doc = io.read_json(stats_path)
        doc.pop("config_hash", None)
        records.append(doc)
    write_summaries(out, cfg, records)
