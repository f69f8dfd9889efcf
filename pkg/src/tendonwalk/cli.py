"""Command-line interface.

Subcommands mirror the pipeline stages: babble, rollout, train, track,
trial, experiment, analyze, report.  Failures exit nonzero with a
machine-readable JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import babbling, invmap, io, kinematics
from . import plant as plant_mod
from .config import ExperimentConfig, babble_seed, schedule_seed, train_seed
from .errors import TendonWalkError
from .harness import (
    analyze_trial,
    generate_babbling,
    regenerate_report,
    run_experiment,
    run_trial,
)


def _load_config(path) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    return ExperimentConfig.load(path)


def cmd_babble(args):
    cfg = _load_config(args.config)
    seq_l, seq_r = generate_babbling(cfg, args.kind, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    headers = [f"config_hash={cfg.hash()}"]
    babbling.write_pwm_csv(out / "babble_left.csv", seq_l, headers)
    babbling.write_pwm_csv(out / "babble_right.csv", seq_r, headers)
    print(f"wrote {out}/babble_left.csv and babble_right.csv")


def cmd_rollout(args):
    cfg = _load_config(args.config)
    params = cfg.plant_params()
    seq_l = babbling.read_pwm_csv(args.left)
    seq_r = babbling.read_pwm_csv(args.right)
    state = plant_mod.initial_state(hip_height=args.hip_height,
                                    geometry=params.geometry)
    log = plant_mod.run_open_loop(state, seq_l, seq_r, params)
    io.write_kinematics_csv(args.out, log, [f"config_hash={cfg.hash()}"])
    print(f"wrote {args.out} ({len(log)} ticks)")


def cmd_train(args):
    cfg = _load_config(args.config)
    log = io.read_kinematics_csv(args.log)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for leg, pwm_path, name in ((0, args.left, "net_left.json"),
                                (1, args.right, "net_right.json")):
        seq = babbling.read_pwm_csv(pwm_path)
        ds = invmap.dataset_from_log(log, leg, seq)
        net, hist = invmap.train(ds, cfg.train_config(train_seed(args.seed, leg)))
        invmap.save_checkpoint(out / name, net, hist,
                               extra={"config_hash": cfg.hash()})
        print(f"wrote {out / name} (best test mse "
              f"{min(h['test_mse'] for h in hist):.5f})")


def cmd_track(args):
    cfg = _load_config(args.config)
    params = cfg.plant_params()
    net_l, _ = invmap.load_checkpoint(args.net_left)
    net_r, _ = invmap.load_checkpoint(args.net_right)
    traj = cfg.trajectory()
    placed = kinematics.place_for_condition(
        traj, kinematics.Condition(args.condition), **cfg.placement_kwargs()
    )
    res = plant_mod.run_tracking(
        net_l, net_r, placed, cfg.data["tracking_duration_s"], params,
        schedule_jitter=cfg.data["tracking"]["schedule_jitter"],
        schedule_seed=schedule_seed(args.seed),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    headers = [f"config_hash={cfg.hash()}"]
    io.write_kinematics_csv(out / "tracking_log.csv", res.log, headers)
    io.write_displacement_csv(out / "displacement.csv", res.log.t, res.log.hip_x,
                              res.displacement, headers)
    print(f"displacement {res.displacement.max():.3f} m, success={res.success}")


def cmd_trial(args):
    cfg = _load_config(args.config)
    record = run_trial(cfg, args.seed, args.kind, args.condition, args.out)
    print(json.dumps(record, indent=1, sort_keys=True))


def cmd_experiment(args):
    cfg = _load_config(args.config)
    result = run_experiment(cfg, args.out)
    n = len(result["records"])
    ok = sum(1 for r in result["records"] if r.get("error") is None)
    print(f"{ok}/{n} trials completed, outputs in {result['out_dir']}")


def cmd_analyze(args):
    cfg = _load_config(args.config)
    out = analyze_trial(cfg, args.trial_dir)
    print(json.dumps(out, indent=1, sort_keys=True))


def cmd_report(args):
    regenerate_report(args.run_dir)
    print(f"rewrote summaries in {args.run_dir}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tendonwalk",
        description="Tendon-driven biped walking-from-babbling experiments",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, seed=False, kind=False, condition=False):
        sp.add_argument("--config", help="YAML config file (defaults used if omitted)")
        if seed:
            sp.add_argument("--seed", type=int, required=True)
        if kind:
            sp.add_argument("--kind", choices=["naive", "natural"], required=True)
        if condition:
            sp.add_argument("--condition", type=int, choices=[1, 2, 3], required=True)

    sp = sub.add_parser("babble", help="generate left/right babbling PWM CSVs")
    add_common(sp, seed=True, kind=True)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_babble)

    sp = sub.add_parser("rollout", help="replay PWM CSVs open loop onto the plant")
    add_common(sp)
    sp.add_argument("--left", required=True)
    sp.add_argument("--right", required=True)
    sp.add_argument("--hip-height", type=float, default=1.0)
    sp.add_argument("--out", required=True, help="output kinematics CSV")
    sp.set_defaults(func=cmd_rollout)

    sp = sub.add_parser("train", help="train both leg inverse maps from a log")
    add_common(sp, seed=True)
    sp.add_argument("--log", required=True, help="kinematics CSV")
    sp.add_argument("--left", required=True, help="left PWM CSV")
    sp.add_argument("--right", required=True, help="right PWM CSV")
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("track", help="track the desired path with trained nets")
    add_common(sp, seed=True, condition=True)
    sp.add_argument("--net-left", required=True)
    sp.add_argument("--net-right", required=True)
    sp.add_argument("--out", required=True, help="output directory")
    sp.set_defaults(func=cmd_track)

    sp = sub.add_parser("trial", help="run one full babble-train-track trial")
    add_common(sp, seed=True, kind=True, condition=True)
    sp.add_argument("--out", required=True, help="trial output directory")
    sp.set_defaults(func=cmd_trial)

    sp = sub.add_parser("experiment", help="run the full trial battery")
    add_common(sp)
    sp.add_argument("--out", help="run directory (default from config)")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("analyze", help="recompute analyses for a trial directory")
    add_common(sp)
    sp.add_argument("--trial-dir", required=True)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("report", help="regenerate run summaries from artifacts")
    sp.add_argument("--run-dir", required=True)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (TendonWalkError, OSError, ValueError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
