"""The three figure kinds regenerated from run artifacts.

All rendering is deterministic: fixed figure sizes, no timestamps in the
output metadata, and a fixed SVG hash salt.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .artifacts import RunArtifacts, read_kinematics, read_trajectory

KIND_COLORS = {"naive": "tab:blue", "natural": "tab:green"}
FIGURE_KINDS = ("BabblingScatter", "TrajectoriesByCondition", "DfaDotPlot")

plt.rcParams["svg.hashsalt"] = "plotkit"


def _save(fig, out_path):
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    kwargs = {"dpi": 150}
    if out_path.suffix.lower() == ".svg":
        kwargs["metadata"] = {"Date": None}
    fig.savefig(out_path, **kwargs)
    plt.close(fig)


def babbling_scatter(run: RunArtifacts, out_path) -> None:
    """Joint-space and endpoint-space babbling clouds with the desired
    path overlaid and the joint motion limits as a dotted box."""
    fig, axes = plt.subplots(1, 2, figsize=(11, 5))
    hip_lim, knee_lim = run.joint_limits_deg()

    desired = None
    for kind in run.kinds():
        entries = run.trials(kind=kind)
        entry = entries[0]
        log = read_kinematics(run.trial_path(entry, "babble_log.csv"))
        traj_pts, _ = read_trajectory(run.trial_path(entry, "desired_trajectory.csv"))
        desired = traj_pts
        color = KIND_COLORS.get(kind, "gray")
        for leg, marker in (("L", "."), ("R", ".")):
            axes[0].plot(
                np.degrees(log[leg]["q_hip"]), np.degrees(log[leg]["q_knee"]),
                marker, ms=1.0, color=color, alpha=0.35,
                label=f"{kind}" if leg == "L" else None,
            )
            axes[1].plot(
                log[leg]["foot_x"], log[leg]["foot_z"],
                marker, ms=1.0, color=color, alpha=0.35,
                label=f"{kind}" if leg == "L" else None,
            )

    box_x = [hip_lim[0], hip_lim[1], hip_lim[1], hip_lim[0], hip_lim[0]]
    box_y = [knee_lim[0], knee_lim[0], knee_lim[1], knee_lim[1], knee_lim[0]]
    axes[0].plot(box_x, box_y, "k:", lw=1.2, label="joint limits")
    axes[0].set_xlabel("hip angle (deg)")
    axes[0].set_ylabel("knee angle (deg)")
    axes[0].set_title("joint space")
    axes[0].legend(loc="upper left", fontsize=8, markerscale=8)

    if desired is not None:
        axes[1].plot(desired[:, 0], desired[:, 1], "k--", lw=1.5, label="desired path")
    axes[1].set_xlabel("foot x (m, forward)")
    axes[1].set_ylabel("foot z (m, down from hip)")
    axes[1].invert_yaxis()
    axes[1].set_title("endpoint space")
    axes[1].set_aspect("equal")
    axes[1].legend(loc="upper left", fontsize=8)
    fig.suptitle("babbling exploration by strategy")
    _save(fig, out_path)


def trajectories_by_condition(run: RunArtifacts, out_path) -> None:
    """Obtained vs desired foot paths, one panel per ground condition,
    plotted against ground height (positive up)."""
    conditions = run.conditions()
    fig, axes = plt.subplots(1, len(conditions), figsize=(5 * len(conditions), 4.5),
                             sharey=True)
    if len(conditions) == 1:
        axes = [axes]
    for ax, cond in zip(axes, conditions):
        drew_desired = False
        for kind in run.kinds():
            entries = run.trials(kind=kind, condition=cond)
            if not entries:
                continue
            entry = entries[0]
            log = read_kinematics(run.trial_path(entry, "tracking_log.csv"))
            pts, hip_height = read_trajectory(
                run.trial_path(entry, "desired_trajectory.csv"))
            if not drew_desired and hip_height is not None:
                ax.plot(pts[:, 0], hip_height - pts[:, 1], "k--", lw=1.5,
                        label="desired")
                drew_desired = True
            color = KIND_COLORS.get(kind, "gray")
            leg = log["L"]
            ax.plot(leg["foot_x"], hip_height - leg["foot_z"], "-", lw=0.6,
                    color=color, alpha=0.8, label=kind)
        ax.axhline(0.0, color="saddlebrown", lw=2.0)
        ax.set_title(f"condition {cond}")
        ax.set_xlabel("foot x (m)")
    axes[0].set_ylabel("height above ground (m)")
    axes[0].legend(loc="upper right", fontsize=8)
    fig.suptitle("obtained vs desired foot paths per ground condition")
    _save(fig, out_path)


def dfa_dot_plot(run: RunArtifacts, out_path) -> None:
    """Fractal scaling components per condition, dots colored by kind."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    offsets = {kind: (-0.12 if i == 0 else 0.12)
               for i, kind in enumerate(run.kinds())}
    for kind in run.kinds():
        xs, ys = [], []
        for cond in run.conditions():
            for entry in run.trials(kind=kind, condition=cond):
                for alpha in run.dfa_alphas(entry):
                    xs.append(cond + offsets[kind])
                    ys.append(alpha)
        ax.plot(xs, ys, "o", ms=5, color=KIND_COLORS.get(kind, "gray"),
                alpha=0.75, label=kind)
    ax.set_xticks(run.conditions())
    ax.set_xticklabels([f"condition {c}" for c in run.conditions()])
    ax.set_ylabel("fractal scaling component")
    ax.legend(loc="best", fontsize=9)
    fig.suptitle("endpoint-distance persistence by condition and babbling kind")
    _save(fig, out_path)


_RENDERERS = {
    "BabblingScatter": babbling_scatter,
    "TrajectoriesByCondition": trajectories_by_condition,
    "DfaDotPlot": dfa_dot_plot,
}


def render(run_dir, figure_kind: str, out_path) -> None:
    if figure_kind not in _RENDERERS:
        raise ValueError(
            f"unknown figure kind {figure_kind!r}; choose from {FIGURE_KINDS}"
        )
    run = RunArtifacts(run_dir)
    _RENDERERS[figure_kind](run, out_path)
