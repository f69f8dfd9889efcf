"""Planar 2-DoF leg geometry, FK/IK, and desired foot trajectories.

Frame conventions (used everywhere in the package):

* hip-relative frame: origin at the hip joint, x positive forward,
  z positive DOWNWARD.  A straight leg hanging at rest puts the foot at
  (0, thigh + shank).
* world frame: z positive UPWARD, ground plane at ``ground_z`` (0 by
  default).  World foot height = ``hip_height - z_rel``.

``q_hip`` is the thigh angle from the downward vertical (positive swings
the foot forward).  ``q_knee`` is the flexion angle, always >= 0 on the
modeled branch; flexion folds the shank backward, so the shank's absolute
angle is ``q_hip - q_knee``.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InfeasibleShape, OutOfLimits, Unreachable

_ANNULUS_TOL = 1e-9


class Condition(enum.IntEnum):
    """Placement of the desired trajectory relative to the ground."""

    IN_AIR = 1
    SLIGHT_CONTACT = 2
    UNDER_GROUND_1CM = 3


@dataclass(frozen=True)
class LegGeometry:
    thigh_length: float = 0.20
    shank_length: float = 0.20
    # hip measured from the downward vertical; knee is flexion-only
    # (no hyperextension past straight).
    hip_limits: tuple[float, float] = (-math.radians(60.0), math.radians(60.0))
    knee_limits: tuple[float, float] = (0.0, math.radians(120.0))

    def __post_init__(self):
        if self.thigh_length <= 0 or self.shank_length <= 0:
            raise ValueError("link lengths must be positive")
        if self.hip_limits[0] >= self.hip_limits[1]:
            raise ValueError("hip limit interval is empty")
        if self.knee_limits[0] >= self.knee_limits[1]:
            raise ValueError("knee limit interval is empty")
        if self.knee_limits[0] < 0:
            raise ValueError("knee limits must stay on the flexion branch")

    @property
    def reach(self) -> float:
        return self.thigh_length + self.shank_length

    @property
    def inner_reach(self) -> float:
        return abs(self.thigh_length - self.shank_length)


@dataclass
class JointState:
    q_hip: float
    q_knee: float
    qd_hip: float = 0.0
    qd_knee: float = 0.0
    qdd_hip: float = 0.0
    qdd_knee: float = 0.0


@dataclass(frozen=True)
class FootPoint:
    x: float
    z: float


@dataclass
class Trajectory:
    """Closed desired foot path, hip-relative, with ground placement."""

    points: np.ndarray  # (N+1, 2), last row repeats the first
    period: float
    condition: Condition = Condition.IN_AIR
    hip_height: float = 1.0

    @property
    def z_bottom(self) -> float:
        """Largest hip-relative z on the loop (deepest point)."""
        return float(np.max(self.points[:, 1]))

    @property
    def z_top(self) -> float:
        """Smallest hip-relative z on the loop (highest point)."""
        return float(np.min(self.points[:, 1]))

    def polygon(self) -> np.ndarray:
        """Loop vertices without the closing duplicate."""
        return self.points[:-1]

    def world_foot_z(self) -> np.ndarray:
        return self.hip_height - self.points[:, 1]

    def centroid_distance(self) -> float:
        c = self.points[:-1].mean(axis=0)
        return float(np.hypot(c[0], c[1]))


@dataclass(frozen=True)
class TrajectoryShape:
    """Parameters of the two-lobe closed desired foot path.

    The loop is traversed with the deep (stance) arc sweeping backward and
    the lifted (swing) arc returning forward.  ``lift_skew`` biases the
    swing height toward the front so the front and back apexes differ.
    """

    stride: float = 0.14
    z_mid: float = 0.37
    bottom_depth: float = 0.018
    lift_mean: float = 0.025
    lift_skew: float = 0.008
    limit_margin: float = math.radians(5.0)


def forward_kinematics(geom: LegGeometry, q: JointState) -> FootPoint:
    """Hip-relative foot position of the planar thigh-shank chain."""
    x, z = _foot_xz(geom, q.q_hip, q.q_knee)
    return FootPoint(float(x), float(z))


def _foot_xz(geom: LegGeometry, q_hip, q_knee):
    shank_abs = q_hip - q_knee
    x = geom.thigh_length * np.sin(q_hip) + geom.shank_length * np.sin(shank_abs)
    z = geom.thigh_length * np.cos(q_hip) + geom.shank_length * np.cos(shank_abs)
    return x, z


def inverse_kinematics(geom: LegGeometry, p: FootPoint) -> JointState:
    """Joint angles on the flexion branch reaching ``p``; velocities zero.

    Raises Unreachable outside the annulus and OutOfLimits when only the
    other knee branch (or an out-of-range hip angle) reaches the point.
    """
    l1, l2 = geom.thigh_length, geom.shank_length
    r = math.hypot(p.x, p.z)
    if r > geom.reach * (1.0 + _ANNULUS_TOL) + _ANNULUS_TOL:
        raise Unreachable(f"target at r={r:.6f} m beyond reach {geom.reach:.6f} m")
    if r < geom.inner_reach * (1.0 - _ANNULUS_TOL) - _ANNULUS_TOL:
        raise Unreachable(f"target at r={r:.6f} m inside inner radius")

    cos_knee = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    q_knee = math.acos(min(1.0, max(-1.0, cos_knee)))
    beta = math.atan2(l2 * math.sin(q_knee), l1 + l2 * math.cos(q_knee))
    q_hip = math.atan2(p.x, p.z) + beta

    lo, hi = geom.knee_limits
    if not (lo - _ANNULUS_TOL <= q_knee <= hi + _ANNULUS_TOL):
        raise OutOfLimits(f"knee {math.degrees(q_knee):.2f} deg outside limits")
    lo, hi = geom.hip_limits
    if not (lo - _ANNULUS_TOL <= q_hip <= hi + _ANNULUS_TOL):
        raise OutOfLimits(f"hip {math.degrees(q_hip):.2f} deg outside limits")
    return JointState(q_hip=q_hip, q_knee=q_knee)


def desired_trajectory(
    geom: LegGeometry,
    shape: TrajectoryShape | None = None,
    n_samples: int = 256,
    period: float = 1.0,
) -> Trajectory:
    """Closed two-lobe desired foot path, feasible with a joint-limit margin.

    Phase runs forward-top-of-stance -> backward stance sweep -> lifted
    forward swing.  Every sampled point must pass IK with at least
    ``shape.limit_margin`` to both joint limits, otherwise InfeasibleShape.
    """
    if n_samples < 16:
        raise InfeasibleShape(f"n_samples={n_samples} below minimum of 16")
    shape = shape or TrajectoryShape()
    if abs(shape.lift_skew) < 1e-6:
        raise InfeasibleShape("lift_skew must be nonzero for asymmetric swings")

    theta = 2.0 * math.pi * np.arange(n_samples) / n_samples
    x = 0.5 * shape.stride * np.cos(theta)
    s = np.sin(theta)
    lift = shape.lift_mean + shape.lift_skew * np.cos(theta)
    z = np.where(s >= 0.0, shape.z_mid + shape.bottom_depth * s, shape.z_mid + lift * s)
    pts = np.column_stack([x, z])
    pts = np.vstack([pts, pts[:1]])

    margin = shape.limit_margin
    for i, (px, pz) in enumerate(pts[:-1]):
        try:
            js = inverse_kinematics(geom, FootPoint(px, pz))
        except (Unreachable, OutOfLimits) as exc:
            raise InfeasibleShape(f"point {i} at ({px:.4f},{pz:.4f}): {exc}") from exc
        if not _inside_with_margin(js.q_hip, geom.hip_limits, margin):
            raise InfeasibleShape(f"point {i} hip angle within margin of a limit")
        if not _inside_with_margin(js.q_knee, geom.knee_limits, margin):
            raise InfeasibleShape(f"point {i} knee angle within margin of a limit")

    front_apex, back_apex = swing_apex_heights(pts[:-1], shape.z_mid)
    if abs(front_apex - back_apex) < 1e-9:
        raise InfeasibleShape("front and back swing apexes coincide; skew the lift")

    return Trajectory(points=pts, period=period)


def _inside_with_margin(q, limits, margin):
    return limits[0] + margin <= q <= limits[1] - margin


def swing_apex_heights(points: np.ndarray, z_ref: float) -> tuple[float, float]:
    """Max lift above ``z_ref`` for the front (x>0) and back (x<0) halves."""
    lift = z_ref - points[:, 1]
    front = lift[points[:, 0] > 0]
    back = lift[points[:, 0] < 0]
    return float(front.max()), float(back.max())


def place_for_condition(
    traj: Trajectory,
    condition: Condition,
    ground_z: float = 0.0,
    air_clearance: float = 0.03,
    contact_depth: float = 0.005,
    submersion: float = 0.01,
) -> Trajectory:
    """Set ``hip_height`` so the loop sits as the condition requires.

    IN_AIR lifts the whole loop ``air_clearance`` above the ground;
    SLIGHT_CONTACT drops the deepest arc ``contact_depth`` below it;
    UNDER_GROUND_1CM submerges the entire loop so its highest point is
    ``submersion`` (1 cm) below ground.  The hip-relative point set is
    shared untouched; only placement metadata changes.
    """
    condition = Condition(condition)
    if condition is Condition.IN_AIR:
        hip = ground_z + traj.z_bottom + air_clearance
    elif condition is Condition.SLIGHT_CONTACT:
        hip = ground_z + traj.z_bottom - contact_depth
    else:
        hip = ground_z + traj.z_top - submersion
    return replace(traj, condition=condition, hip_height=hip)


def joint_space_image(geom: LegGeometry, traj: Trajectory) -> np.ndarray:
    """(N, 2) array of (q_hip, q_knee) for every loop point (closing row kept)."""
    out = np.empty((len(traj.points), 2))
    for i, (px, pz) in enumerate(traj.points):
        js = inverse_kinematics(geom, FootPoint(px, pz))
        out[i] = (js.q_hip, js.q_knee)
    return out


def write_trajectory_csv(path, traj: Trajectory, header_lines=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["index", "x_m", "z_m"])
        for i, (x, z) in enumerate(traj.points):
            w.writerow([i, repr(float(x)), repr(float(z))])


def read_trajectory_csv(path, period: float = 1.0) -> Trajectory:
    pts = []
    with open(path) as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    for row in rows[1:]:
        pts.append((float(row[1]), float(row[2])))
    return Trajectory(points=np.asarray(pts), period=period)
