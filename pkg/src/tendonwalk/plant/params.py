"""Plant parameters and state for the tendon-driven planar biped.

Each leg is a thigh-shank double pendulum hanging from the hip.  The hip
rides a gantry: its height above the ground is fixed for a run and it
translates horizontally only through stance-foot anchoring.  Three motors
per leg pull on tendons with constant signed moment arms; tendons only
pull, so motor tension is nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..kinematics import LegGeometry

GRAVITY = 9.81


@dataclass(frozen=True)
class PlantParams:
    geometry: LegGeometry = field(default_factory=LegGeometry)
    segment_masses: tuple[float, float] = (0.5, 0.4)  # thigh, shank (kg)
    segment_inertias: tuple[float, float] = (
        0.5 * 0.2**2 / 12.0,
        0.4 * 0.2**2 / 12.0,
    )  # about each segment COM (kg m^2)
    com_offsets: tuple[float, float] = (0.10, 0.10)  # proximal joint -> COM (m)
    # rows: motors M1..M3, columns: (hip, knee) signed moment arms (m).
    # M1 flexes the hip forward, M2 extends it, M3 flexes the knee with a
    # small hip coupling; three actuators over-actuate the two joints.
    moment_arm_matrix: tuple[tuple[float, float], ...] = (
        (0.015, 0.0),
        (-0.015, 0.0),
        (0.005, 0.008),
    )
    torque_per_pwm: float = 0.3  # tendon tension per PWM unit (N/unit)
    joint_damping: tuple[float, float] = (0.02, 0.05)  # N m s/rad
    ground_stiffness: float = 1.0e5  # N/m
    ground_damping: float = 600.0  # N s/m
    ground_friction: float = 1.0
    contact_band: float = 0.0  # optional stance-detection proximity (m)
    dt: float = 1.0 / 200.0  # control tick (s)
    substeps: int = 8  # integration substeps per tick
    qd_max: float = 200.0  # divergence guard (rad/s)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if min(self.joint_damping) < 0 or self.ground_stiffness < 0 or self.ground_damping < 0:
            raise ValueError("damping and stiffness must be nonnegative")
        R = np.asarray(self.moment_arm_matrix, dtype=float)
        if R.shape != (3, 2):
            raise ValueError("moment_arm_matrix must be 3x2")
        if np.any(np.all(R == 0.0, axis=1)):
            raise ValueError("every motor needs at least one nonzero moment arm")
        if np.linalg.matrix_rank(R) < 2:
            raise ValueError("moment arm rows must span both joints")

    @property
    def R(self) -> np.ndarray:
        return np.asarray(self.moment_arm_matrix, dtype=float)

    def control_rate(self) -> float:
        return 1.0 / self.dt

    def dynamics_coefficients(self) -> tuple[float, float, float, float, float]:
        """(A, B, C, G1, G2) of the double-pendulum equations of motion."""
        l1 = self.geometry.thigh_length
        m1, m2 = self.segment_masses
        i1, i2 = self.segment_inertias
        lc1, lc2 = self.com_offsets
        A = i1 + m1 * lc1 * lc1 + m2 * l1 * l1
        B = i2 + m2 * lc2 * lc2
        C = m2 * l1 * lc2
        G1 = (m1 * lc1 + m2 * l1) * GRAVITY
        G2 = m2 * lc2 * GRAVITY
        return A, B, C, G1, G2

    def flat(self, hip_height: float) -> np.ndarray:
        """Scalar parameter vector consumed by the step kernels."""
        A, B, C, G1, G2 = self.dynamics_coefficients()
        R = self.R
        g = self.geometry
        return np.array(
            [
                g.thigh_length,
                g.shank_length,
                A,
                B,
                C,
                G1,
                G2,
                self.joint_damping[0],
                self.joint_damping[1],
                self.torque_per_pwm,
                R[0, 0],
                R[0, 1],
                R[1, 0],
                R[1, 1],
                R[2, 0],
                R[2, 1],
                self.ground_stiffness,
                self.ground_damping,
                min(self.ground_friction, 1.0),
                self.dt / self.substeps,
                hip_height,
                g.hip_limits[0],
                g.hip_limits[1],
                g.knee_limits[0],
                g.knee_limits[1],
                self.qd_max,
                self.contact_band,
            ],
            dtype=np.float64,
        )


@dataclass
class PlantState:
    """Joint state of both legs plus the gantry-constrained hip."""

    q: np.ndarray  # (2 legs, 2 joints)
    qd: np.ndarray  # (2, 2)
    hip_x: float = 0.0
    hip_z: float = 1.0
    contact: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=bool))
    displacement: float = 0.0

    def copy(self) -> "PlantState":
        return PlantState(
            q=self.q.copy(),
            qd=self.qd.copy(),
            hip_x=self.hip_x,
            hip_z=self.hip_z,
            contact=self.contact.copy(),
            displacement=self.displacement,
        )


def initial_state(hip_height: float = 1.0,
                  geometry: LegGeometry | None = None) -> PlantState:
    """Both legs at rest under the hip, knees flexed just enough that the
    feet sit on (not inside) the ground when the hip is low."""
    geometry = geometry or LegGeometry()
    l1, l2 = geometry.thigh_length, geometry.shank_length
    if hip_height >= l1 + l2:
        knee = 0.0
    else:
        knee = float(np.arccos(np.clip((hip_height - l1) / l2, -1.0, 1.0)))
        knee = min(knee, geometry.knee_limits[1])
    q = np.array([[0.0, knee], [0.0, knee]])
    return PlantState(q=q, qd=np.zeros((2, 2)), hip_z=hip_height)
