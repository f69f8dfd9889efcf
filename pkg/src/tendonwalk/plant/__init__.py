"""Simulated backdrivable tendon-driven biped.

PWM commands become tendon tensions (pull-only), tensions become joint
torques through signed moment arms, and each leg integrates double-
pendulum dynamics with viscous damping, joint-limit stops, and a
unilateral spring-damper ground under the foot.  The gantry fixes hip
height; forward motion comes from stance-foot anchoring: a foot in
contact sweeping backward drags the hip forward, a forward sweep
freewheels.  Commands never depend on simulated state, so ground
adaptation is purely mechanical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..babbling import PwmSequence
from ..errors import NumericalDivergence, ShapeMismatch
from ..kinematics import Trajectory, joint_space_image
from . import engine
from .params import GRAVITY, PlantParams, PlantState, initial_state

__all__ = [
    "GRAVITY",
    "PlantParams",
    "PlantState",
    "KinematicsLog",
    "TrackingResult",
    "initial_state",
    "tendon_torques",
    "step",
    "run_open_loop",
    "run_tracking",
    "desired_joint_tables",
    "command_stream",
    "mechanical_energy",
    "tracking_error_rms",
    "engine",
]

SUCCESS_DISPLACEMENT = 0.40  # m
LEG_PHASE_OFFSETS = (0.0, 0.5)  # left, right half a cycle apart


@dataclass
class KinematicsLog:
    """Per-tick joint kinematics of both legs plus foot and hip records."""

    t: np.ndarray  # (N,)
    q: np.ndarray  # (N, 2 legs, 2 joints)
    qd: np.ndarray
    qdd: np.ndarray
    foot: np.ndarray  # (N, 2, 2) hip-relative (x, z-down)
    contact: np.ndarray  # (N, 2) bool
    limit_hit: np.ndarray  # (N, 2) bool
    hip_x: np.ndarray  # (N,)
    hip_x0: float
    hip_height: float
    sample_rate: float

    def __len__(self):
        return len(self.t)

    def leg_inputs(self, leg: int) -> np.ndarray:
        """(N, 6) kinematics rows [q_hip, q_knee, qd_hip, qd_knee, qdd_hip, qdd_knee]."""
        return np.column_stack(
            [
                self.q[:, leg, 0],
                self.q[:, leg, 1],
                self.qd[:, leg, 0],
                self.qd[:, leg, 1],
                self.qdd[:, leg, 0],
                self.qdd[:, leg, 1],
            ]
        )

    def displacement(self) -> np.ndarray:
        return self.hip_x - self.hip_x0


@dataclass
class TrackingResult:
    log: KinematicsLog
    commands_left: np.ndarray  # (N, 3) int PWM
    commands_right: np.ndarray
    displacement: np.ndarray  # (N,)
    success: bool
    phases: np.ndarray = None  # shared leg clock, before per-leg offsets


def tendon_torques(pwm3, state: PlantState, params: PlantParams) -> np.ndarray:
    """(hip, knee) torques for one leg: tensions k*pwm through the moment arms."""
    pwm = np.asarray(pwm3, dtype=float)
    forces = params.torque_per_pwm * pwm
    return params.R.T @ forces


def _central_diff(y: np.ndarray, dt: float) -> np.ndarray:
    out = np.empty_like(y)
    if len(y) == 1:
        out[:] = 0.0
        return out
    out[1:-1] = (y[2:] - y[:-2]) / (2.0 * dt)
    out[0] = (y[1] - y[0]) / dt
    out[-1] = (y[-1] - y[-2]) / dt
    return out


def _make_log(res, params: PlantParams, hip_x0: float, hip_height: float) -> KinematicsLog:
    n = len(res["hip_x"])
    dt = params.dt
    qdd = _central_diff(res["qd"], dt)
    return KinematicsLog(
        t=(np.arange(n) + 1) * dt,
        q=res["q"],
        qd=res["qd"],
        qdd=qdd,
        foot=res["foot"],
        contact=res["contact"],
        limit_hit=res["limit_hit"],
        hip_x=res["hip_x"],
        hip_x0=hip_x0,
        hip_height=hip_height,
        sample_rate=params.control_rate(),
    )


def _run(state: PlantState, pwm_l: np.ndarray, pwm_r: np.ndarray,
         params: PlantParams, engine_name=None):
    if pwm_l.shape != pwm_r.shape:
        raise ShapeMismatch(f"left {pwm_l.shape} vs right {pwm_r.shape}")
    par = params.flat(state.hip_z)
    res = engine.run_rollout(
        par, state.q, state.qd, state.hip_x, params.substeps,
        np.asarray(pwm_l, dtype=np.float64), np.asarray(pwm_r, dtype=np.float64),
        engine=engine_name,
    )
    if res["status"] >= 0:
        raise NumericalDivergence(
            f"state exceeded sanity bounds at tick {res['status']}"
        )
    return res


def step(state: PlantState, pwm_left, pwm_right, params: PlantParams) -> PlantState:
    """Advance one control tick; returns the new state."""
    pl = np.asarray(pwm_left, dtype=np.float64).reshape(1, 3)
    pr = np.asarray(pwm_right, dtype=np.float64).reshape(1, 3)
    res = _run(state, pl, pr, params)
    new = PlantState(
        q=res["q_final"],
        qd=res["qd_final"],
        hip_x=res["hip_x_final"],
        hip_z=state.hip_z,
        contact=res["contact"][0].copy(),
        displacement=state.displacement + (res["hip_x_final"] - state.hip_x),
    )
    return new


def run_open_loop(initial: PlantState, seq_left: PwmSequence, seq_right: PwmSequence,
                  params: PlantParams, engine_name=None) -> KinematicsLog:
    """Replay two PWM sequences open loop and log kinematics at the control rate."""
    if len(seq_left.channels) != len(seq_right.channels):
        raise ShapeMismatch("left/right sequences differ in length")
    for seq in (seq_left, seq_right):
        if abs(seq.sample_rate - params.control_rate()) > 1e-9:
            raise ValueError("sequence sample rate must match the control rate")
    res = _run(
        initial,
        seq_left.channels.astype(np.float64),
        seq_right.channels.astype(np.float64),
        params,
        engine_name,
    )
    return _make_log(res, params, initial.hip_x, initial.hip_z)


def desired_joint_tables(params: PlantParams, desired: Trajectory):
    """Per-phase desired joint kinematics derived from the foot loop.

    IK maps each loop point to joint space; time derivatives come from
    periodic central differences at the loop's sampling, scaled by the
    cycle period.  Returns (q, qd, qdd) arrays of shape (M, 2).
    """
    qs = joint_space_image(params.geometry, desired)[:-1]
    m = len(qs)
    dt_phase = desired.period / m
    qd = (np.roll(qs, -1, axis=0) - np.roll(qs, 1, axis=0)) / (2.0 * dt_phase)
    qdd = (np.roll(qs, -1, axis=0) - 2.0 * qs + np.roll(qs, 1, axis=0)) / dt_phase**2
    return qs, qd, qdd


def _interp_periodic(table: np.ndarray, frac_idx: np.ndarray) -> np.ndarray:
    m = len(table)
    i0 = np.floor(frac_idx).astype(int) % m
    i1 = (i0 + 1) % m
    w = (frac_idx - np.floor(frac_idx))[:, None]
    return (1.0 - w) * table[i0] + w * table[i1]


def phase_schedule(n_ticks: int, dt: float, period: float,
                   jitter: float = 0.0, seed: int = 0) -> np.ndarray:
    """Trajectory phase in [0, 1) at each control tick.

    With jitter > 0 each cycle's duration is scaled by an independent
    uniform factor in [1-jitter, 1+jitter], mimicking controller timing
    wobble.  The schedule depends only on (duration, period, jitter,
    seed); conditions share it, so tracking commands stay
    condition-invariant.
    """
    base = (np.arange(n_ticks) * dt) / period
    if jitter <= 0.0:
        return base % 1.0
    rng = np.random.default_rng(seed)
    phases = np.empty(n_ticks)
    acc = 0.0
    mult = 1.0 + rng.uniform(-jitter, jitter)
    cycle = 0
    for i in range(n_ticks):
        phases[i] = acc
        acc += dt / (period * mult)
        if int(acc) > cycle:
            cycle = int(acc)
            mult = 1.0 + rng.uniform(-jitter, jitter)
    return phases % 1.0


def command_stream(net, params: PlantParams, desired: Trajectory,
                   phases: np.ndarray, phase_offset: float = 0.0) -> np.ndarray:
    """Open-loop PWM commands for one leg, one row per control tick.

    The inverse map is queried with the desired joint kinematics at each
    tick's trajectory phase; predictions are rounded to integer PWM.
    """
    q_tab, qd_tab, qdd_tab = desired_joint_tables(params, desired)
    frac = ((phases + phase_offset) % 1.0) * len(q_tab)
    inputs = np.hstack(
        [
            _interp_periodic(q_tab, frac),
            _interp_periodic(qd_tab, frac),
            _interp_periodic(qdd_tab, frac),
        ]
    )
    pwm = net.predict(inputs)
    return np.clip(np.rint(pwm), 0, 255).astype(np.int64)


def run_tracking(net_left, net_right, desired: Trajectory, duration: float,
                 params: PlantParams, schedule_jitter: float = 0.03,
                 schedule_seed: int = 0, engine_name=None) -> TrackingResult:
    """Track the placed desired trajectory open loop and report displacement.

    Success means the hip travels SUCCESS_DISPLACEMENT forward within the
    run.  The legs follow the same loop half a cycle apart on a shared,
    optionally jittered, clock.
    """
    n = int(round(duration * params.control_rate()))
    phases = phase_schedule(n, params.dt, desired.period,
                            jitter=schedule_jitter, seed=schedule_seed)
    cmd_l = command_stream(net_left, params, desired, phases, LEG_PHASE_OFFSETS[0])
    cmd_r = command_stream(net_right, params, desired, phases, LEG_PHASE_OFFSETS[1])
    state = initial_state(hip_height=desired.hip_height, geometry=params.geometry)
    res = _run(state, cmd_l.astype(np.float64), cmd_r.astype(np.float64),
               params, engine_name)
    log = _make_log(res, params, state.hip_x, state.hip_z)
    disp = log.displacement()
    return TrackingResult(
        log=log,
        commands_left=cmd_l,
        commands_right=cmd_r,
        displacement=disp,
        success=bool(disp.max() >= SUCCESS_DISPLACEMENT),
        phases=phases,
    )


def tracking_error_rms(log: KinematicsLog, desired: Trajectory,
                       phases: np.ndarray | None = None) -> np.ndarray:
    """Per-leg RMS distance between realized and desired foot paths."""
    n = len(log)
    if phases is None:
        phases = phase_schedule(n, 1.0 / log.sample_rate, desired.period)
    loop = desired.polygon()
    out = np.empty(2)
    for leg in range(2):
        frac = ((phases + LEG_PHASE_OFFSETS[leg]) % 1.0) * len(loop)
        want = _interp_periodic(loop, frac)
        err = log.foot[:, leg, :] - want
        out[leg] = float(np.sqrt(np.mean(np.sum(err * err, axis=1))))
    return out


def mechanical_energy(params: PlantParams, q: np.ndarray, qd: np.ndarray) -> np.ndarray:
    """Total mechanical energy per sample, summed over legs; (N,) array.

    Potential is measured with the hip as datum (hanging straight down is
    the minimum), so passive motion with damping must not increase it.
    """
    A, B, C, G1, G2 = params.dynamics_coefficients()
    q1 = q[..., 0]
    q2 = q[..., 1]
    qd1 = qd[..., 0]
    qd2 = qd[..., 1]
    c2 = np.cos(q2)
    kin = (
        0.5 * (A + B + 2.0 * C * c2) * qd1**2
        + 0.5 * B * qd2**2
        - (B + C * c2) * qd1 * qd2
    )
    pot = -(G1 * np.cos(q1) + G2 * np.cos(q1 - q2))
    e = kin + pot
    return e.sum(axis=-1) if e.ndim > 1 else e
