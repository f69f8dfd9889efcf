import math

import numpy as np
import pytest

from tendonwalk.babbling import PwmSequence, generate_naive, generate_natural
from tendonwalk.errors import NumericalDivergence, ShapeMismatch
from tendonwalk.kinematics import Condition, desired_trajectory, place_for_condition
from tendonwalk.plant import (
    PlantParams,
    PlantState,
    engine,
    initial_state,
    mechanical_energy,
    run_open_loop,
    run_tracking,
    step,
    tendon_torques,
)

PARAMS = PlantParams()
RATE = PARAMS.control_rate()
SEEDS = [1, 2, 5, 6]


def zero_sequence(duration):
    n = int(round(duration * RATE))
    return PwmSequence(np.zeros((n, 3), dtype=int), RATE, duration, 0)


class TestTendonTorques:
    def test_zero_pwm_zero_torque(self):
        tau = tendon_torques([0, 0, 0], initial_state(), PARAMS)
        assert np.all(tau == 0.0)

    def test_single_channel_scaling(self):
        tau = tendon_torques([255, 0, 0], initial_state(), PARAMS)
        expected = 255 * PARAMS.torque_per_pwm * PARAMS.R[0]
        assert np.allclose(tau, expected, atol=0)

    def test_superposition(self):
        rng = np.random.default_rng(0)
        st = initial_state()
        for _ in range(20):
            a = rng.uniform(0, 120, 3)
            b = rng.uniform(0, 120, 3)
            lhs = tendon_torques(a + b, st, PARAMS)
            rhs = tendon_torques(a, st, PARAMS) + tendon_torques(b, st, PARAMS)
            assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)

    def test_tension_nonnegative_over_babbling(self):
        for seed in SEEDS:
            for seq in (generate_naive(5.0, seed), generate_natural(5.0, seed)):
                forces = PARAMS.torque_per_pwm * seq.channels
                assert forces.min() >= 0.0


class TestPassivePlant:
    def test_settles_to_hanging_equilibrium(self):
        log = run_open_loop(initial_state(), zero_sequence(2.0), zero_sequence(2.0), PARAMS)
        assert np.allclose(log.q[-1], 0.0, atol=1e-6)
        assert np.allclose(log.qd[-1], 0.0, atol=1e-6)

    @pytest.mark.parametrize("seed", range(4))
    def test_energy_non_increasing_after_half_second(self, seed):
        rng = np.random.default_rng(seed)
        q0 = np.column_stack([rng.uniform(-0.8, 0.8, 2), rng.uniform(0.2, 1.4, 2)])
        st = PlantState(q=q0, qd=np.zeros((2, 2)), hip_z=1.0)
        log = run_open_loop(st, zero_sequence(10.0), zero_sequence(10.0), PARAMS)
        e = mechanical_energy(PARAMS, log.q, log.qd)
        start = int(0.5 * RATE)
        assert np.all(np.diff(e[start:]) <= 1e-12)

    def test_displaced_start_comes_to_rest(self):
        st = PlantState(q=np.full((2, 2), 0.6), qd=np.zeros((2, 2)), hip_z=1.0)
        log = run_open_loop(st, zero_sequence(30.0), zero_sequence(30.0), PARAMS)
        assert np.abs(log.qd[-1]).max() < 0.05


class TestStaticBalance:
    def oracle_m1(self, pwm):
        # M1 only: knee torque zero -> shank stays vertical (q2 = q1);
        # hip balance G1 sin(q1) + G2 sin(q1 - q2) = tau1
        _, _, _, G1, _ = PARAMS.dynamics_coefficients()
        tau1 = pwm * PARAMS.torque_per_pwm * PARAMS.R[0, 0]
        q1 = math.asin(tau1 / G1)
        return q1, q1

    def oracle_m3(self, pwm):
        # M3 pulls both joints: knee balance -G2 sin(q1-q2) = tau2,
        # then hip balance gives sin(q1)
        _, _, _, G1, G2 = PARAMS.dynamics_coefficients()
        tau1 = pwm * PARAMS.torque_per_pwm * PARAMS.R[2, 0]
        tau2 = pwm * PARAMS.torque_per_pwm * PARAMS.R[2, 1]
        s12 = -tau2 / G2
        q1 = math.asin((tau1 - G2 * s12) / G1)
        return q1, q1 - math.asin(s12)

    @pytest.mark.parametrize("pwm,oracle", [(100, "oracle_m1"), (60, "oracle_m3")])
    def test_steady_state_matches_static_balance(self, pwm, oracle):
        want = getattr(self, oracle)(pwm)
        n = int(30.0 * RATE)
        channel = {"oracle_m1": 0, "oracle_m3": 2}[oracle]
        ch = np.zeros((n, 3), dtype=int)
        ch[:, channel] = pwm
        seq = PwmSequence(ch, RATE, 30.0, 0)
        log = run_open_loop(initial_state(), seq, seq, PARAMS)
        got = log.q[-1, 0]
        for g, w in zip(got, want):
            assert abs(g - w) / abs(w) < 0.02

    def test_passive_rest_with_knee_tone(self):
        # tonic knee tension alone holds a small rest flexion off the stop
        n = int(20.0 * RATE)
        ch = np.zeros((n, 3), dtype=int)
        ch[:, 2] = 40
        seq = PwmSequence(ch, RATE, 20.0, 0)
        log = run_open_loop(initial_state(), seq, seq, PARAMS)
        assert log.q[-1, 0, 1] > math.radians(2.0)


class TestGroundContact:
    def test_unilateral_no_force_above_ground(self):
        # feet far above ground: contact never fires, motion matches
        # the no-ground (high hip) run exactly
        seq = generate_natural(5.0, seed=3)
        log_hi = run_open_loop(initial_state(hip_height=10.0), seq, seq, PARAMS)
        log_lo = run_open_loop(initial_state(hip_height=0.55), seq, seq, PARAMS)
        assert not log_lo.contact.any()
        assert np.array_equal(log_hi.q, log_lo.q)

    def test_penetration_bounded_over_step_sweep(self):
        worst = 0.0
        for seed in SEEDS:
            for hip_h in (0.34, 0.36, 0.38):
                seq = generate_naive(20.0, seed=seed)
                st = initial_state(hip_height=hip_h, geometry=PARAMS.geometry)
                log = run_open_loop(st, seq, seq, PARAMS)
                pen = np.maximum(0.0, log.foot[:, :, 1] - hip_h)
                worst = max(worst, float(pen.max()))
        assert worst <= 1e-3

    def test_resting_on_ground_stays_supported(self):
        st = initial_state(hip_height=0.36, geometry=PARAMS.geometry)
        log = run_open_loop(st, zero_sequence(5.0), zero_sequence(5.0), PARAMS)
        pen = log.foot[-1, :, 1] - 0.36
        assert np.all(pen > 0)
        assert np.all(pen < 1e-3)


class TestRunOpenLoop:
    def test_log_length_matches_sequence(self):
        seq = generate_natural(3.0, seed=1)
        log = run_open_loop(initial_state(), seq, seq, PARAMS)
        assert len(log) == len(seq)
        assert log.sample_rate == RATE

    def test_length_mismatch_rejected(self):
        a = generate_natural(2.0, seed=1)
        b = generate_natural(3.0, seed=1)
        with pytest.raises(ShapeMismatch):
            run_open_loop(initial_state(), a, b, PARAMS)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_natural_babbling_never_hits_limits(self, seed):
        seq_l = generate_natural(120.0, seed=seed * 1000 + 1)
        seq_r = generate_natural(120.0, seed=seed * 1000 + 2)
        log = run_open_loop(initial_state(), seq_l, seq_r, PARAMS)
        assert int(log.limit_hit.sum()) == 0

    @pytest.mark.parametrize("seed", SEEDS)
    def test_naive_babbling_dwells_on_limits(self, seed):
        seq_l = generate_naive(120.0, seed=seed * 1000 + 1)
        seq_r = generate_naive(120.0, seed=seed * 1000 + 2)
        log = run_open_loop(initial_state(), seq_l, seq_r, PARAMS)
        assert int(log.limit_hit.sum()) > 1000

    def test_determinism(self):
        seq = generate_natural(5.0, seed=9)
        a = run_open_loop(initial_state(), seq, seq, PARAMS)
        b = run_open_loop(initial_state(), seq, seq, PARAMS)
        assert np.array_equal(a.q, b.q)
        assert np.array_equal(a.hip_x, b.hip_x)

    def test_divergence_detected(self):
        st = PlantState(q=np.zeros((2, 2)), qd=np.full((2, 2), 1e4), hip_z=1.0)
        with pytest.raises(NumericalDivergence):
            run_open_loop(st, zero_sequence(0.5), zero_sequence(0.5), PARAMS)


class TestStep:
    def test_single_tick_matches_rollout(self):
        seq = generate_natural(0.5, seed=4)
        state = initial_state()
        for i in range(20):
            state = step(state, seq.channels[i], seq.channels[i], PARAMS)
        log = run_open_loop(initial_state(),
                            PwmSequence(seq.channels[:20], RATE, 0.1, 4),
                            PwmSequence(seq.channels[:20], RATE, 0.1, 4), PARAMS)
        assert np.array_equal(state.q, log.q[-1])
        assert np.array_equal(state.qd, log.qd[-1])
        assert state.hip_x == log.hip_x[-1]


@pytest.mark.skipif(not engine.COMPILED_AVAILABLE, reason="compiled kernel absent")
class TestEnginePairity:
    def test_engines_agree_bitwise(self):
        seq_l = generate_naive(5.0, seed=11)
        seq_r = generate_natural(5.0, seed=12)
        st = initial_state(hip_height=0.36, geometry=PARAMS.geometry)
        a = run_open_loop(st.copy(), seq_l, seq_r, PARAMS, engine_name="compiled")
        b = run_open_loop(st.copy(), seq_l, seq_r, PARAMS, engine_name="python")
        assert np.array_equal(a.q, b.q)
        assert np.array_equal(a.qd, b.qd)
        assert np.array_equal(a.foot, b.foot)
        assert np.array_equal(a.hip_x, b.hip_x)
        assert np.array_equal(a.contact, b.contact)
        assert np.array_equal(a.limit_hit, b.limit_hit)


class TestTracking:
    @pytest.fixture(scope="class")
    def nets(self):
        from tendonwalk.invmap import TrainConfig, dataset_from_log, train

        seq_l = generate_natural(60.0, seed=2001)
        seq_r = generate_natural(60.0, seed=2002)
        log = run_open_loop(initial_state(), seq_l, seq_r, PARAMS)
        out = []
        for leg, seq in ((0, seq_l), (1, seq_r)):
            ds = dataset_from_log(log, leg, seq)
            net, _ = train(ds, TrainConfig(seed=20 + leg, max_epochs=40, patience=5))
            out.append(net)
        return out

    def test_in_air_zero_displacement(self, nets):
        traj = desired_trajectory(PARAMS.geometry)
        placed = place_for_condition(traj, Condition.IN_AIR)
        res = run_tracking(nets[0], nets[1], placed, 10.0, PARAMS,
                           schedule_jitter=0.05, schedule_seed=1)
        assert res.displacement.max() == 0.0
        assert not res.log.contact.any()

    def test_command_stream_invariant_across_conditions(self, nets):
        traj = desired_trajectory(PARAMS.geometry)
        streams = []
        for cond in Condition:
            placed = place_for_condition(traj, cond)
            res = run_tracking(nets[0], nets[1], placed, 10.0, PARAMS,
                               schedule_jitter=0.05, schedule_seed=1)
            streams.append((res.commands_left, res.commands_right))
        for cl, cr in streams[1:]:
            assert np.array_equal(cl, streams[0][0])
            assert np.array_equal(cr, streams[0][1])

    def test_commands_integer_in_range(self, nets):
        traj = desired_trajectory(PARAMS.geometry)
        placed = place_for_condition(traj, Condition.SLIGHT_CONTACT)
        res = run_tracking(nets[0], nets[1], placed, 5.0, PARAMS)
        for c in (res.commands_left, res.commands_right):
            assert c.dtype == np.int64
            assert c.min() >= 0 and c.max() <= 255
