import math

import numpy as np
import pytest

from tendonwalk.errors import DatasetTooSmall, NonFiniteInput, ShapeMismatch
from tendonwalk.invmap import (
    Dataset,
    Mlp,
    TrainConfig,
    forward,
    gradient,
    load_checkpoint,
    mse,
    nguyen_widrow_init,
    save_checkpoint,
    scale_pwm_targets,
    train,
)

BETA = 0.7 * 15 ** (1.0 / 6.0)


class TestNguyenWidrow:
    def test_hidden_row_norms(self):
        net = nguyen_widrow_init(seed=0)
        norms = np.linalg.norm(net.W1, axis=1)
        assert np.all(np.abs(norms - BETA) < 1e-9)

    def test_bias_bound(self):
        net = nguyen_widrow_init(seed=1)
        assert np.all(np.abs(net.b1) <= BETA)

    def test_seed_determinism(self):
        a = nguyen_widrow_init(seed=3)
        b = nguyen_widrow_init(seed=3)
        c = nguyen_widrow_init(seed=4)
        assert np.array_equal(a.W1, b.W1) and np.array_equal(a.b1, b.b1)
        assert not np.array_equal(a.W1, c.W1)


class TestForward:
    def test_output_range(self):
        net = nguyen_widrow_init(seed=5)
        rng = np.random.default_rng(0)
        X = rng.normal(scale=50.0, size=(200, 6))
        Y = net.predict(X)
        assert Y.min() >= 0.0 and Y.max() <= 255.0

    def test_zero_net_midpoint(self):
        net = Mlp(W1=np.zeros((15, 6)), b1=np.zeros(15), W2=np.zeros((3, 15)), b2=np.zeros(3))
        y = forward(net, np.ones(6))
        assert np.allclose(y, 127.5, atol=0)

    def test_hand_calculation(self):
        # all weights 0.1, zero biases, unit input: independent scalar eval
        net = Mlp(
            W1=np.full((15, 6), 0.1),
            b1=np.zeros(15),
            W2=np.full((3, 15), 0.1),
            b2=np.zeros(3),
        )
        h = math.tanh(0.1 * 6)
        expected = 127.5 * math.tanh(0.1 * 15 * h) + 127.5
        y = forward(net, np.ones(6))
        assert np.all(np.abs(y - expected) < 1e-10)

    def test_non_finite_rejected(self):
        net = nguyen_widrow_init(seed=2)
        with pytest.raises(NonFiniteInput):
            forward(net, [1, 2, np.nan, 4, 5, 6])


class TestMse:
    def test_equal_is_zero(self):
        x = np.arange(12.0).reshape(4, 3)
        assert mse(x, x) == 0.0

    def test_unit_offset(self):
        x = np.zeros((5, 3))
        assert mse(x + 1.0, x) == 1.0

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(7, 3))
        b = rng.normal(size=(7, 3))
        acc = 0.0
        cnt = 0
        for i in range(7):
            for j in range(3):
                acc += (a[i, j] - b[i, j]) ** 2
                cnt += 1
        assert abs(mse(a, b) - acc / cnt) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            mse(np.zeros((2, 3)), np.zeros((3, 2)))


def numeric_gradient(net, X, Y, h=1e-5):
    params = [net.W1, net.b1, net.W2, net.b2]
    grads = []
    for p in params:
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + h
            yp, _, _ = net.scaled_forward(X)
            lp = mse(yp, Y)
            p[idx] = orig - h
            ym, _, _ = net.scaled_forward(X)
            lm = mse(ym, Y)
            p[idx] = orig
            g[idx] = (lp - lm) / (2 * h)
            it.iternext()
        grads.append(g)
    return grads


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(17)
        for trial in range(5):
            net = nguyen_widrow_init(seed=trial)
            X = rng.normal(size=(4, 6))
            Y = np.tanh(rng.normal(size=(4, 3)))
            analytic = gradient(net, X, Y)
            numeric = numeric_gradient(net, X, Y)
            for ga, gn in zip(analytic, numeric):
                denom = np.maximum(np.abs(gn), 1e-8)
                assert np.max(np.abs(ga - gn) / denom) < 1e-4

    def test_zero_residual_zero_gradient(self):
        net = nguyen_widrow_init(seed=9)
        X = np.random.default_rng(1).normal(size=(6, 6))
        Y, _, _ = net.scaled_forward(X)
        for g in gradient(net, X, Y):
            assert np.all(g == 0.0)

    def test_duplicated_batch_invariance(self):
        net = nguyen_widrow_init(seed=9)
        rng = np.random.default_rng(2)
        X = rng.normal(size=(5, 6))
        Y = np.tanh(rng.normal(size=(5, 3)))
        single = gradient(net, X, Y)
        doubled = gradient(net, np.vstack([X, X]), np.vstack([Y, Y]))
        for gs, gd in zip(single, doubled):
            assert np.allclose(gs, gd, atol=1e-15)


def synthetic_linear_dataset(n=2000, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 6))
    W = rng.normal(scale=0.2, size=(3, 6))
    pwm = np.clip(127.5 + 80.0 * (X @ W.T), 0, 255)
    return Dataset(X, scale_pwm_targets(pwm), provenance="teacher")


class TestTrain:
    def test_too_small(self):
        ds = synthetic_linear_dataset(n=4)
        with pytest.raises(DatasetTooSmall):
            train(ds)

    def test_progress_and_cap(self):
        ds = synthetic_linear_dataset(seed=3)
        net, history = train(ds, TrainConfig(seed=3))
        assert history[-1]["epoch"] <= 100
        assert history[-1]["test_mse"] < history[0]["test_mse"]

    def test_learns_linear_map(self):
        ds = synthetic_linear_dataset(seed=5)
        net, history = train(ds, TrainConfig(seed=5))
        assert min(h["test_mse"] for h in history) < 1e-3

    def test_determinism(self):
        ds = synthetic_linear_dataset(seed=7)
        cfg = TrainConfig(seed=7, max_epochs=12, patience=5)
        n1, h1 = train(ds, cfg)
        n2, h2 = train(ds, cfg)
        assert h1 == h2
        assert np.array_equal(n1.W1, n2.W1) and np.array_equal(n1.W2, n2.W2)

    def test_returns_best_test_weights(self):
        ds = synthetic_linear_dataset(seed=9)
        cfg = TrainConfig(seed=9, max_epochs=15, patience=14)
        net, history = train(ds, cfg)
        best = min(h["test_mse"] for h in history)
        # recompute the test split exactly as train() does
        rng = np.random.default_rng(cfg.seed)
        n = len(ds)
        n_test = max(1, int(round(n * cfg.test_fraction)))
        test_idx = rng.permutation(n)[:n_test]
        y, _, _ = net.scaled_forward(ds.inputs[test_idx])
        assert mse(y, ds.targets[test_idx]) == pytest.approx(best, rel=1e-12)

    def test_early_stopping_plateau(self):
        # tiny lr on an already-converged net plateaus immediately
        ds = synthetic_linear_dataset(n=64, seed=1)
        cfg = TrainConfig(seed=1, learning_rate=0.0, patience=5)
        _, history = train(ds, cfg)
        assert history[-1]["epoch"] == 5

    def test_split_ratio_is_test_over_train(self):
        ds = synthetic_linear_dataset(n=1000, seed=2)
        cfg = TrainConfig(seed=2)
        assert cfg.test_fraction == pytest.approx(0.2)


def test_checkpoint_round_trip_bit_exact(tmp_path):
    ds = synthetic_linear_dataset(n=200, seed=4)
    net, history = train(ds, TrainConfig(seed=4, max_epochs=8, patience=5))
    path = tmp_path / "net.json"
    save_checkpoint(path, net, history)
    back, hist2 = load_checkpoint(path)
    assert np.array_equal(back.W1, net.W1)
    assert np.array_equal(back.b1, net.b1)
    assert np.array_equal(back.W2, net.W2)
    assert np.array_equal(back.b2, net.b2)
    assert np.array_equal(back.input_mean, net.input_mean)
    assert np.array_equal(back.input_scale, net.input_scale)
    assert hist2 == history
