"""Inverse-map network: 6 kinematic inputs -> 15 tanh hidden -> 3 motor outputs.

The output layer is tanh followed by a fixed affine map onto the PWM range
[0, 255], so predictions are bounded by construction.  Training minimizes
mean squared error in the scaled [-1, 1] output space with Adam, holding
out a test split for early stopping (patience on the test MSE) and
returning the weights with the best test MSE seen.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetTooSmall, NonFiniteInput, ShapeMismatch

N_IN, N_HIDDEN, N_OUT = 6, 15, 3
OUT_GAIN = 127.5
OUT_OFFSET = 127.5
CHECKPOINT_SCHEMA = "tendonwalk-mlp-v1"


@dataclass
class Mlp:
    W1: np.ndarray  # (15, 6)
    b1: np.ndarray  # (15,)
    W2: np.ndarray  # (3, 15)
    b2: np.ndarray  # (3,)
    input_mean: np.ndarray = field(default_factory=lambda: np.zeros(N_IN))
    input_scale: np.ndarray = field(default_factory=lambda: np.ones(N_IN))
    seed: int = 0

    def copy_weights(self):
        return (self.W1.copy(), self.b1.copy(), self.W2.copy(), self.b2.copy())

    def set_weights(self, weights):
        self.W1, self.b1, self.W2, self.b2 = (w.copy() for w in weights)

    def scaled_forward(self, X: np.ndarray):
        """tanh-space outputs in [-1, 1] plus the hidden activations."""
        u = (X - self.input_mean) / self.input_scale
        h = np.tanh(u @ self.W1.T + self.b1)
        y = np.tanh(h @ self.W2.T + self.b2)
        return y, h, u

    def predict(self, X: np.ndarray) -> np.ndarray:
        """(N, 6) kinematics -> (N, 3) PWM floats in [0, 255]."""
        X = np.asarray(X, dtype=float)
        if not np.all(np.isfinite(X)):
            raise NonFiniteInput("network input contains non-finite values")
        y, _, _ = self.scaled_forward(X)
        return OUT_GAIN * y + OUT_OFFSET


def forward(net: Mlp, x) -> np.ndarray:
    """Single 6-vector -> 3 PWM values."""
    return net.predict(np.asarray(x, dtype=float).reshape(1, N_IN))[0]


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 100
    patience: int = 5
    test_split: float = 0.25  # test/train size ratio, i.e. 20% of all data
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    batch_size: int = 32
    seed: int = 0
    block_split: bool = False  # hold out the trailing samples instead of random

    def __post_init__(self):
        if not 0.0 < self.test_split < 1.0:
            raise ValueError("test_split must be in (0, 1)")
        if self.patience >= self.max_epochs:
            raise ValueError("patience must be below max_epochs")

    @property
    def test_fraction(self) -> float:
        return self.test_split / (1.0 + self.test_split)


@dataclass
class Dataset:
    inputs: np.ndarray  # (N, 6)
    targets: np.ndarray  # (N, 3) scaled to [-1, 1]
    provenance: str = ""

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.inputs.ndim != 2 or self.inputs.shape[1] != N_IN:
            raise ShapeMismatch(f"inputs must be (N, {N_IN})")
        if self.targets.shape != (len(self.inputs), N_OUT):
            raise ShapeMismatch("targets must be (N, 3) matching inputs")
        if not (np.all(np.isfinite(self.inputs)) and np.all(np.isfinite(self.targets))):
            raise NonFiniteInput("dataset contains non-finite entries")

    def __len__(self):
        return len(self.inputs)


def scale_pwm_targets(pwm: np.ndarray) -> np.ndarray:
    return np.asarray(pwm, dtype=float) / OUT_GAIN - 1.0


def dataset_from_log(log, leg: int, seq, kind: str = "") -> Dataset:
    """Pair each tick's 6D kinematics with the PWM that produced it."""
    inputs = log.leg_inputs(leg)
    targets = scale_pwm_targets(seq.channels)
    if len(targets) != len(inputs):
        raise ShapeMismatch("log and PWM sequence lengths differ")
    tag = f"{kind}/leg{leg}/seed{seq.seed}" if kind else f"leg{leg}/seed{seq.seed}"
    return Dataset(inputs, targets, provenance=tag)


def nguyen_widrow_init(seed: int) -> Mlp:
    """Hidden rows rescaled to the Nguyen-Widrow magnitude 0.7*H^(1/D).

    Random directions get a fixed norm that keeps initial pre-activations
    in the responsive region of tanh instead of its saturated tails.
    """
    rng = np.random.default_rng(seed)
    beta = 0.7 * N_HIDDEN ** (1.0 / N_IN)
    W1 = rng.uniform(-1.0, 1.0, size=(N_HIDDEN, N_IN))
    W1 *= beta / np.linalg.norm(W1, axis=1, keepdims=True)
    b1 = rng.uniform(-beta, beta, size=N_HIDDEN)
    W2 = rng.uniform(-0.5, 0.5, size=(N_OUT, N_HIDDEN)) / np.sqrt(N_HIDDEN)
    b2 = np.zeros(N_OUT)
    return Mlp(W1=W1, b1=b1, W2=W2, b2=b2, seed=seed)


def mse(pred: np.ndarray, truth: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ShapeMismatch(f"{pred.shape} vs {truth.shape}")
    d = pred - truth
    return float(np.mean(d * d))


def gradient(net: Mlp, X: np.ndarray, Y: np.ndarray):
    """Analytic gradient of the scaled-space MSE w.r.t. (W1, b1, W2, b2)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if len(X) == 0:
        raise ValueError("batch must be non-empty")
    y, h, u = net.scaled_forward(X)
    n_el = y.size
    dy = 2.0 * (y - Y) / n_el
    dz2 = dy * (1.0 - y * y)
    dW2 = dz2.T @ h
    db2 = dz2.sum(axis=0)
    dh = dz2 @ net.W2
    dz1 = dh * (1.0 - h * h)
    dW1 = dz1.T @ u
    db1 = dz1.sum(axis=0)
    return dW1, db1, dW2, db2


def _adam_step(params, grads, m, v, t, cfg: TrainConfig):
    b1, b2, eps, lr = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon, cfg.learning_rate
    for p, g, mi, vi in zip(params, grads, m, v):
        mi *= b1
        mi += (1.0 - b1) * g
        vi *= b2
        vi += (1.0 - b2) * g * g
        mhat = mi / (1.0 - b1**t)
        vhat = vi / (1.0 - b2**t)
        p -= lr * mhat / (np.sqrt(vhat) + eps)


def train(data: Dataset, cfg: TrainConfig | None = None) -> tuple[Mlp, list[dict]]:
    """Fit the inverse map; returns (best net, per-epoch history).

    History row 0 is the pre-training evaluation; training stops at
    max_epochs or once the test MSE has not improved for `patience`
    epochs, and the returned weights are those of the best test epoch.
    """
    cfg = cfg or TrainConfig()
    n = len(data)
    if n < 8:
        raise DatasetTooSmall(f"need at least 8 samples, got {n}")

    rng = np.random.default_rng(cfg.seed)
    n_test = max(1, int(round(n * cfg.test_fraction)))
    if cfg.block_split:
        test_idx = np.arange(n - n_test, n)
        train_idx = np.arange(n - n_test)
    else:
        perm = rng.permutation(n)
        test_idx = perm[:n_test]
        train_idx = perm[n_test:]

    Xtr, Ytr = data.inputs[train_idx], data.targets[train_idx]
    Xte, Yte = data.inputs[test_idx], data.targets[test_idx]

    net = nguyen_widrow_init(cfg.seed)
    mean = Xtr.mean(axis=0)
    scale = Xtr.std(axis=0)
    scale[scale < 1e-12] = 1.0
    net.input_mean = mean
    net.input_scale = scale

    def eval_mse(X, Y):
        y, _, _ = net.scaled_forward(X)
        return mse(y, Y)

    history = [{"epoch": 0, "train_mse": eval_mse(Xtr, Ytr), "test_mse": eval_mse(Xte, Yte)}]
    best_test = history[0]["test_mse"]
    best_weights = net.copy_weights()
    since_best = 0

    params = [net.W1, net.b1, net.W2, net.b2]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    t = 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(Xtr))
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            grads = gradient(net, Xtr[idx], Ytr[idx])
            t += 1
            _adam_step(params, grads, m, v, t, cfg)

        row = {"epoch": epoch, "train_mse": eval_mse(Xtr, Ytr), "test_mse": eval_mse(Xte, Yte)}
        history.append(row)
        if row["test_mse"] < best_test:
            best_test = row["test_mse"]
            best_weights = net.copy_weights()
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                break

    net.set_weights(best_weights)
    return net, history


def save_checkpoint(path, net: Mlp, history=None, extra=None) -> None:
    doc = {
        "schema": CHECKPOINT_SCHEMA,
        "layer_sizes": [N_IN, N_HIDDEN, N_OUT],
        "output_gain": OUT_GAIN,
        "output_offset": OUT_OFFSET,
        "seed": int(net.seed),
        "W1": net.W1.tolist(),
        "b1": net.b1.tolist(),
        "W2": net.W2.tolist(),
        "b2": net.b2.tolist(),
        "input_mean": net.input_mean.tolist(),
        "input_scale": net.input_scale.tolist(),
        "history": history or [],
    }
    if extra:
        doc["extra"] = extra
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> tuple[Mlp, list[dict]]:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != CHECKPOINT_SCHEMA:
        raise ValueError(f"unsupported checkpoint schema {doc.get('schema')!r}")
    net = Mlp(
        W1=np.array(doc["W1"]),
        b1=np.array(doc["b1"]),
        W2=np.array(doc["W2"]),
        b2=np.array(doc["b2"]),
        input_mean=np.array(doc["input_mean"]),
        input_scale=np.array(doc["input_scale"]),
        seed=doc["seed"],
    )
    return net, doc.get("history", [])
