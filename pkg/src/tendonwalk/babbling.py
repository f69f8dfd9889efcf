"""Pseudo-random 3-channel PWM babbling generators.

Naive babbling holds independent uniform random levels on each motor
(~1.3 Hz level changes).  Natural babbling rides half-wave sinusoid lobes
on a tonic baseline: the two hip antagonists (M1, M2) run in anti-phase,
the knee channel (M3) drifts 36 deg against M1 every 15 s, amplitudes are
redrawn each cycle, and baselines jitter per window.  The lobe width of a
0.6 Hz half-wave (~0.83 s) matches the naive hold width (~1/1.3 s), so
both strategies change activation at a similar tempo; they differ in
coordination, not speed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDuration

DEFAULT_SAMPLE_RATE = 200.0  # matches the plant control rate
PWM_MAX = 255


@dataclass
class PwmSequence:
    channels: np.ndarray  # (N, 3) integer PWM in [0, 255]
    sample_rate: float
    duration: float
    seed: int

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=np.int64)
        if self.channels.ndim != 2 or self.channels.shape[1] != 3:
            raise ValueError("channels must be (N, 3)")
        if self.channels.min(initial=0) < 0 or self.channels.max(initial=0) > PWM_MAX:
            raise ValueError("PWM values must lie in [0, 255]")

    def __len__(self):
        return len(self.channels)

    @property
    def t(self) -> np.ndarray:
        return np.arange(len(self.channels)) / self.sample_rate


@dataclass(frozen=True)
class NaiveParams:
    step_change_freq: float = 1.3  # Hz
    amplitude_range: tuple[float, float] = (0.0, 255.0)

    def __post_init__(self):
        if not self.amplitude_range[0] < self.amplitude_range[1]:
            raise ValueError("amplitude_range low must be below high")


@dataclass(frozen=True)
class NaturalParams:
    step_freq: float = 6.0  # Hz, zero-order-hold update rate
    sinusoid_freq: float = 0.6  # Hz
    peak_freq: float = 1.3  # Hz, implied by the half-wave lobe width
    m1_m2_phase: float = math.pi
    m1_m2_phase_tol: float = math.radians(20.0)
    m1_m3_phase_increment: float = math.radians(36.0)
    increment_period: float = 15.0  # s
    baseline_nominal: float = 70.0  # PWM units of tonic tension
    baseline_jitter: float = 30.0  # PWM units
    amplitude_range: tuple[float, float] = (30.0, 70.0)

    def __post_init__(self):
        if min(self.step_freq, self.sinusoid_freq, self.peak_freq) <= 0:
            raise ValueError("frequencies must be positive")
        if self.m1_m2_phase_tol > math.radians(20.0) + 1e-12:
            raise ValueError("antagonist phase tolerance capped at 20 deg")
        if not 0 <= self.amplitude_range[0] < self.amplitude_range[1] <= 255:
            raise ValueError("amplitude_range must be a [0, 255] sub-interval")


def _n_samples(duration: float, sample_rate: float) -> int:
    if duration <= 0:
        raise InvalidDuration(f"duration must be positive, got {duration}")
    return int(round(duration * sample_rate))


def generate_naive(duration: float, seed: int, params: NaiveParams | None = None,
                   sample_rate: float = DEFAULT_SAMPLE_RATE) -> PwmSequence:
    """Independent uniform step levels per motor, held ~1/step_change_freq."""
    params = params or NaiveParams()
    n = _n_samples(duration, sample_rate)
    hold = max(1, int(round(sample_rate / params.step_change_freq)))
    n_holds = -(-n // hold)
    rng = np.random.default_rng(seed)
    lo = int(math.ceil(params.amplitude_range[0]))
    hi = int(math.floor(params.amplitude_range[1]))
    levels = rng.integers(lo, hi + 1, size=(n_holds, 3))
    channels = np.repeat(levels, hold, axis=0)[:n]
    return PwmSequence(channels, sample_rate, duration, seed)


def generate_natural(duration: float, seed: int, params: NaturalParams | None = None,
                     sample_rate: float = DEFAULT_SAMPLE_RATE) -> PwmSequence:
    """Anti-phase half-wave sinusoid lobes on a jittered tonic baseline."""
    params = params or NaturalParams()
    n = _n_samples(duration, sample_rate)
    rng = np.random.default_rng(seed)

    psi0 = rng.uniform(0.0, 2.0 * math.pi)
    delta = rng.uniform(-params.m1_m2_phase_tol, params.m1_m2_phase_tol)
    gamma0 = rng.uniform(0.0, 2.0 * math.pi)

    hold = max(1, int(round(sample_rate / params.step_freq)))
    starts = np.arange(0, n, hold)
    t = starts / sample_rate
    window = np.floor(t / params.increment_period).astype(int)
    n_windows = int(window.max()) + 1
    baselines = params.baseline_nominal + rng.uniform(
        -params.baseline_jitter, params.baseline_jitter, size=(n_windows, 3)
    )

    base = 2.0 * math.pi * params.sinusoid_freq * t
    drift = params.m1_m3_phase_increment * window
    theta = np.stack(
        [
            base + psi0,
            base + psi0 + params.m1_m2_phase + delta,
            base + psi0 + gamma0 + drift,
        ],
        axis=1,
    )

    # one amplitude draw per sinusoid cycle per channel
    cycle = np.floor(theta / (2.0 * math.pi)).astype(int)
    lobes = np.maximum(0.0, np.sin(theta))
    held = np.empty_like(theta)
    for ch in range(3):
        amps = rng.uniform(*params.amplitude_range, size=int(cycle[:, ch].max()) + 1)
        held[:, ch] = baselines[window, ch] + amps[cycle[:, ch]] * lobes[:, ch]

    levels = np.clip(np.rint(held), 0, PWM_MAX).astype(np.int64)
    channels = np.repeat(levels, hold, axis=0)[:n]
    return PwmSequence(channels, sample_rate, duration, seed)


def coactivation_index(seq: PwmSequence, ch_a: int = 0, ch_b: int = 1) -> float:
    """Mean over time of min(a, b)/255: 1 when both saturated, 0 when disjoint."""
    if ch_a == ch_b:
        raise ValueError("channels must differ")
    a = seq.channels[:, ch_a]
    b = seq.channels[:, ch_b]
    return float(np.minimum(a, b).mean() / PWM_MAX)


def write_pwm_csv(path, seq: PwmSequence, header_lines=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["t_s", "m1", "m2", "m3"])
        for i, row in enumerate(seq.channels):
            w.writerow([repr(i / seq.sample_rate), int(row[0]), int(row[1]), int(row[2])])


def read_pwm_csv(path, seed: int = -1) -> PwmSequence:
    rows = []
    with open(path) as fh:
        reader = csv.reader(r for r in fh if not r.startswith("#"))
        header = next(reader)
        assert header[0] == "t_s"
        for row in reader:
            rows.append([int(row[1]), int(row[2]), int(row[3])])
    channels = np.asarray(rows, dtype=np.int64)
    # sample rate recovered from the time column is exact for our writer
    with open(path) as fh:
        ts = [float(r.split(",")[0]) for r in fh if not r.startswith(("#", "t_s"))][:2]
    rate = 1.0 / (ts[1] - ts[0]) if len(ts) > 1 else DEFAULT_SAMPLE_RATE
    return PwmSequence(channels, rate, len(channels) / rate, seed)
