#!/usr/bin/env python3
"""Benchmark the compiled step kernel against the pure-Python fallback.

Runs the same babbling rollout through both engines and reports ticks/s
plus the speedup; also asserts the two trajectories are identical.
"""

import time

import numpy as np

from tendonwalk.babbling import generate_naive
from tendonwalk.plant import PlantParams, engine, initial_state, run_open_loop


def time_engine(name, seq, params, repeats=3):
    best = float("inf")
    log = None
    for _ in range(repeats):
        state = initial_state(hip_height=0.36, geometry=params.geometry)
        t0 = time.perf_counter()
        log = run_open_loop(state, seq, seq, params, engine_name=name)
        best = min(best, time.perf_counter() - t0)
    return best, log


def main():
    params = PlantParams()
    duration = 30.0
    seq = generate_naive(duration, seed=7)
    n = len(seq)
    print(f"rollout: {n} control ticks x {params.substeps} substeps x 2 legs")

    results = {}
    for name in engine.available_engines():
        elapsed, log = time_engine(name, seq, params)
        results[name] = (elapsed, log)
        print(f"  {name:9s}: {elapsed:8.3f} s  ({n / elapsed:10.0f} ticks/s)")

    if len(results) == 2:
        (tc, lc), (tp, lp) = results["compiled"], results["python"]
        print(f"  speedup: {tp / tc:.1f}x")
        identical = all(
            np.array_equal(getattr(lc, f), getattr(lp, f))
            for f in ("q", "qd", "foot", "hip_x", "contact", "limit_hit")
        )
        print(f"  trajectories bitwise identical: {identical}")


if __name__ == "__main__":
    main()
