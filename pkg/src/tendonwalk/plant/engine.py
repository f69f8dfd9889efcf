"""Step-kernel selection: compiled extension when available, else the
pure-Python reference.  Both produce identical trajectories; the compiled
kernel is simply faster.  Set TENDONWALK_PURE_PYTHON=1 to force the
fallback."""

from __future__ import annotations

import os

import numpy as np

from . import _reference

if os.environ.get("TENDONWALK_PURE_PYTHON"):
    _core = None
else:
    try:
        from . import _core
    except ImportError:
        _core = None

COMPILED_AVAILABLE = _core is not None
DEFAULT_ENGINE = "compiled" if COMPILED_AVAILABLE else "python"


def available_engines() -> tuple[str, ...]:
    return ("compiled", "python") if COMPILED_AVAILABLE else ("python",)


def run_rollout(par, q, qd, hip_x, n_sub, pwm_l, pwm_r, engine=None):
    """Run the kernel over the whole PWM stream.

    par: flat parameter vector; q, qd: (2,2) float arrays (not mutated);
    pwm_l, pwm_r: (n,3) float64 arrays.  Returns a dict of log arrays, the
    final (q, qd, hip_x), and the failing tick (-1 when none).
    """
    engine = engine or DEFAULT_ENGINE
    if engine == "compiled" and not COMPILED_AVAILABLE:
        raise RuntimeError("compiled kernel not available in this install")
    if engine not in ("compiled", "python"):
        raise ValueError(f"unknown engine {engine!r}")

    n = pwm_l.shape[0]
    q_out = np.empty((n, 2, 2))
    qd_out = np.empty((n, 2, 2))
    foot_out = np.empty((n, 2, 2))
    contact_out = np.zeros((n, 2), dtype=np.uint8)
    limit_out = np.zeros((n, 2), dtype=np.uint8)
    hipx_out = np.empty(n)

    if engine == "compiled":
        # the kernel advances these in place; never alias caller state
        q_work = np.array(q, dtype=np.float64, order="C", copy=True)
        qd_work = np.array(qd, dtype=np.float64, order="C", copy=True)
        status = _core.rollout(
            np.ascontiguousarray(par),
            q_work,
            qd_work,
            float(hip_x),
            int(n_sub),
            np.ascontiguousarray(pwm_l, dtype=np.float64),
            np.ascontiguousarray(pwm_r, dtype=np.float64),
            q_out,
            qd_out,
            foot_out,
            contact_out,
            limit_out,
            hipx_out,
        )
        q_fin, qd_fin = q_work, qd_work
    else:
        q_list = [[float(q[i, j]) for j in range(2)] for i in range(2)]
        qd_list = [[float(qd[i, j]) for j in range(2)] for i in range(2)]
        status = _reference.rollout(
            [float(v) for v in par],
            q_list,
            qd_list,
            float(hip_x),
            int(n_sub),
            pwm_l.tolist(),
            pwm_r.tolist(),
            q_out,
            qd_out,
            foot_out,
            contact_out,
            limit_out,
            hipx_out,
        )
        q_fin = np.array(q_list)
        qd_fin = np.array(qd_list)

    hip_fin = float(hipx_out[n - 1]) if n else float(hip_x)
    return {
        "q": q_out,
        "qd": qd_out,
        "foot": foot_out,
        "contact": contact_out.astype(bool),
        "limit_hit": limit_out.astype(bool),
        "hip_x": hipx_out,
        "q_final": q_fin,
        "qd_final": qd_fin,
        "hip_x_final": hip_fin,
        "status": int(status),
    }
