"""Quantitative instruments: pixel-occupancy spread, detrended fluctuation
analysis, walking trial statistics, and Welch's two-sample test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (
    ConstantSeries,
    DegenerateRegion,
    InsufficientData,
    SeriesTooShort,
)

PIXEL_SIZE = 1e-3  # 1x1 mm^2 occupancy grid
SUCCESS_DISTANCE = 0.40  # m


@dataclass
class SpreadResult:
    ratio: float
    grid: tuple[int, int]  # (width, height) pixel counts
    occupied: int
    total: int
    region: np.ndarray = field(repr=False, default=None)


@dataclass
class DfaResult:
    alpha: float
    scales: np.ndarray
    fluctuations: np.ndarray
    fit_r2: float


@dataclass
class TrialStats:
    success: bool
    travel_time: float | None
    speed: float | None  # cm/s
    condition: int = 0
    kind: str = ""
    seed: int = -1


def _points_in_polygon(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd rule, vectorized over pts; boundary points count as inside."""
    x = pts[:, 0][:, None]
    z = pts[:, 1][:, None]
    x1 = poly[:, 0][None, :]
    z1 = poly[:, 1][None, :]
    x2 = np.roll(poly[:, 0], -1)[None, :]
    z2 = np.roll(poly[:, 1], -1)[None, :]

    straddle = (z1 <= z) != (z2 <= z)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x1 + (z - z1) * (x2 - x1) / (z2 - z1)
    crossings = np.sum(straddle & (x < x_cross), axis=1)
    inside = (crossings % 2) == 1

    # points effectively on an edge count as inside
    dx, dz = x2 - x1, z2 - z1
    seg_len2 = dx * dx + dz * dz
    t = np.clip(((x - x1) * dx + (z - z1) * dz) / np.where(seg_len2 > 0, seg_len2, 1.0), 0, 1)
    d2 = (x1 + t * dx - x) ** 2 + (z1 + t * dz - z) ** 2
    on_edge = np.any(d2 <= (1e-12) ** 2, axis=1)
    return inside | on_edge


def spread(points: np.ndarray, region: np.ndarray,
           pixel: float = PIXEL_SIZE) -> SpreadResult:
    """Fraction of region-interior pixels visited by any point.

    The region polygon is rasterized on a 1 mm grid aligned to multiples
    of the pixel size; a pixel belongs to the region when its center is
    inside (even-odd rule), and it is occupied when any point maps into it.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    region = np.asarray(region, dtype=float)
    if len(region) < 3:
        raise DegenerateRegion("region needs at least 3 vertices")
    area = 0.5 * abs(
        np.sum(
            region[:, 0] * np.roll(region[:, 1], -1)
            - np.roll(region[:, 0], -1) * region[:, 1]
        )
    )
    if area <= 0.0:
        raise DegenerateRegion("region polygon has zero area")

    x0 = math.floor(region[:, 0].min() / pixel) * pixel
    z0 = math.floor(region[:, 1].min() / pixel) * pixel
    nx = int(math.ceil((region[:, 0].max() - x0) / pixel)) + 1
    nz = int(math.ceil((region[:, 1].max() - z0) / pixel)) + 1

    ii, jj = np.meshgrid(np.arange(nx), np.arange(nz), indexing="ij")
    centers = np.column_stack(
        [x0 + (ii.ravel() + 0.5) * pixel, z0 + (jj.ravel() + 0.5) * pixel]
    )
    interior = _points_in_polygon(centers, region).reshape(nx, nz)
    total = int(interior.sum())
    if total == 0:
        raise DegenerateRegion("region contains no pixel centers at this resolution")

    visited = np.zeros((nx, nz), dtype=bool)
    if len(points):
        pi = np.floor((points[:, 0] - x0) / pixel).astype(int)
        pj = np.floor((points[:, 1] - z0) / pixel).astype(int)
        keep = (pi >= 0) & (pi < nx) & (pj >= 0) & (pj < nz)
        visited[pi[keep], pj[keep]] = True

    occupied = int(np.sum(visited & interior))
    return SpreadResult(
        ratio=occupied / total,
        grid=(nx, nz),
        occupied=occupied,
        total=total,
        region=region,
    )


def default_scales(n: int, n_scales: int = 12, smallest: int = 16) -> np.ndarray:
    largest = n // 8
    if largest < smallest:
        raise SeriesTooShort(f"series of {n} samples supports no scale range")
    raw = np.geomspace(smallest, largest, n_scales)
    return np.unique(np.round(raw).astype(int))


def dfa(series: np.ndarray, scales=None, detrend_order: int = 1,
        integrate_profile: bool = True) -> DfaResult:
    """Fractal scaling component of a series via detrended fluctuations.

    The mean-removed series is integrated into a profile (standard form;
    disable with integrate_profile=False to detrend the raw series), cut
    into non-overlapping boxes per scale, a polynomial trend of the given
    order is removed per box, and the per-box RMS fluctuations are
    averaged per scale.  Alpha is the log-log slope of fluctuation versus
    scale from a linear regression.
    """
    x = np.asarray(series, dtype=float).ravel()
    if np.ptp(x) == 0.0:
        raise ConstantSeries("series has zero fluctuation")
    scales = default_scales(len(x)) if scales is None else np.asarray(scales, dtype=int)
    if len(scales) < 2:
        raise SeriesTooShort("need at least two scales")
    if len(x) < 4 * int(scales.max()):
        raise SeriesTooShort(
            f"series of {len(x)} samples shorter than 4x the largest scale "
            f"{int(scales.max())}"
        )

    y = np.cumsum(x - x.mean()) if integrate_profile else x - x.mean()

    flucts = np.empty(len(scales), dtype=float)
    for k, s in enumerate(scales):
        n_boxes = len(y) // s
        boxes = y[: n_boxes * s].reshape(n_boxes, s)
        t = np.arange(s, dtype=float)
        design = np.vander(t, detrend_order + 1)
        coef, *_ = np.linalg.lstsq(design, boxes.T, rcond=None)
        resid = boxes.T - design @ coef
        rms_per_box = np.sqrt(np.mean(resid * resid, axis=0))
        flucts[k] = rms_per_box.mean()

    logs = np.log(scales.astype(float))
    logf = np.log(flucts)
    fit = stats.linregress(logs, logf)
    return DfaResult(
        alpha=float(fit.slope),
        scales=scales,
        fluctuations=flucts,
        fit_r2=float(fit.rvalue**2),
    )


def endpoint_distance_series(log) -> np.ndarray:
    """(N, 2) per-leg Euclidean foot-to-hip distances from a kinematics log."""
    return np.hypot(log.foot[:, :, 0], log.foot[:, :, 1])


def trial_stats(displacement: np.ndarray, duration: float,
                sample_rate: float | None = None, **meta) -> TrialStats:
    """Success and speed from a (monotone) displacement series.

    The 40 cm crossing time is interpolated between samples; speed is
    40 cm over that time, so speed * travel_time recovers the criterion
    distance exactly.
    """
    d = np.asarray(displacement, dtype=float)
    n = len(d)
    if sample_rate is None:
        sample_rate = n / duration
    crossed = np.flatnonzero(d >= SUCCESS_DISTANCE)
    if len(crossed) == 0:
        return TrialStats(success=False, travel_time=None, speed=None, **meta)
    i = int(crossed[0])
    t_i = (i + 1) / sample_rate
    if i == 0:
        t_cross = t_i
    else:
        frac = (SUCCESS_DISTANCE - d[i - 1]) / (d[i] - d[i - 1])
        t_cross = i / sample_rate + frac / sample_rate
    speed = (SUCCESS_DISTANCE * 100.0) / t_cross
    return TrialStats(success=True, travel_time=t_cross, speed=speed, **meta)


def welch_statistic(group_a, group_b):
    """(t, degrees of freedom) of Welch's unequal-variance statistic."""
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise InsufficientData("each group needs at least 2 values")
    va = a.var(ddof=1) / len(a)
    vb = b.var(ddof=1) / len(b)
    denom = va + vb
    if denom == 0.0:
        return (0.0 if a.mean() == b.mean() else math.inf), float(len(a) + len(b) - 2)
    t = (a.mean() - b.mean()) / math.sqrt(denom)
    df = denom**2 / (va**2 / (len(a) - 1) + vb**2 / (len(b) - 1))
    return float(t), float(df)


def two_sample_test(group_a, group_b) -> float:
    """Two-sided p-value of Welch's t-test."""
    t, df = welch_statistic(group_a, group_b)
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    return float(2.0 * stats.t.sf(abs(t), df))
