"""Shared synthetic workloads for the unit and acceptance tests."""

from __future__ import annotations

import numpy as np

from uavhunt.height_filter import HeightFilter, HeightInput
from uavhunt.hypothesis_filter import BalloonDetection, FilterParams, WorldModel
from uavhunt.sim import FigureEight
from uavhunt.target_filter import TargetEstimate, ekf_step

DT = 0.1
BALLOON = np.array([20.0, 0.0, 2.8])


def flyby(metric: str, seed: int, n: int = 100, sigma: float = 3.0) -> WorldModel:
    """A camera slides 10 m sideways about 20 m from one balloon; only the range is noisy."""
    rng = np.random.default_rng(seed)
    model = WorldModel(FilterParams(metric=metric))
    for k in range(n):
        origin = np.array([0.0, -5.0 + 10.0 * k / (n - 1), 4.0])
        r = float(np.linalg.norm(BALLOON - origin))
        model.ingest(BalloonDetection.towards(origin, BALLOON, max(0.1, r + sigma * rng.standard_normal()), k / 30))
    return model


def track_figure_eight(seed: int, seconds: float = 20.0, rate: float = 30.0, sigma: float = 0.3) -> float:
    """RMS position error after the first 3 s of tracking the figure-eight course."""
    rng = np.random.default_rng(seed)
    course = FigureEight()
    dt = 1.0 / rate
    est, errs = None, []
    for k in range(int(seconds * rate)):
        t = k * dt
        truth = course.position(t)
        z = truth + sigma * rng.standard_normal(3)
        est = TargetEstimate.from_measurement(z) if est is None else ekf_step(est, dt, z, meas_sigma=sigma)
        if t >= 3.0:
            errs.append(np.sum((est.position - truth) ** 2))
    return float(np.sqrt(np.mean(errs)))



def run2_profile(t: float) -> float:
    """Takeoff to 3 m, cruise, climb to 7 m, cruise, descend to 3 m."""
    if t < 6:
        return 0.5 * t
    if t < 20:
        return 3.0
    if t < 28:
        return 3.0 + 0.5 * (t - 20)
    if t < 40:
        return 7.0
    if t < 48:
        return 7.0 - 0.5 * (t - 40)
    return 3.0


def fly_profile(baro_drift: float = 0.0, baro_offset: float = 100.0, seconds: float = 60.0):
    f = HeightFilter()
    out = []
    for k in range(int(seconds / DT)):
        t = k * DT
        h = run2_profile(t)
        baro = baro_offset + h + baro_drift * t
        out.append((t, h, baro, f.update(HeightInput(baro, DT, h if h >= 0.2 else None))))
    return out


def source_sequence(rows) -> list[str]:
    seq = []
    for *_, est in rows:
        if not seq or seq[-1] != est.source:
            seq.append(est.source)
    return seq
