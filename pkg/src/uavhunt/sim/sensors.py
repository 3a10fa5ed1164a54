"""Parametric camera models replacing the learned detectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..hypothesis_filter import BalloonDetection
from ..target_filter import TargetDetection
from ..traj_sync import VehicleState


@dataclass(frozen=True)
class SensorParams:
    fov_h_deg: float = 69.0
    fov_v_deg: float = 42.0
    mount_pitch_deg: float = -8.0
    rate_hz: float = 30.0
    reliable_range: float = 24.0
    max_range: float = 44.5
    far_probability: float = 0.2
    angular_sigma_deg: float = 0.2
    # range noise sigma(r) = range_sigma_rel * r + range_sigma_abs
    range_sigma_rel: float = 0.02
    range_sigma_abs: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.far_probability <= 1.0:
            raise ValueError("far_probability must lie in [0, 1]")
        if not 0.0 < self.reliable_range <= self.max_range:
            raise ValueError("need 0 < reliable_range <= max_range")
        if self.rate_hz <= 0.0:
            raise ValueError("rate_hz must be positive")

    def detection_probability(self, r: float) -> float:
        if r <= self.reliable_range:
            return 1.0
        if r > self.max_range:
            return 0.0
        frac = (r - self.reliable_range) / (self.max_range - self.reliable_range)
        return 1.0 + frac * (self.far_probability - 1.0)

    def range_sigma(self, r: float) -> float:
        return self.range_sigma_rel * r + self.range_sigma_abs


class Camera:
    """Forward camera fixed to the vehicle heading, tilted by the mount pitch."""

    def __init__(self, params: SensorParams, pose: VehicleState):
        self.params = params
        self.origin = np.asarray(pose.position, float)
        self.yaw = pose.yaw
        self._c, self._s = math.cos(pose.yaw), math.sin(pose.yaw)

    def angles(self, point) -> tuple[float, float, float]:
        """(azimuth, elevation, range) of a world point in the heading frame."""
        rx, ry, rz = np.asarray(point, float) - self.origin
        bx = self._c * rx + self._s * ry
        by = -self._s * rx + self._c * ry
        return math.atan2(by, bx), math.atan2(rz, math.hypot(bx, by)), math.sqrt(rx * rx + ry * ry + rz * rz)

    def in_frustum(self, point, max_range: float | None = None) -> bool:
        prm = self.params
        az, el, r = self.angles(point)
        limit = prm.max_range if max_range is None else max_range
        return (r <= limit
                and abs(az) <= math.radians(prm.fov_h_deg) / 2.0
                and abs(el - math.radians(prm.mount_pitch_deg)) <= math.radians(prm.fov_v_deg) / 2.0)

    def sees_reliably(self, point) -> bool:
        return self.in_frustum(point, self.params.reliable_range)

    def direction(self, az: float, el: float) -> np.ndarray:
        bx, by, bz = math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)
        return np.array([self._c * bx - self._s * by, self._s * bx + self._c * by, bz])


def sense_balloons(balloons, pose: VehicleState, params: SensorParams, rng: np.random.Generator,
                   timestamp: float = 0.0) -> list[BalloonDetection]:
    """One camera frame of balloon detections.

    Every balloon draws its detection coin and noise samples whether or not
    it is visible, so the random stream does not depend on the flight path.
    """
    cam = Camera(params, pose)
    sig_a = math.radians(params.angular_sigma_deg)
    out = []
    for b in balloons:
        coin, n_az, n_el, n_r = rng.random(), rng.standard_normal(), rng.standard_normal(), rng.standard_normal()
        if not cam.in_frustum(b):
            continue
        az, el, r = cam.angles(b)
        if coin >= params.detection_probability(r):
            continue
        d = cam.direction(az + sig_a * n_az, el + sig_a * n_el)
        d /= np.linalg.norm(d)
        rng_est = max(0.1, r + params.range_sigma(r) * n_r)
        out.append(BalloonDetection(tuple(cam.origin), tuple(d), rng_est, timestamp))
    return out


@dataclass(frozen=True)
class TargetSensorParams:
    max_range: float = 40.0
    meas_sigma: float = 0.3
    focal_px: float = 800.0
    bbox_noise: float = 0.05
    # chance per frame that a visible balloon is reported as a ball
    misclass_probability: float = 0.05
    ball_diameter: float = 0.13
    copter_size: float = 1.0
    balloon_diameter: float = 0.6


def sense_targets(copter, ball, balloons, pose: VehicleState, sensor: SensorParams, params: TargetSensorParams,
                  rng: np.random.Generator, timestamp: float = 0.0) -> tuple[list[TargetDetection], list[TargetDetection]]:
    """Copter and ball detections of one frame, plus occasional balloons mistaken for balls."""
    cam = Camera(sensor, pose)
    copters, balls = [], []
    for kind, pos, size in (("copter", copter, params.copter_size), ("ball", ball, params.ball_diameter)):
        noise = rng.standard_normal(3) * params.meas_sigma
        conf, bbox_n = rng.uniform(0.5, 1.0), rng.standard_normal()
        if pos is None or not cam.in_frustum(pos, params.max_range):
            continue
        r = cam.angles(pos)[2]
        bbox = params.focal_px * size / r * (1.0 + params.bbox_noise * bbox_n)
        det = TargetDetection(kind, tuple(np.asarray(pos, float) + noise), conf, bbox, timestamp)
        (copters if kind == "copter" else balls).append(det)
    for b in balloons:
        coin, conf, bbox_n = rng.random(), rng.uniform(0.3, 0.9), rng.standard_normal()
        if coin >= params.misclass_probability or not cam.in_frustum(b, params.max_range):
            continue
        r = cam.angles(b)[2]
        bbox = params.focal_px * params.balloon_diameter / r * (1.0 + params.bbox_noise * bbox_n)
        # position reported under the ball-size assumption, so only the ray is right
        scale = params.ball_diameter / params.balloon_diameter
        pos = cam.origin + scale * (np.asarray(b, float) - cam.origin)
        balls.append(TargetDetection("ball", tuple(pos), conf, bbox, timestamp))
    return copters, balls
