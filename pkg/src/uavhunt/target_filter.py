"""Moving-target tracking: detection gating, balloon rejection and CV Kalman filters.

The target copter and the ball it carries are tracked by two independent
constant-velocity filters.  Ball candidates whose apparent size matches a
balloon at balloon height are discarded before gating.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "TargetDetection",
    "TargetEstimate",
    "CameraModel",
    "select",
    "reject_balloon",
    "ekf_step",
    "TargetTracker",
]

KINDS = ("copter", "ball")


@dataclass(frozen=True)
class TargetDetection:
    kind: str
    position: tuple[float, float, float]
    confidence: float = 1.0
    bbox_height_px: float = 0.0
    timestamp: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")


@dataclass(frozen=True)
class TargetEstimate:
    position: np.ndarray
    velocity: np.ndarray
    covariance: np.ndarray

    @classmethod
    def from_measurement(cls, position, pos_sigma: float = 0.3, vel_sigma: float = 10.0) -> "TargetEstimate":
        cov = np.diag([pos_sigma**2] * 3 + [vel_sigma**2] * 3)
        return cls(np.asarray(position, float).copy(), np.zeros(3), cov)

    @property
    def state(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity])

    @property
    def velocity_sigma(self) -> float:
        """Root of the summed velocity variances."""
        return float(np.sqrt(np.trace(self.covariance[3:, 3:])))

    def predict_position(self, lookahead: float) -> np.ndarray:
        return self.position + lookahead * self.velocity


def _dist(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a, float) - np.asarray(b, float)))


def _best(cands: Sequence[TargetDetection], centre, gate: float) -> TargetDetection | None:
    pool = [c for c in cands if centre is None or _dist(c.position, centre) <= gate]
    if not pool:
        return None
    # stable sort: equal confidences keep list order
    return sorted(pool, key=lambda c: -c.confidence)[0]


def select(
    copters: Sequence[TargetDetection],
    balls: Sequence[TargetDetection],
    prev_copter: TargetEstimate | None = None,
    prev_ball: TargetEstimate | None = None,
    gate: float = 5.0,
) -> tuple[TargetDetection | None, TargetDetection | None]:
    """Pick at most one copter and one ball detection for this frame."""
    copter = _best(copters, None if prev_copter is None else prev_copter.position, gate)
    if copter is not None:
        ball = _best(balls, copter.position, gate)
    else:
        ball = _best(balls, None if prev_ball is None else prev_ball.position, gate)
    return copter, ball


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera: allocentric position and focal length in pixels."""

    position: tuple[float, float, float]
    focal_px: float = 800.0

    def implied_range(self, size_m: float, bbox_height_px: float) -> float:
        return self.focal_px * size_m / bbox_height_px


def reject_balloon(
    ball: TargetDetection,
    camera: CameraModel,
    balloon_diameter: float = 0.6,
    corridor: tuple[float, float] = (1.5, 5.0),
) -> bool:
    """True if the detection is better explained as a balloon.

    The range implied by the bounding-box height under the balloon-size
    assumption is applied along the viewing ray; a resulting height inside
    the balloon corridor marks the detection as a balloon.
    """
    if ball.bbox_height_px <= 0.0:
        return False
    cam = np.asarray(camera.position, float)
    ray = np.asarray(ball.position, float) - cam
    norm = np.linalg.norm(ray)
    if norm == 0.0:
        return False
    rng = camera.implied_range(balloon_diameter, ball.bbox_height_px)
    height = cam[2] + rng * ray[2] / norm
    return corridor[0] <= height <= corridor[1]


def _cv_matrices(dt: float, accel_noise: float) -> tuple[np.ndarray, np.ndarray]:
    F = np.eye(6)
    F[:3, 3:] = dt * np.eye(3)
    q = accel_noise**2
    blk = q * np.array([[dt**4 / 4, dt**3 / 2], [dt**3 / 2, dt * dt]])
    Q = np.kron(blk, np.eye(3))
    return F, Q


_H = np.hstack([np.eye(3), np.zeros((3, 3))])


def ekf_step(
    est: TargetEstimate,
    dt: float,
    measurement=None,
    accel_noise: float = 5.0,
    meas_sigma: float = 0.3,
) -> TargetEstimate:
    """Constant-velocity predict, then a position update if a measurement is given."""
    F, Q = _cv_matrices(dt, accel_noise)
    x = F @ est.state
    P = F @ est.covariance @ F.T + Q
    if measurement is not None:
        R = (meas_sigma**2) * np.eye(3)
        S = _H @ P @ _H.T + R
        K = np.linalg.solve(S.T, (P @ _H.T).T).T
        x = x + K @ (np.asarray(measurement, float) - _H @ x)
        # Joseph form keeps P symmetric positive semidefinite
        IKH = np.eye(6) - K @ _H
        P = IKH @ P @ IKH.T + K @ R @ K.T
    P = 0.5 * (P + P.T)
    return TargetEstimate(x[:3], x[3:], P)


@dataclass
class TargetTracker:
    """Two independent filters, one for the copter and one for the ball."""

    accel_noise: float = 5.0
    meas_sigma: float = 0.3
    gate: float = 5.0
    timeout: float = 1.0
    copter: TargetEstimate | None = None
    ball: TargetEstimate | None = None
    _last: dict = field(default_factory=dict)
    _t: float | None = None

    def update(self, t: float, copters: Sequence[TargetDetection], balls: Sequence[TargetDetection],
               camera: CameraModel | None = None) -> None:
        if camera is not None:
            balls = [b for b in balls if not reject_balloon(b, camera)]
        c, b = select(copters, balls, self.copter, self.ball, self.gate)
        dt = 0.0 if self._t is None else t - self._t
        self._t = t
        self.copter = self._advance("copter", self.copter, c, t, dt)
        self.ball = self._advance("ball", self.ball, b, t, dt)

    def _advance(self, key, est, det, t, dt):
        if est is not None and t - self._last.get(key, t) > self.timeout:
            est = None
        if est is None:
            if det is None:
                return None
            self._last[key] = t
            return TargetEstimate.from_measurement(det.position, self.meas_sigma)
        if det is not None:
            self._last[key] = t
        meas = None if det is None else det.position
        return ekf_step(est, dt, meas, self.accel_noise, self.meas_sigma)
