"""Allocentric balloon world model.

Detections are camera rays with a range estimate.  Each detection is assigned
to the nearest hypothesis (by default using the distance from the hypothesis
to the detection ray, which ignores the poorly observed depth), or starts a
new hypothesis.  Hypotheses that drift closer than the merge threshold are
fused.  A hypothesis is confirmed once it has collected enough detections.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "BalloonDetection",
    "Hypothesis",
    "FilterParams",
    "WorldModel",
    "ray_distance",
    "ground_distance",
    "ingest",
    "confirmed",
    "remove_popped",
]

METRICS = ("ray", "ground")


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(3)


@dataclass(frozen=True)
class BalloonDetection:
    ray_origin: tuple[float, float, float]
    ray_direction: tuple[float, float, float]
    range_estimate: float
    timestamp: float = 0.0

    def __post_init__(self):
        d = _vec(self.ray_direction)
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("ray_direction must be a unit vector")
        if not self.range_estimate > 0.0:
            raise ValueError("range_estimate must be positive")

    @classmethod
    def towards(cls, origin, point, range_estimate: float | None = None, timestamp: float = 0.0) -> "BalloonDetection":
        """Detection from ``origin`` looking at ``point``; range defaults to the true distance."""
        o, p = _vec(origin), _vec(point)
        d = p - o
        r = float(np.linalg.norm(d))
        return cls(tuple(o), tuple(d / r), r if range_estimate is None else range_estimate, timestamp)

    @property
    def position(self) -> np.ndarray:
        return _vec(self.ray_origin) + self.range_estimate * _vec(self.ray_direction)


def ray_distance(position, origin, direction) -> float:
    """Distance from ``position`` to the half-line ``origin + s·direction``, s ≥ 0."""
    p, o, d = _vec(position), _vec(origin), _vec(direction)
    rel = p - o
    s = max(0.0, float(rel @ d))
    return float(np.linalg.norm(rel - s * d))


def ground_distance(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass
class Hypothesis:
    uid: int
    history: deque = field(default_factory=lambda: deque(maxlen=8))
    detections: int = 0
    missed: int = 0

    @property
    def position(self) -> np.ndarray:
        return np.mean([p for _, p in self.history], axis=0)

    def add(self, timestamp: float, position: np.ndarray) -> None:
        self.history.append((timestamp, position))
        self.detections += 1
        self.missed = 0


@dataclass(frozen=True)
class FilterParams:
    assign_threshold: float = 2.0
    merge_threshold: float = 2.0
    height_corridor: tuple[float, float] = (1.5, 5.0)
    confirm_count: int = 8
    history_size: int = 8
    max_missed: int = 30
    metric: str = "ray"

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.history_size < 1 or self.confirm_count < 1:
            raise ValueError("history_size and confirm_count must be positive")


class WorldModel:
    """Set of balloon hypotheses.  Mutated in place by ``ingest`` and friends."""

    def __init__(self, params: FilterParams | None = None):
        self.params = params or FilterParams()
        self.hypotheses: list[Hypothesis] = []
        self.discarded = 0
        self._next_uid = 0

    def __len__(self) -> int:
        return len(self.hypotheses)

    def get(self, uid: int) -> Hypothesis | None:
        for h in self.hypotheses:
            if h.uid == uid:
                return h
        return None

    def _distance(self, h: Hypothesis, det: BalloonDetection, point: np.ndarray) -> float:
        if self.params.metric == "ray":
            return ray_distance(h.position, det.ray_origin, det.ray_direction)
        return ground_distance(h.position, point)

    def ingest(self, det: BalloonDetection) -> Hypothesis | None:
        """Add one detection; returns the hypothesis it ended up in, or None if discarded."""
        prm = self.params
        point = det.position
        lo, hi = prm.height_corridor
        if not lo <= point[2] <= hi:
            self.discarded += 1
            return None
        best, best_d = None, prm.assign_threshold
        for h in self.hypotheses:
            d = self._distance(h, det, point)
            if d < best_d:
                best, best_d = h, d
        if best is None:
            best = Hypothesis(self._next_uid, deque(maxlen=prm.history_size))
            self._next_uid += 1
            self.hypotheses.append(best)
        best.add(det.timestamp, point)
        return self._merge(best)

    def _merge(self, touched: Hypothesis) -> Hypothesis:
        thr = self.params.merge_threshold
        changed = True
        while changed:
            changed = False
            hs = self.hypotheses
            for i in range(len(hs)):
                for j in range(i + 1, len(hs)):
                    if np.linalg.norm(hs[i].position - hs[j].position) < thr:
                        keep, drop = (hs[i], hs[j]) if hs[i].uid < hs[j].uid else (hs[j], hs[i])
                        merged = sorted([*keep.history, *drop.history], key=lambda e: e[0])
                        keep.history = deque(merged[-self.params.history_size:], maxlen=self.params.history_size)
                        keep.detections += drop.detections
                        keep.missed = min(keep.missed, drop.missed)
                        hs.remove(drop)
                        if drop is touched:
                            touched = keep
                        changed = True
                        break
                if changed:
                    break
        return touched

    def ingest_frame(self, detections: Iterable[BalloonDetection], in_view: Callable[[np.ndarray], bool]) -> None:
        """Ingest one camera frame and update missed-detection counters.

        ``in_view`` tells whether a position should have been seen by this
        frame.  Visible hypotheses without a detection count a miss;
        unconfirmed ones are pruned after ``max_missed`` misses.
        """
        hit = set()
        for det in detections:
            h = self.ingest(det)
            if h is not None:
                hit.add(h.uid)
        prm = self.params
        keep = []
        for h in self.hypotheses:
            if h.uid not in hit and in_view(h.position):
                h.missed += 1
            if h.missed >= prm.max_missed and h.detections < prm.confirm_count:
                continue
            keep.append(h)
        self.hypotheses = keep

    def is_confirmed(self, h: Hypothesis) -> bool:
        return h.detections >= self.params.confirm_count

    def confirmed_hypotheses(self, uav_position) -> list[Hypothesis]:
        """Confirmed hypotheses, nearest first (3D); ties keep creation order."""
        u = _vec(uav_position)
        hs = [h for h in self.hypotheses if self.is_confirmed(h)]
        return sorted(hs, key=lambda h: (float(np.linalg.norm(h.position - u)), h.uid))

    def confirmed(self, uav_position) -> list[np.ndarray]:
        return [h.position for h in self.confirmed_hypotheses(uav_position)]

    def remove_popped(self, uav_position, radius: float = 0.5) -> Hypothesis | None:
        """Drop the nearest confirmed hypothesis within ``radius`` on the ground plane."""
        best, best_d = None, radius
        for h in self.hypotheses:
            if not self.is_confirmed(h):
                continue
            d = ground_distance(h.position, uav_position)
            if d <= best_d:
                best, best_d = h, d
        if best is not None:
            self.hypotheses.remove(best)
        return best

    def remove(self, uid: int) -> None:
        self.hypotheses = [h for h in self.hypotheses if h.uid != uid]


def ingest(model: WorldModel, detection: BalloonDetection) -> WorldModel:
    model.ingest(detection)
    return model


def confirmed(model: WorldModel, uav_position: Sequence[float]) -> list[np.ndarray]:
    return model.confirmed(uav_position)


def remove_popped(model: WorldModel, uav_position: Sequence[float], radius: float = 0.5) -> WorldModel:
    model.remove_popped(uav_position, radius)
    return model
