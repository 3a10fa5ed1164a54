"""Waypoint command shared by the mission FSMs and the fence check that guards it."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fsm import Monitor
from .geofence import Geofence


@dataclass(frozen=True)
class Waypoint:
    position: tuple[float, float, float]
    yaw: float = 0.0
    # speed cap handed to the planner; None keeps the default limits
    max_speed: float | None = None


def heading_to(src, dst, fallback: float) -> float:
    dx, dy = dst[0] - src[0], dst[1] - src[1]
    if math.hypot(dx, dy) < 1.0:
        return fallback
    return math.atan2(dy, dx)


class FencedOutput:
    """Clamps waypoints into the fence and warns once per distinct waypoint."""

    def __init__(self, fence: Geofence, monitor: Monitor):
        self.fence = fence
        self.monitor = monitor
        self._last_key: tuple | None = None
        self.clamps = 0
        self.crossings = 0

    def __call__(self, raw, uav_position) -> np.ndarray:
        out, moved = self.fence.clamp(raw)
        # estimates refine every frame; warn once per ~0.5 m change of the raw point
        key = tuple(np.round(np.asarray(raw, float) * 2.0) / 2.0)
        if key != self._last_key:
            self._last_key = key
            if moved:
                self.clamps += 1
                self.monitor.warning(
                    "geofence clamp ({:.2f}, {:.2f}, {:.2f}) -> ({:.2f}, {:.2f}, {:.2f})".format(*raw, *out))
            if not self.fence.path_clear(uav_position, out):
                self.crossings += 1
                self.monitor.warning("geofence path crosses keep-out to ({:.2f}, {:.2f})".format(out[0], out[1]))
        return out
