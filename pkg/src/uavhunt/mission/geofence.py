"""Allowed flying area: an axis-aligned rectangle, an altitude corridor and optional keep-out boxes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Rect", "Geofence"]


@dataclass(frozen=True)
class Rect:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate rectangle {self}")

    def contains(self, x: float, y: float, margin: float = 0.0) -> bool:
        return (self.x_min - margin <= x <= self.x_max + margin
                and self.y_min - margin <= y <= self.y_max + margin)

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))

    def segment_hits(self, a, b) -> bool:
        """Does the open segment a-b pass through the rectangle's interior (slab test)?"""
        t0, t1 = 0.0, 1.0
        for lo, hi, p, d in ((self.x_min, self.x_max, a[0], b[0] - a[0]), (self.y_min, self.y_max, a[1], b[1] - a[1])):
            if d == 0.0:
                if not lo < p < hi:
                    return False
                continue
            ta, tb = (lo - p) / d, (hi - p) / d
            if ta > tb:
                ta, tb = tb, ta
            t0, t1 = max(t0, ta), min(t1, tb)
            if t0 >= t1:
                return False
        return True


@dataclass(frozen=True)
class Geofence:
    area: Rect
    z_min: float = 3.0
    z_max: float = 5.0
    keepouts: tuple[Rect, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.z_min < self.z_max:
            raise ValueError("z_min must be below z_max")

    def contains_xy(self, x: float, y: float, margin: float = 1e-9) -> bool:
        if not self.area.contains(x, y, margin):
            return False
        return not any(k.contains(x, y, -margin) for k in self.keepouts)

    def contains(self, p, margin: float = 1e-9) -> bool:
        return self.contains_xy(p[0], p[1], margin) and self.z_min - margin <= p[2] <= self.z_max + margin

    def clamp(self, p) -> tuple[np.ndarray, bool]:
        """Nearest allowed point to ``p`` and whether it had to move."""
        q = np.asarray(p, float).copy()
        a = self.area
        q[0] = min(max(q[0], a.x_min), a.x_max)
        q[1] = min(max(q[1], a.y_min), a.y_max)
        q[2] = min(max(q[2], self.z_min), self.z_max)
        for k in self.keepouts:
            if k.contains(q[0], q[1], -1e-12):
                # push out through the nearest edge that stays inside the area
                options = []
                for axis, val in ((0, k.x_min), (0, k.x_max), (1, k.y_min), (1, k.y_max)):
                    cand = q.copy()
                    cand[axis] = val
                    if a.contains(cand[0], cand[1]):
                        options.append((abs(q[axis] - val), axis, val))
                if options:
                    _, axis, val = min(options)
                    q[axis] = val
        return q, bool(np.any(np.abs(q - np.asarray(p, float)) > 1e-9))

    def path_clear(self, a, b) -> bool:
        """True if the straight ground track a-b stays out of every keep-out box."""
        return not any(k.segment_hits(a, b) for k in self.keepouts)

    def distance_to_boundary(self, p, direction) -> float:
        """Distance from ``p`` along the horizontal ``direction`` until the allowed area is left."""
        d = np.asarray(direction[:2], float)
        n = float(np.linalg.norm(d))
        if n == 0.0:
            return math.inf
        d = d / n
        a = self.area
        best = math.inf
        for lo, hi, pi, di in ((a.x_min, a.x_max, p[0], d[0]), (a.y_min, a.y_max, p[1], d[1])):
            if di > 0:
                best = min(best, (hi - pi) / di)
            elif di < 0:
                best = min(best, (lo - pi) / di)
        for k in self.keepouts:
            far = np.asarray(p[:2], float) + d * min(best, 1e6)
            if k.segment_hits(p, far):
                # bisect for the entry point
                lo_t, hi_t = 0.0, min(best, 1e6)
                for _ in range(50):
                    mid = 0.5 * (lo_t + hi_t)
                    if k.segment_hits(p, np.asarray(p[:2], float) + d * mid):
                        hi_t = mid
                    else:
                        lo_t = mid
                best = min(best, hi_t)
        return max(best, 0.0)
