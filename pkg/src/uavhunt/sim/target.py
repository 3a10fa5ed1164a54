"""Moving target flying a 3D figure-eight at constant speed."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class FigureEight:
    """Lemniscate of Gerono in the ground plane with a sinusoidal height.

    ``x = cx + a·cos(u)``, ``y = cy + b·sin(2u)``, ``z = z0 + dz·sin(u)``;
    the curve parameter ``u`` is re-timed so the target moves at ``speed``.
    """

    half_length: float = 38.0
    half_width: float = 12.0
    center: tuple[float, float] = (0.0, 0.0)
    altitude: float = 8.0
    altitude_swing: float = 1.5
    speed: float = 10.0
    phase: float = 0.0

    def _curve(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, float)
        return np.stack([
            self.center[0] + self.half_length * np.cos(u),
            self.center[1] + self.half_width * np.sin(2 * u),
            self.altitude + self.altitude_swing * np.sin(u),
        ], axis=-1)

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray]:
        u = np.linspace(0.0, 2 * np.pi, 20001)
        pts = self._curve(u)
        s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
        return u, s

    @property
    def lap_length(self) -> float:
        return float(self._table[1][-1])

    def position(self, t: float) -> np.ndarray:
        u_tab, s_tab = self._table
        s = (self.phase + self.speed * t) % s_tab[-1]
        return self._curve(np.interp(s, s_tab, u_tab))

    def velocity(self, t: float, h: float = 1e-4) -> np.ndarray:
        return (self.position(t + h) - self.position(t - h)) / (2 * h)
