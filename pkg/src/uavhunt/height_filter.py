"""Height above ground from a downward laser and the fused barometric height.

The laser is trusted only inside a height band where it is reliable.  Outside
that band the estimate is carried forward by barometric height changes.  When
the laser comes back and the carried estimate has drifted, the estimate moves
towards the laser at a bounded rate instead of jumping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["HeightInput", "HeightEstimate", "HeightParams", "HeightFilter", "SOURCES"]

# "baro" marks the phase after arming before the laser has been trusted once
SOURCES = ("baro", "laser", "extrapolated", "blending")


@dataclass(frozen=True)
class HeightInput:
    baro_height: float
    dt: float
    laser_range: float | None = None

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class HeightEstimate:
    height: float
    source: str

    def __post_init__(self):
        if not math.isfinite(self.height):
            raise ValueError("height must be finite")
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")


@dataclass(frozen=True)
class HeightParams:
    laser_raw_range: tuple[float, float] = (0.2, 8.0)
    valid_band: tuple[float, float] = (1.0, 5.0)
    max_slope: float = 1.5
    snap_threshold: float = 0.3


class HeightFilter:
    def __init__(self, params: HeightParams | None = None):
        self.params = params or HeightParams()
        self.estimate: HeightEstimate | None = None
        self._baro: float | None = None
        self._laser_ever = False

    def _laser_valid(self, laser: float | None, predicted: float) -> bool:
        if laser is None or not math.isfinite(laser):
            return False
        lo, hi = self.params.laser_raw_range
        band_lo, band_hi = self.params.valid_band
        return lo <= laser <= hi and band_lo <= predicted <= band_hi

    def update(self, inp: HeightInput) -> HeightEstimate:
        prm = self.params
        if self.estimate is None:
            # zero the barometer at arming
            self._baro = inp.baro_height
            self.estimate = HeightEstimate(0.0, "baro")
            return self.estimate
        predicted = self.estimate.height + (inp.baro_height - self._baro)
        self._baro = inp.baro_height
        prev = self.estimate.source
        if not self._laser_valid(inp.laser_range, predicted):
            source = "baro" if not self._laser_ever else "extrapolated"
            self.estimate = HeightEstimate(predicted, source)
            return self.estimate
        self._laser_ever = True
        gap = inp.laser_range - predicted
        step = prm.max_slope * inp.dt
        if prev in ("laser", "blending") and abs(gap) <= step:
            self.estimate = HeightEstimate(inp.laser_range, "laser")
        elif prev != "blending" and abs(gap) <= prm.snap_threshold:
            self.estimate = HeightEstimate(inp.laser_range, "laser")
        else:
            self.estimate = HeightEstimate(predicted + math.copysign(min(abs(gap), step), gap), "blending")
        return self.estimate


def update(state: HeightFilter, inp: HeightInput) -> HeightEstimate:
    return state.update(inp)
