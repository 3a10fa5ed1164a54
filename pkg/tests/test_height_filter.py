"""Laser and barometric height fusion."""

from __future__ import annotations

import numpy as np
import pytest

from workloads import DT, fly_profile, run2_profile
from uavhunt.height_filter import HeightEstimate, HeightFilter, HeightInput, HeightParams, update


class TestHeightTypes:
    def test_dt_positive(self):
        with pytest.raises(ValueError):
            HeightInput(0.0, 0.0)

    def test_estimate_finite(self):
        with pytest.raises(ValueError):
            HeightEstimate(float("nan"), "laser")


class TestUpdate:
    def test_takeoff_follows_baro_then_laser(self):
        rows = fly_profile()
        first_laser = next(t for t, _, _, e in rows if e.source == "laser")
        assert all(e.source == "baro" for t, _, _, e in rows if t < first_laser)
        # the laser is trusted once the estimate reaches 1 m
        assert 1.0 <= run2_profile(first_laser) <= 1.0 + 0.5 * DT + 1e-9

    def test_climb_above_band_extrapolates(self):
        rows = fly_profile()
        above = [(h, e) for t, h, _, e in rows if 30 <= t < 40]
        assert all(e.source == "extrapolated" for _, e in above)
        assert all(e.height == pytest.approx(h, abs=1e-9) for h, e in above)

    def test_blend_rate_limited(self):
        f = HeightFilter()
        f.update(HeightInput(0.0, DT))
        # carried estimate is 4 m while the laser says 3 m
        f.estimate = HeightEstimate(4.0, "extrapolated")
        f._laser_ever = True
        out = f.update(HeightInput(0.0, DT, 3.0))
        assert out.source == "blending"
        assert out.height == pytest.approx(4.0 - 1.5 * DT)

    def test_small_gap_snaps_to_laser(self):
        f = HeightFilter()
        f.update(HeightInput(0.0, DT))
        f.estimate = HeightEstimate(3.2, "extrapolated")
        f._laser_ever = True
        assert update(f, HeightInput(0.0, DT, 3.0)) == HeightEstimate(3.0, "laser")

    def test_baro_offset_immunity(self):
        a = fly_profile(baro_offset=0.0)
        b = fly_profile(baro_offset=431.7)
        lo, hi = HeightParams().valid_band
        for (_, h, _, ea), (*_, eb) in zip(a, b):
            # exactly on a band edge the rounding of the baro delta decides validity
            if min(abs(h - lo), abs(h - hi)) < 1e-6:
                continue
            if ea.source == "laser":
                assert eb.source == "laser"
                assert eb.height == pytest.approx(ea.height, abs=1e-9)

    def test_continuity(self):
        rows = fly_profile(baro_drift=0.02)
        heights = np.array([e.height for *_, e in rows])
        baro = np.array([b for _, _, b, _ in rows])
        correction = np.diff(heights) - np.diff(baro)
        assert np.abs(np.diff(heights)).max() <= HeightParams().snap_threshold + 0.05 + 1e-9
        blending = [i + 1 for i in range(len(rows) - 1) if rows[i + 1][3].source == "blending"]
        assert blending
        assert np.abs(correction[np.array(blending) - 1]).max() <= 1.5 * DT + 1e-9

    def test_invalid_laser_readings_ignored(self):
        f = HeightFilter()
        f.update(HeightInput(0.0, DT))
        for h in np.arange(0.1, 2.0, 0.05):
            f.update(HeightInput(h, DT, h))
        for bad in (None, float("nan"), 0.1, 9.0):
            assert f.update(HeightInput(2.0, DT, bad)).source == "extrapolated"
