"""Scenario description and its YAML form.

Everything is expressed in the field frame: origin at the arena center,
x along the long side.  ``field_center`` and ``field_orientation`` place that
frame in the world and are only used when exporting world coordinates.

Schema (all keys optional except ``balloons`` for a hunt)::

    name: grand_challenge
    seed: 3
    tick: 0.02
    duration: 300
    arena: {length: 90, width: 40, center: [0, 0], orientation_deg: 0}
    geofence: {inset: 1.0, z_min: 3.0, z_max: 5.0,
               keepouts: [[x_min, x_max, y_min, y_max], ...]}
    start: [x, y, yaw_deg]
    balloons: [[x, y], [x, y, z], ...]      # z defaults to balloon_height
    balloon_height: 2.8
    balloon_diameter: 0.6
    strategy: star
    mission: {...MissionParams fields...}
    sensors: {...SensorParams fields...}
    plant: {climb_lag: 0.15, attitude_mode: ramp}
    limits: {xy: [v, a, j], z: [v, a, j]}
    tilt_limit_deg: 35
    pop: {tentacle_offset: [0, 0, -0.7], radius: 0.5, min_speed: 1.0, probability: 1.0}
    filter: {...FilterParams fields...}
    target: {half_length: 38, half_width: 12, altitude: 8, speed: 10, ball_drop: 1.5}
    target_sensor: {...TargetSensorParams fields...}
    chase: {...ChaseParams fields...}
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from ..hypothesis_filter import FilterParams
from ..mission.balloon import MissionParams
from ..mission.chase import ChaseParams
from ..mission.geofence import Geofence, Rect
from ..traj1d import AxisLimits, TABLE1_XY, TABLE1_Z
from ..traj_sync import AxisLimitSet
from .plant import PlantParams
from .sensors import SensorParams, TargetSensorParams
from .target import FigureEight

__all__ = ["Scenario", "PopParams", "TargetSpec", "load_scenario", "bundled_scenarios"]


@dataclass(frozen=True)
class PopParams:
    tentacle_offset: tuple[float, float, float] = (0.0, 0.0, -0.7)
    radius: float = 0.5
    min_speed: float = 1.0
    probability: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("pop probability must lie in [0, 1]")


@dataclass(frozen=True)
class TargetSpec:
    course: FigureEight = field(default_factory=FigureEight)
    # the ball hangs this far below the target copter
    ball_drop: float = 1.5
    ball_diameter: float = 0.13


@dataclass(frozen=True)
class Scenario:
    name: str = "scenario"
    seed: int = 0
    tick: float = 0.02
    duration: float = 300.0
    arena: Rect = Rect(-45.0, 45.0, -20.0, 20.0)
    field_center: tuple[float, float] = (0.0, 0.0)
    field_orientation: float = 0.0
    fence: Geofence = Geofence(Rect(-44.0, 44.0, -19.0, 19.0))
    start: tuple[float, float, float] = (-40.0, -15.0, 0.0)
    balloons: tuple[tuple[float, float, float], ...] = ()
    balloon_diameter: float = 0.6
    mission: MissionParams = MissionParams()
    sensors: SensorParams = SensorParams()
    plant: PlantParams = PlantParams()
    limits: AxisLimitSet = AxisLimitSet()
    tilt_limit: float = math.radians(35.0)
    pop: PopParams = PopParams()
    filter: FilterParams = FilterParams()
    target: TargetSpec | None = None
    target_sensor: TargetSensorParams = TargetSensorParams()
    chase: ChaseParams = ChaseParams()

    def __post_init__(self):
        if self.tick <= 0.0:
            raise ValueError("tick must be positive")
        for b in self.balloons:
            if not self.arena.contains(b[0], b[1]):
                raise ValueError(f"balloon {b} lies outside the arena")

    @property
    def kind(self) -> str:
        return "chase" if self.target is not None else "hunt"

    def with_(self, **changes) -> "Scenario":
        """Copy with top-level fields replaced; ``strategy`` is routed into the mission params."""
        if "strategy" in changes:
            changes["mission"] = replace(changes.get("mission", self.mission), strategy=changes.pop("strategy"))
        return replace(self, **changes)

    def to_world(self, xy) -> np.ndarray:
        c, s = math.cos(self.field_orientation), math.sin(self.field_orientation)
        xy = np.asarray(xy, float)
        return np.array([c * xy[0] - s * xy[1], s * xy[0] + c * xy[1]]) + np.asarray(self.field_center)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Scenario":
        d = dict(d)
        unknown = set(d) - _KNOWN_KEYS
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        kw: dict[str, Any] = {}
        for key in ("name", "seed", "tick", "duration", "balloon_diameter"):
            if key in d:
                kw[key] = d[key]
        arena = d.get("arena", {})
        length, width = float(arena.get("length", 90.0)), float(arena.get("width", 40.0))
        kw["arena"] = Rect(-length / 2, length / 2, -width / 2, width / 2)
        kw["field_center"] = tuple(arena.get("center", (0.0, 0.0)))
        kw["field_orientation"] = math.radians(arena.get("orientation_deg", 0.0))
        gf = d.get("geofence", {})
        inset = float(gf.get("inset", 1.0))
        kw["fence"] = Geofence(
            Rect(-length / 2 + inset, length / 2 - inset, -width / 2 + inset, width / 2 - inset),
            float(gf.get("z_min", 3.0)),
            float(gf.get("z_max", 5.0)),
            tuple(Rect(*map(float, k)) for k in gf.get("keepouts", ())),
        )
        if "start" in d:
            x, y, yaw = d["start"]
            kw["start"] = (float(x), float(y), math.radians(yaw))
        height = float(d.get("balloon_height", 2.8))
        kw["balloons"] = tuple(
            (float(b[0]), float(b[1]), float(b[2]) if len(b) > 2 else height) for b in d.get("balloons", ())
        )
        mission = _build(MissionParams, d.get("mission", {}))
        if "strategy" in d:
            mission = replace(mission, strategy=d["strategy"])
        kw["mission"] = mission
        kw["sensors"] = _build(SensorParams, d.get("sensors", {}))
        kw["plant"] = _build(PlantParams, d.get("plant", {}))
        lim = d.get("limits", {})
        xy = AxisLimits.symmetric(*lim["xy"]) if "xy" in lim else TABLE1_XY
        z = AxisLimits.symmetric(*lim["z"]) if "z" in lim else TABLE1_Z
        kw["limits"] = AxisLimitSet(xy, xy, z)
        if "tilt_limit_deg" in d:
            kw["tilt_limit"] = math.radians(d["tilt_limit_deg"])
        pop = dict(d.get("pop", {}))
        if "tentacle_offset" in pop:
            pop["tentacle_offset"] = tuple(map(float, pop["tentacle_offset"]))
        kw["pop"] = PopParams(**pop)
        kw["filter"] = _build(FilterParams, d.get("filter", {}))
        if d.get("target"):
            tgt = dict(d["target"])
            spec = {k: tgt.pop(k) for k in ("ball_drop", "ball_diameter") if k in tgt}
            if "center" in tgt:
                tgt["center"] = tuple(tgt["center"])
            kw["target"] = TargetSpec(FigureEight(**tgt), **spec)
        kw["target_sensor"] = _build(TargetSensorParams, d.get("target_sensor", {}))
        chase = dict(d.get("chase", {}))
        for key in ("corner", "field_center"):
            if key in chase:
                chase[key] = tuple(map(float, chase[key]))
        kw["chase"] = ChaseParams(**chase)
        return cls(**kw)


_KNOWN_KEYS = {
    "name", "seed", "tick", "duration", "arena", "geofence", "start", "balloons", "balloon_height",
    "balloon_diameter", "strategy", "mission", "sensors", "plant", "limits", "tilt_limit_deg", "pop",
    "filter", "target", "target_sensor", "chase",
}


def _build(cls, values: dict):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - names
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    values = {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}
    return cls(**values)


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("uavhunt") / "scenarios"
    return {Path(p.name).stem: Path(str(p)) for p in root.iterdir() if p.name.endswith(".yaml")}


def load_scenario(path_or_name: str | Path) -> Scenario:
    """Load a scenario file, or a bundled scenario by name."""
    path = Path(path_or_name)
    if not path.exists():
        bundled = bundled_scenarios()
        if str(path_or_name) not in bundled:
            raise FileNotFoundError(f"no scenario file or bundled scenario named {path_or_name!r}")
        path = bundled[str(path_or_name)]
    with open(path, encoding="utf-8") as fh:
        return Scenario.from_dict(yaml.safe_load(fh) or {})
