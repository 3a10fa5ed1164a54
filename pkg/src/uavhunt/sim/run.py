"""Closed-loop simulation: sensors, filters, mission, controller and plant at a fixed tick."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..hypothesis_filter import WorldModel, ground_distance
from ..mission.balloon import BalloonMission
from ..mission.chase import ChaseMission
from ..mission.fsm import Monitor, MonitorEvent
from ..mpc import Controller, ControllerConfig
from ..target_filter import CameraModel, TargetTracker
from ..traj_sync import AxisLimitSet, VehicleState
from .plant import step_plant
from .scenario import Scenario
from .sensors import Camera, sense_balloons, sense_targets

__all__ = ["TRACE_COLUMNS", "SWEEP_COLUMNS", "Trace", "Metrics", "run", "rng_streams", "sweep", "sweep_csv"]

TRACE_COLUMNS = ("t", "x", "y", "z", "vx", "vy", "vz", "yaw", "pitch_cmd", "roll_cmd", "climb_cmd",
                 "fsm_state", "n_hypotheses")
STREAMS = ("balloon_camera", "target_camera", "pop")
# states during which the vehicle is allowed below the altitude corridor
_GROUND_STATES = ("Takeoff", "Land")


def rng_streams(seed: int) -> dict[str, np.random.Generator]:
    """One independent generator per sensor, split deterministically from the scenario seed."""
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {name: np.random.default_rng(ss) for name, ss in zip(STREAMS, children)}


@dataclass
class Trace:
    rows: list[tuple] = field(default_factory=list)
    events: list[MonitorEvent] = field(default_factory=list)

    def append(self, t, state: VehicleState, cmd, fsm_state: str, n_hyp: int) -> None:
        self.rows.append((t, *state.position, *state.velocity, state.yaw, cmd.pitch, cmd.roll, cmd.climb_rate,
                          fsm_state, n_hyp))

    def array(self, column: str) -> np.ndarray:
        i = TRACE_COLUMNS.index(column)
        return np.array([r[i] for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.rows:
            w.writerow([f"{r[0]:.2f}", *(f"{v:.6f}" for v in r[1:11]), r[11], r[12]])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    def event_log(self) -> str:
        return "".join(ev.to_line() + "\n" for ev in self.events)


@dataclass
class Metrics:
    popped: list[bool] = field(default_factory=list)
    tries: list[int] = field(default_factory=list)
    times_s: list[float | None] = field(default_factory=list)
    total_s: float = 0.0
    distance_m: float = 0.0
    violations: int = 0
    warnings: int = 0
    geofence_warnings: int = 0
    max_speed: float = 0.0
    brakes: int = 0
    completed: bool = False

    @property
    def pops(self) -> int:
        return sum(self.popped)

    def as_dict(self) -> dict:
        return {
            "pops": [bool(p) for p in self.popped],
            "tries": list(self.tries),
            "times_s": [None if t is None else round(t, 2) for t in self.times_s],
            "total_s": round(self.total_s, 2),
            "distance_m": round(self.distance_m, 2),
            "violations": self.violations,
            "warnings": self.warnings,
            "geofence_warnings": self.geofence_warnings,
            "max_speed": round(self.max_speed, 3),
            "brakes": self.brakes,
            "completed": self.completed,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2) + "\n"


def _limits_for(base: AxisLimitSet, max_speed: float | None, cache: dict) -> AxisLimitSet:
    if max_speed is None or max_speed >= base.x.v_max:
        return base
    if max_speed not in cache:
        xy = base.x.scaled_velocity(max_speed)
        cache[max_speed] = AxisLimitSet(xy, xy, base.z)
    return cache[max_speed]


class _Sim:
    def __init__(self, sc: Scenario):
        self.sc = sc
        self.rngs = rng_streams(sc.seed)
        self.monitor = Monitor()
        self.controller = Controller(
            ControllerConfig(limits=sc.limits, tick=sc.tick, tilt_limit=sc.tilt_limit, gravity=sc.plant.gravity,
                             climb_lookahead=sc.plant.climb_lag),
            monitor=self.monitor,
        )
        x, y, yaw = sc.start
        self.state = VehicleState((x, y, 0.0), yaw=yaw)
        self.trace = Trace()
        self.metrics = Metrics()
        self.frame = 0
        self._limit_cache: dict = {}

    def _frame_due(self, t: float) -> bool:
        if self.frame / self.sc.sensors.rate_hz <= t + 1e-9:
            self.frame += 1
            return True
        return False

    def _control(self, t, wp, fsm_state, n_hyp):
        target = VehicleState(wp.position, yaw=wp.yaw)
        limits = _limits_for(self.sc.limits, wp.max_speed, self._limit_cache)
        cmd = self.controller.step(self.state, target, limits)
        self.trace.append(t, self.state, cmd, fsm_state, n_hyp)
        return cmd

    def _advance(self, cmd, fsm_state):
        prev = self.state
        self.state = step_plant(prev, cmd, self.sc.tick, self.sc.plant)
        m = self.metrics
        m.distance_m += math.dist(prev.position, self.state.position)
        m.max_speed = max(m.max_speed, math.hypot(*self.state.velocity[:2]))
        p = self.state.position
        fence = self.sc.fence
        ok = fence.contains_xy(p[0], p[1]) and (fsm_state in _GROUND_STATES or fence.z_min - 1e-6 <= p[2] <= fence.z_max + 1e-6)
        if not ok:
            m.violations += 1

    def _finish(self, t):
        m = self.metrics
        m.total_s = t
        self.trace.events = list(self.monitor.log)
        m.warnings = sum(1 for e in self.monitor.log if e.kind == "warning")
        m.geofence_warnings = sum(1 for e in self.monitor.log if e.kind == "warning" and e.detail.startswith("geofence"))


class _HuntSim(_Sim):
    def __init__(self, sc: Scenario):
        super().__init__(sc)
        self.world = WorldModel(sc.filter)
        self.mission = BalloonMission(sc.mission, sc.arena, sc.fence, self.world, self.monitor)
        self.balloons = np.array(sc.balloons, float).reshape(-1, 3)
        n = len(self.balloons)
        self.alive = np.ones(n, bool)
        self.inside = np.zeros(n, bool)
        self.pop_time: list[float | None] = [None] * n

    def _sense(self, t):
        cam_pose = self.state
        dets = sense_balloons(self.balloons[self.alive], cam_pose, self.sc.sensors, self.rngs["balloon_camera"], t)
        cam = Camera(self.sc.sensors, cam_pose)
        self.world.ingest_frame(dets, cam.sees_reliably)

    def _pops(self, t):
        pp = self.sc.pop
        p = np.asarray(self.state.position) + np.asarray(pp.tentacle_offset)
        speed = math.hypot(*self.state.velocity[:2])
        radius = self.sc.balloon_diameter / 2
        rng = self.rngs["pop"]
        for i, b in enumerate(self.balloons):
            if not self.alive[i]:
                continue
            touching = ground_distance(p, b) <= pp.radius and abs(p[2] - b[2]) <= radius
            if touching and not self.inside[i]:
                # one draw per pass through the balloon
                if speed >= pp.min_speed and rng.random() < pp.probability:
                    self.alive[i] = False
                    self.pop_time[i] = t
                    self.monitor.emit("warning", detail=f"balloon {i} popped (ground truth)")
            self.inside[i] = touching

    def run(self) -> tuple[Trace, Metrics]:
        sc = self.sc
        n_ticks = int(round(sc.duration / sc.tick))
        t = 0.0
        for k in range(n_ticks + 1):
            t = k * sc.tick
            self.monitor.clock = t
            if self._frame_due(t):
                self._sense(t)
            wp = self.mission.tick(t, self.state)
            fsm_state = self.mission.state
            if wp is None:
                continue
            cmd = self._control(t, wp, fsm_state, len(self.world))
            if self.mission.finished:
                self.metrics.completed = True
                break
            self._advance(cmd, fsm_state)
            self._pops(t + sc.tick)
        self._finish(t)
        self._tries()
        return self.trace, self.metrics

    def _tries(self):
        m = self.metrics
        n = len(self.balloons)
        m.popped = [not a for a in self.alive]
        m.times_s = list(self.pop_time)
        m.tries = [0] * n
        for att in self.mission.ctx.attempts:
            if att.outcome not in ("popped", "missed") or n == 0:
                continue
            d = [ground_distance(att.target, b) for b in self.balloons]
            m.tries[int(np.argmin(d))] += 1


class _ChaseSim(_Sim):
    def __init__(self, sc: Scenario):
        super().__init__(sc)
        self.mission = ChaseMission(sc.chase, sc.fence, self.monitor)
        self.tracker = TargetTracker(meas_sigma=sc.target_sensor.meas_sigma)
        self.balloons = np.array(sc.balloons, float).reshape(-1, 3)
        self.last_ball = -math.inf
        self.track_errors: list[float] = []

    def _sense(self, t):
        spec = self.sc.target
        copter = spec.course.position(t)
        ball = copter - np.array([0.0, 0.0, spec.ball_drop])
        copters, balls = sense_targets(copter, ball, self.balloons, self.state, self.sc.sensors, self.sc.target_sensor,
                                       self.rngs["target_camera"], t)
        cam = CameraModel(self.state.position, self.sc.target_sensor.focal_px)
        self.tracker.update(t, copters, balls, cam)
        if balls and self.tracker.ball is not None:
            self.last_ball = t
        if self.tracker.ball is not None:
            self.track_errors.append(float(np.linalg.norm(self.tracker.ball.position - ball)))

    def run(self) -> tuple[Trace, Metrics]:
        sc = self.sc
        n_ticks = int(round(sc.duration / sc.tick))
        t = 0.0
        for k in range(n_ticks + 1):
            t = k * sc.tick
            self.monitor.clock = t
            if self._frame_due(t):
                self._sense(t)
            wp = self.mission.tick(t, self.state, self.tracker.ball, t - self.last_ball)
            cmd = self._control(t, wp, self.mission.state, 0)
            self._advance(cmd, self.mission.state)
        self._finish(t)
        self.metrics.brakes = self.mission.ctx.brakes
        self.metrics.completed = True
        return self.trace, self.metrics


def run(scenario: Scenario) -> tuple[Trace, Metrics]:
    """Simulate ``scenario`` to completion (or its duration limit)."""
    sim = _ChaseSim(scenario) if scenario.kind == "chase" else _HuntSim(scenario)
    return sim.run()


SWEEP_COLUMNS = ("scenario", "strategy", "seed", "pops", "balloons", "tries_per_balloon", "total_s", "distance_m",
                 "violations", "geofence_warnings", "max_speed", "brakes")


def sweep(scenario: Scenario, seeds, strategies=(None,)) -> list[dict]:
    """One metrics row per (strategy, seed); ``None`` keeps the scenario's own strategy."""
    rows = []
    for strategy in strategies:
        for seed in seeds:
            sc = scenario.with_(seed=int(seed)) if strategy is None else scenario.with_(seed=int(seed), strategy=strategy)
            _, m = run(sc)
            n = len(sc.balloons)
            rows.append({
                "scenario": sc.name,
                "strategy": sc.mission.strategy if sc.kind == "hunt" else "chase",
                "seed": int(seed),
                "pops": m.pops,
                "balloons": n,
                "tries_per_balloon": sum(m.tries) / n if n else 0.0,
                "total_s": round(m.total_s, 2),
                "distance_m": round(m.distance_m, 2),
                "violations": m.violations,
                "geofence_warnings": m.geofence_warnings,
                "max_speed": round(m.max_speed, 3),
                "brakes": m.brakes,
            })
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
