"""Moving-target chase: wait at a corner of the figure-eight, sprint after the ball once it has passed, brake at the fence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..target_filter import TargetEstimate
from ..traj_sync import VehicleState
from .fsm import Machine, Monitor, State, StateGraph
from .geofence import Geofence
from .waypoint import FencedOutput, Waypoint, heading_to

__all__ = ["ChaseParams", "ChaseContext", "ChaseMission", "chase_graph", "must_brake"]


@dataclass(frozen=True)
class ChaseParams:
    corner: tuple[float, float, float] = (-35.0, -15.0, 6.0)
    field_center: tuple[float, float] = (0.0, 0.0)
    lookahead: float = 0.6
    # the net hangs above the vehicle, so fly this far below the ball
    net_offset: float = 1.0
    brake_accel: float = 4.0
    stop_speed: float = 0.5
    # an estimate older than this is no longer worth chasing
    estimate_timeout: float = 1.0
    # the ball must come closer than this before a sprint starts
    engage_range: float = 25.0
    # the vehicle must be this close to the corner to start a chase
    corner_radius: float = 2.0
    # a fresh estimate's velocity is unreliable until its uncertainty drops below this
    max_velocity_sigma: float = 1.5
    reach_z: float = 0.5

    def __post_init__(self):
        if self.lookahead < 0.0 or self.brake_accel <= 0.0:
            raise ValueError("lookahead must be non-negative and brake_accel positive")


def braking_distance(speed: float, accel: float) -> float:
    return speed * speed / (2.0 * accel)


def must_brake(position, velocity, fence: Geofence, accel: float) -> bool:
    """Stopping at ``accel`` would carry the vehicle past the fence."""
    v = np.asarray(velocity[:2], float)
    speed = float(np.linalg.norm(v))
    if speed == 0.0:
        return False
    return braking_distance(speed, accel) > fence.distance_to_boundary(position, v)


@dataclass
class ChaseContext:
    params: ChaseParams
    fence: Geofence
    monitor: Monitor
    fenced: FencedOutput | None = None
    t: float = 0.0
    uav: VehicleState = field(default_factory=VehicleState)
    ball: TargetEstimate | None = None
    ball_age: float = math.inf
    waypoint: Waypoint | None = None
    brakes: int = 0

    @property
    def ball_valid(self) -> bool:
        return self.ball is not None and self.ball_age <= self.params.estimate_timeout

    def command(self, raw, yaw: float) -> None:
        pos = self.fenced(raw, self.uav.position)
        self.waypoint = Waypoint(tuple(float(c) for c in pos), yaw)

    def ball_passed(self) -> bool:
        """The ball moves away from the vehicle, so a chase follows it instead of meeting it head-on."""
        rel = np.asarray(self.ball.position[:2], float) - np.asarray(self.uav.position[:2], float)
        return float(np.dot(rel, np.asarray(self.ball.velocity[:2], float))) > 0.0

    def facing_center(self) -> float:
        c = self.params.field_center
        return heading_to(self.uav.position, (c[0], c[1]), self.uav.yaw)


class Takeoff(State[ChaseContext]):
    successors = ("WaitAtCorner",)

    def execute(self, ctx):
        p = ctx.uav.position
        goal = (p[0], p[1], ctx.params.corner[2])
        ctx.command(goal, ctx.uav.yaw)
        if abs(p[2] - goal[2]) <= ctx.params.reach_z:
            return "WaitAtCorner"
        return None


class WaitAtCorner(State[ChaseContext]):
    successors = ("Chase",)

    def execute(self, ctx):
        ctx.command(ctx.params.corner, ctx.facing_center())
        prm = ctx.params
        at_corner = np.linalg.norm(np.asarray(ctx.uav.position[:2]) - np.asarray(prm.corner[:2])) <= prm.corner_radius
        if at_corner and ctx.ball_valid and ctx.ball.velocity_sigma <= prm.max_velocity_sigma and ctx.ball_passed():
            d = np.linalg.norm(np.asarray(ctx.ball.position[:2]) - np.asarray(ctx.uav.position[:2]))
            if d <= prm.engage_range:
                return "Chase"
        return None


class Chase(State[ChaseContext]):
    successors = ("Brake", "WaitAtCorner")

    def execute(self, ctx):
        if not ctx.ball_valid:
            return "WaitAtCorner"
        if must_brake(ctx.uav.position, ctx.uav.velocity, ctx.fence, ctx.params.brake_accel):
            return "Brake"
        aim = ctx.ball.predict_position(ctx.params.lookahead)
        aim = (aim[0], aim[1], aim[2] - ctx.params.net_offset)
        ctx.command(aim, heading_to(ctx.uav.position, aim, ctx.uav.yaw))
        return None


class Brake(State[ChaseContext]):
    successors = ("WaitAtCorner",)

    def enter(self, ctx):
        ctx.brakes += 1
        p = np.asarray(ctx.uav.position, float)
        v = np.asarray(ctx.uav.velocity, float)
        v[2] = 0.0
        speed = float(np.linalg.norm(v))
        stop = p if speed == 0.0 else p + v / speed * braking_distance(speed, ctx.params.brake_accel)
        self.stop = stop

    def execute(self, ctx):
        if math.hypot(*ctx.uav.velocity[:2]) < ctx.params.stop_speed:
            return "WaitAtCorner"
        ctx.command(self.stop, ctx.uav.yaw)
        return None


STATE_CLASSES = (Takeoff, WaitAtCorner, Chase, Brake)


def chase_graph() -> StateGraph:
    return StateGraph.from_states(STATE_CLASSES, "Takeoff")


class ChaseMission:
    def __init__(self, params: ChaseParams, fence: Geofence, monitor: Monitor | None = None):
        monitor = monitor or Monitor()
        self.ctx = ChaseContext(params, fence, monitor, FencedOutput(fence, monitor))
        self.machine = Machine([cls() for cls in STATE_CLASSES], "Takeoff", monitor)

    @property
    def state(self) -> str | None:
        return self.machine.current

    @property
    def finished(self) -> bool:
        return False

    def tick(self, t: float, uav: VehicleState, ball: TargetEstimate | None, ball_age: float) -> Waypoint:
        """``chase_tick``: ``ball_age`` is the time since the last ball measurement."""
        self.ctx.t = t
        self.ctx.uav = uav
        self.ctx.ball = ball
        self.ctx.ball_age = ball_age
        self.machine.tick(self.ctx, t)
        return self.ctx.waypoint
