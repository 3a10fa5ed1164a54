"""Balloon hunt: alternate between a creeping-line search and fly-through pop attempts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..hypothesis_filter import WorldModel, ground_distance
from ..traj_sync import VehicleState
from .fsm import Machine, Monitor, State, StateGraph
from .geofence import Geofence, Rect
from .waypoint import FencedOutput, Waypoint, heading_to

__all__ = ["MissionParams", "Attempt", "BalloonContext", "BalloonMission", "balloon_graph", "STRATEGIES"]

STRATEGIES = ("direct", "star")


@dataclass(frozen=True)
class MissionParams:
    search_speed: float = 5.0
    search_altitude: float = 4.0
    lane_inset: float = 10.0
    approach_behind: float = 2.0
    approach_above: float = 0.7
    exit_beyond: float = 3.0
    pop_radius: float = 0.5
    strategy: str = "star"
    reach_xy: float = 1.0
    reach_z: float = 0.5
    confirm_debounce: int = 3
    expected_balloons: int | None = 5
    idle_search_cycles: int = 1
    # a lost target may reappear as a merged hypothesis within this distance
    relink_radius: float = 2.0
    # the pass is re-aimed only when the target estimate moves further than this
    retarget_threshold: float = 0.1

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        positive = (self.search_speed, self.search_altitude, self.lane_inset, self.approach_behind,
                    self.approach_above, self.exit_beyond, self.pop_radius, self.reach_xy, self.reach_z)
        if min(positive) <= 0.0:
            raise ValueError("mission distances and speeds must be positive")


@dataclass
class Attempt:
    """One fly-through; ``outcome`` is popped, missed or canceled."""

    uid: int
    start: float
    target: tuple[float, float, float]
    outcome: str = ""
    end: float = math.nan


@dataclass
class BalloonContext:
    params: MissionParams
    arena: Rect
    fence: Geofence
    world: WorldModel
    monitor: Monitor
    fenced: FencedOutput | None = None
    t: float = 0.0
    uav: VehicleState = field(default_factory=VehicleState)
    waypoint: Waypoint | None = None
    popped: int = 0
    attempts: list[Attempt] = field(default_factory=list)
    # ordered list of emitted waypoint targets, with the state that emitted them
    route: list[tuple[str, tuple[float, float, float]]] = field(default_factory=list)
    _confirm_ticks: int = 0

    @property
    def position(self) -> np.ndarray:
        return np.asarray(self.uav.position)

    @property
    def center(self) -> np.ndarray:
        cx, cy = self.arena.center
        return np.array([cx, cy, self.params.search_altitude])

    def reached(self, point) -> bool:
        p = self.uav.position
        return (math.hypot(p[0] - point[0], p[1] - point[1]) <= self.params.reach_xy
                and abs(p[2] - point[2]) <= self.params.reach_z)

    def done(self) -> bool:
        n = self.params.expected_balloons
        return n is not None and self.popped >= n

    def target_ready(self) -> bool:
        """Debounced: some hypothesis has been confirmed for several consecutive ticks."""
        if self.world.confirmed_hypotheses(self.position):
            self._confirm_ticks += 1
        else:
            self._confirm_ticks = 0
        return self._confirm_ticks >= self.params.confirm_debounce

    def command(self, state: str, raw, yaw: float | None = None, speed: float | None = None) -> None:
        pos = self.fenced(raw, self.uav.position)
        if yaw is None:
            prev = self.uav.yaw if self.waypoint is None else self.waypoint.yaw
            yaw = heading_to(self.uav.position, pos, prev)
        wp = Waypoint(tuple(float(c) for c in pos), yaw, speed)
        if not self.route or self.route[-1][1] != wp.position:
            self.route.append((state, wp.position))
        self.waypoint = wp


class Takeoff(State[BalloonContext]):
    successors = ("Search",)

    def enter(self, ctx):
        p = ctx.uav.position
        self.goal = np.array([p[0], p[1], ctx.params.search_altitude])

    def execute(self, ctx):
        ctx.command("Takeoff", self.goal, yaw=ctx.uav.yaw)
        if abs(ctx.uav.position[2] - self.goal[2]) <= ctx.params.reach_z:
            return "Search"
        return None


def creeping_line(arena: Rect, inset: float, altitude: float) -> list[np.ndarray]:
    """Two lanes along the long axis, inset from the arena limits, flown as a loop."""
    long_x = (arena.x_max - arena.x_min) >= (arena.y_max - arena.y_min)
    if long_x:
        a0, a1 = arena.x_min + inset, arena.x_max - inset
        b0, b1 = arena.y_min + inset, arena.y_max - inset
        pts = [(a0, b0), (a1, b0), (a1, b1), (a0, b1)]
    else:
        a0, a1 = arena.y_min + inset, arena.y_max - inset
        b0, b1 = arena.x_min + inset, arena.x_max - inset
        pts = [(b0, a0), (b0, a1), (b1, a1), (b1, a0)]
    return [np.array([x, y, altitude]) for x, y in pts]


class Search(State[BalloonContext]):
    successors = ("Pop", "Land")

    def enter(self, ctx):
        self.pattern = creeping_line(ctx.arena, ctx.params.lane_inset, ctx.params.search_altitude)
        d = [np.linalg.norm(w[:2] - ctx.position[:2]) for w in self.pattern]
        self.index = int(np.argmin(d))
        self.visited = 0

    def execute(self, ctx):
        if ctx.done():
            return "Land"
        if ctx.target_ready():
            return "Pop"
        wp = self.pattern[self.index]
        if ctx.reached(wp):
            self.index = (self.index + 1) % len(self.pattern)
            self.visited += 1
            if self.visited > len(self.pattern) * ctx.params.idle_search_cycles:
                return "Land"
            wp = self.pattern[self.index]
        ctx.command("Search", wp, speed=ctx.params.search_speed)
        return None


class Pop(State[BalloonContext]):
    """Approach point behind and above the balloon, then a straight pass to an exit point."""

    successors = ("Pop", "ReturnToCenter", "Search", "Land")

    def enter(self, ctx):
        self.attempt = None
        ctx._confirm_ticks = 0
        hs = ctx.world.confirmed_hypotheses(ctx.position)
        if not hs:
            return
        h = hs[0]
        target = h.position
        d = target[:2] - ctx.position[:2]
        n = float(np.linalg.norm(d))
        self.direction = d / n if n > 0.1 else np.array([math.cos(ctx.uav.yaw), math.sin(ctx.uav.yaw)])
        self.uid = h.uid
        self.target = target
        self.phase = "approach"
        self.attempt = Attempt(h.uid, ctx.t, tuple(float(c) for c in target))
        ctx.attempts.append(self.attempt)

    def _points(self, ctx):
        prm = ctx.params
        z = self.target[2] + prm.approach_above
        ground = self.target[:2]
        approach = np.array([*(ground - prm.approach_behind * self.direction), z])
        exit_ = np.array([*(ground + prm.exit_beyond * self.direction), z])
        return approach, exit_

    def _refresh(self, ctx) -> bool:
        h = ctx.world.get(self.uid)
        if h is None:
            # a merge keeps the older identity; follow it if it sits where our target was
            near = [g for g in ctx.world.hypotheses if np.linalg.norm(g.position - self.target) < ctx.params.relink_radius]
            if not near:
                return False
            h = min(near, key=lambda g: np.linalg.norm(g.position - self.target))
            self.uid = h.uid
        if np.linalg.norm(h.position - self.target) > ctx.params.retarget_threshold:
            self.target = h.position
        return True

    def _finish(self, ctx, outcome):
        self.attempt.outcome = outcome
        self.attempt.end = ctx.t
        if outcome == "popped":
            ctx.popped += 1
        if ctx.done():
            return "Land"
        if ctx.params.strategy == "star":
            return "ReturnToCenter"
        if ctx.world.confirmed_hypotheses(ctx.position):
            return "Pop"
        return "Search"

    def execute(self, ctx):
        if self.attempt is None:
            return "Search"
        if self.phase != "exit" and not self._refresh(ctx):
            ctx.monitor.warning(f"attempt canceled, hypothesis {self.uid} lost")
            return self._finish(ctx, "canceled")
        approach, exit_ = self._points(ctx)
        if self.phase == "approach" and ctx.reached(approach):
            self.phase = "through"
        if self.phase == "through" and ground_distance(ctx.uav.position, self.target) <= ctx.params.pop_radius:
            ctx.world.remove(self.uid)
            ctx.monitor.warning(f"pop declared for hypothesis {self.uid}")
            self.attempt.outcome = "popped"
            if ctx.params.strategy == "direct":
                return self._finish(ctx, "popped")
            self.phase = "exit"
        if self.phase in ("through", "exit") and ctx.reached(exit_):
            return self._finish(ctx, "popped" if self.phase == "exit" else "missed")
        yaw = heading_to(ctx.uav.position, self.target, ctx.uav.yaw)
        ctx.command("Pop", approach if self.phase == "approach" else exit_, yaw=yaw, speed=ctx.params.search_speed)
        return None


class ReturnToCenter(State[BalloonContext]):
    successors = ("Pop", "Search", "Land")

    def execute(self, ctx):
        if ctx.done():
            return "Land"
        ready = ctx.target_ready()
        if ctx.reached(ctx.center):
            return "Pop" if ready else "Search"
        ctx.command("ReturnToCenter", ctx.center, speed=ctx.params.search_speed)
        return None


class Land(State[BalloonContext]):
    final = True

    def execute(self, ctx):
        p = ctx.uav.position
        ctx.command("Land", (p[0], p[1], ctx.fence.z_min), yaw=ctx.uav.yaw)
        return None


STATE_CLASSES = (Takeoff, Search, Pop, ReturnToCenter, Land)


def balloon_graph() -> StateGraph:
    return StateGraph.from_states(STATE_CLASSES, "Takeoff")


class BalloonMission:
    """Waypoint generator for the balloon hunt, driven once per control tick."""

    def __init__(self, params: MissionParams, arena: Rect, fence: Geofence, world: WorldModel,
                 monitor: Monitor | None = None):
        monitor = monitor or Monitor()
        self.ctx = BalloonContext(params, arena, fence, world, monitor, FencedOutput(fence, monitor))
        self.machine = Machine([cls() for cls in STATE_CLASSES], "Takeoff", monitor)

    @property
    def state(self) -> str | None:
        return self.machine.current

    @property
    def finished(self) -> bool:
        return self.machine.finished

    def tick(self, t: float, uav: VehicleState) -> Waypoint:
        self.ctx.t = t
        self.ctx.uav = uav
        self.machine.tick(self.ctx, t)
        return self.ctx.waypoint
