"""Receding-horizon controller built on the synchronized time-optimal planner.

Every tick the plan from the current state to the target is (re)computed and
only its first move is used: the acceleration at ``t = tick`` becomes pitch
and roll, the vertical velocity at ``t = tick`` becomes the climb rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .traj1d import AxisState, MotionProfile, PlanningError, plan_fixed_time, plan_time_optimal, retime_if_cruising
from .traj_sync import AxisLimitSet, SyncPlan, VehicleState, plan_synchronized, yaw_rate

__all__ = ["AttitudeCommand", "Controller", "ControllerConfig", "VehicleState", "HOVER"]

GRAVITY = 9.81


@dataclass(frozen=True)
class AttitudeCommand:
    pitch: float = 0.0
    roll: float = 0.0
    climb_rate: float = 0.0
    yaw_rate: float = 0.0

    @property
    def is_hover(self) -> bool:
        return self.pitch == 0.0 and self.roll == 0.0 and self.climb_rate == 0.0


HOVER = AttitudeCommand()


@dataclass(frozen=True)
class ControllerConfig:
    limits: AxisLimitSet = field(default_factory=AxisLimitSet)
    tick: float = 0.02
    gravity: float = GRAVITY
    tilt_limit: float = math.radians(35.0)
    yaw_gain: float = 1.5
    yaw_rate_limit: float = 1.0
    # an axis this close to a stationary target is considered arrived
    goal_tolerance: float = 1e-3
    # drift between the cached plan and the measured state that forces a re-plan
    replan_tolerance: float = 1e-3
    # extra lookahead for the climb-rate sample, compensating a lagged climb response
    climb_lookahead: float = 0.0

    def __post_init__(self):
        if self.tick <= 0.0:
            raise ValueError("tick must be positive")
        if self.climb_lookahead < 0.0:
            raise ValueError("climb_lookahead must be non-negative")


def _close(a: AxisState, b: AxisState, tol: float) -> bool:
    return (
        abs(a.position - b.position) <= tol
        and abs(a.velocity - b.velocity) <= tol
        and abs(a.acceleration - b.acceleration) <= tol
    )


class Controller:
    """One controller per vehicle; not meant to be shared between threads.

    ``monitor`` may be any object with a ``warning(detail)`` method; planner
    failures are reported there and answered with a hover command.
    """

    def __init__(self, config: ControllerConfig | None = None, monitor=None):
        self.config = config or ControllerConfig()
        self.monitor = monitor
        self.plan: SyncPlan | None = None
        self._plan_target: VehicleState | None = None
        self._plan_limits: AxisLimitSet | None = None
        self.replans = 0

    def reset(self) -> None:
        self.plan = None
        self._plan_target = None

    def step(self, now: VehicleState, target: VehicleState, limits: AxisLimitSet | None = None) -> AttitudeCommand:
        cfg = self.config
        limits = limits or cfg.limits
        try:
            plan = self._update_plan(now, target, limits)
        except PlanningError as exc:
            self.reset()
            if self.monitor is not None:
                self.monitor.warning(f"planner: {exc}")
            return AttitudeCommand(yaw_rate=self._yaw(now, target))
        return self.command_from_plan(plan, now, target)

    def command_from_plan(self, plan: SyncPlan, now: VehicleState, target: VehicleState) -> AttitudeCommand:
        cfg = self.config
        x, y, _ = plan.sample(cfg.tick)
        z = plan.z.sample(cfg.tick + cfg.climb_lookahead)
        g = cfg.gravity
        pitch = math.atan2(x.acceleration, g)
        roll = math.atan2(y.acceleration, g)
        lim = cfg.tilt_limit
        pitch = min(max(pitch, -lim), lim)
        roll = min(max(roll, -lim), lim)
        zl = cfg.limits.z if self._plan_limits is None else self._plan_limits.z
        climb = min(max(z.velocity, zl.v_min), zl.v_max)
        return AttitudeCommand(pitch, roll, climb, self._yaw(now, target))

    def _yaw(self, now: VehicleState, target: VehicleState) -> float:
        cfg = self.config
        return yaw_rate(now.yaw, target.yaw, cfg.yaw_gain, cfg.yaw_rate_limit)

    # -- planning ---------------------------------------------------------

    def _snap(self, now: VehicleState, target: VehicleState) -> tuple[VehicleState, list[int]]:
        """Replace axes that already sit on a stationary target by the target itself."""
        tol = self.config.goal_tolerance
        pos, vel, acc = list(now.position), list(now.velocity), list(now.acceleration)
        snapped = []
        for i in range(3):
            goal = target.axis(i)
            if goal.velocity == 0.0 and goal.acceleration == 0.0 and _close(now.axis(i), goal, tol):
                pos[i], vel[i], acc[i] = goal.position, 0.0, 0.0
                snapped.append(i)
        return VehicleState(tuple(pos), tuple(vel), tuple(acc), now.yaw), snapped

    def _update_plan(self, now: VehicleState, target: VehicleState, limits: AxisLimitSet) -> SyncPlan:
        now, snapped = self._snap(now, target)
        plan = self._follow(now, target, limits)
        hold = {i: MotionProfile(target.axis(i)) for i in snapped}
        if any(plan.profiles[i] != hold[i] for i in snapped):
            # arrived axes hold exactly, free of rounding left in the cached plan
            profiles = [hold.get(i, p) for i, p in enumerate(plan.profiles)]
            plan = self.plan = SyncPlan(*profiles, plan.arrival_time)
        return plan

    def _follow(self, now: VehicleState, target: VehicleState, limits: AxisLimitSet) -> SyncPlan:
        cfg = self.config
        same_goal = (
            self.plan is not None
            and self._plan_limits == limits
            and self._plan_target is not None
            and self._plan_target.position == target.position
            and self._plan_target.velocity == target.velocity
            and self._plan_target.acceleration == target.acceleration
        )
        if not same_goal:
            return self._replan(now, target, limits)
        predicted = self.plan.shifted(cfg.tick)
        drifted = [i for i in range(3) if not _close(predicted.profiles[i].initial, now.axis(i), cfg.replan_tolerance)]
        if not drifted:
            self.plan = predicted
            return predicted
        # only the drifted axes need new profiles as long as they can still make the arrival time
        remaining = predicted.arrival_time
        profiles = list(predicted.profiles)
        for i in drifted:
            quick = retime_if_cruising(now.axis(i), target.axis(i), limits[i], remaining)
            if quick is not None:
                profiles[i] = quick
                continue
            fastest = plan_time_optimal(now.axis(i), target.axis(i), limits[i])
            if fastest.duration > remaining + 1e-9:
                return self._replan(now, target, limits)
            if remaining - fastest.duration <= 1e-9:
                profiles[i] = fastest
            else:
                profiles[i] = plan_fixed_time(fastest.initial, target.axis(i), limits[i], remaining, fastest=fastest)
        self.plan = SyncPlan(*profiles, remaining)
        return self.plan

    def _replan(self, now: VehicleState, target: VehicleState, limits: AxisLimitSet) -> SyncPlan:
        self.plan = plan_synchronized(now, target, limits)
        self._plan_target = target
        self._plan_limits = limits
        self.replans += 1
        return self.plan


def step(now: VehicleState, target: VehicleState, limits: AxisLimitSet | None = None, tick: float = 0.02,
         **config) -> AttitudeCommand:
    """Stateless single tick: plan from ``now`` to ``target`` and return the first command."""
    cfg = ControllerConfig(limits=limits or AxisLimitSet(), tick=tick, **config)
    return Controller(cfg).step(now, target)
