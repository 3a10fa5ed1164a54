"""Three-axis synchronization of 1D profiles and proportional yaw control."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .traj1d import (
    TABLE1_XY,
    TABLE1_Z,
    AxisLimits,
    AxisState,
    MotionProfile,
    TimeTooShort,
    plan_fixed_time,
    plan_time_optimal,
)

AXES = ("x", "y", "z")


@dataclass(frozen=True)
class VehicleState:
    """Allocentric (p, v, a) per axis plus heading."""

    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    acceleration: tuple[float, float, float] = (0.0, 0.0, 0.0)
    yaw: float = 0.0

    def __post_init__(self):
        vals = (*self.position, *self.velocity, *self.acceleration, self.yaw)
        if len(vals) != 10 or not all(map(math.isfinite, vals)):
            raise ValueError(f"vehicle state must hold finite 3-vectors, got {self}")
        if not -math.pi < self.yaw <= math.pi:
            object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    def axis(self, i: int) -> AxisState:
        return AxisState(self.position[i], self.velocity[i], self.acceleration[i])

    @classmethod
    def at(cls, x: float, y: float, z: float, yaw: float = 0.0) -> "VehicleState":
        return cls((x, y, z), yaw=yaw)

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)


@dataclass(frozen=True)
class AxisLimitSet:
    x: AxisLimits = TABLE1_XY
    y: AxisLimits = TABLE1_XY
    z: AxisLimits = TABLE1_Z

    def __getitem__(self, i: int) -> AxisLimits:
        return (self.x, self.y, self.z)[i]

    @classmethod
    def horizontal_vertical(cls, xy: AxisLimits, z: AxisLimits) -> "AxisLimitSet":
        return cls(xy, xy, z)


@dataclass(frozen=True)
class SyncPlan:
    x: MotionProfile
    y: MotionProfile
    z: MotionProfile
    arrival_time: float

    @property
    def profiles(self) -> tuple[MotionProfile, MotionProfile, MotionProfile]:
        return (self.x, self.y, self.z)

    @property
    def clamped(self) -> bool:
        return any(p.clamped for p in self.profiles)

    def sample(self, t: float) -> tuple[AxisState, AxisState, AxisState]:
        return tuple(p.sample(t) for p in self.profiles)

    def shifted(self, dt: float) -> "SyncPlan":
        return SyncPlan(*(p.shifted(dt) for p in self.profiles), max(self.arrival_time - dt, 0.0))


def plan_synchronized(start: VehicleState, goal: VehicleState, limits: AxisLimitSet = AxisLimitSet()) -> SyncPlan:
    """Plan x, y and z so that all three arrive together.

    The slowest axis keeps its time-optimal profile; the others are re-timed
    to the same arrival time, which keeps the flight path close to a straight
    line.  An axis that already rests on its goal keeps an empty profile.
    Yaw is not part of the plan.

    A moving goal can make some arrival times unreachable for an axis even
    though earlier and later ones work.  When the common arrival time falls
    into such a gap, it is moved to the first time every axis can meet.
    """
    fastest = [plan_time_optimal(start.axis(i), goal.axis(i), limits[i]) for i in range(3)]
    arrival = max(p.duration for p in fastest)
    while True:
        out = []
        for i, prof in enumerate(fastest):
            # an axis already resting on its goal stays empty instead of holding for the arrival time
            if arrival - prof.duration <= 1e-9 or (prof.is_empty and _at_rest(goal.axis(i))):
                out.append(prof)
                continue
            try:
                out.append(plan_fixed_time(prof.initial, goal.axis(i), limits[i], arrival, fastest=prof))
            except TimeTooShort:
                arrival = _gap_end(prof, goal.axis(i), limits[i], arrival)
                break
        else:
            return SyncPlan(*out, arrival)


def _gap_end(fastest: MotionProfile, goal: AxisState, lim: AxisLimits, T: float, horizon: float = 60.0,
             tol: float = 1e-4) -> float:
    """First time after ``T`` at which the axis can arrive exactly, found to within ``tol``."""
    lo, step = T, max(0.05, 0.05 * T)
    while not _feasible(fastest, goal, lim, lo + step):
        if step > horizon:
            raise TimeTooShort(f"no arrival time within {horizon:.0f} s after {T:.6f} s")
        lo, step = lo + step, 2.0 * step
    hi = lo + step
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if _feasible(fastest, goal, lim, mid) else (mid, hi)
    return hi


def _feasible(fastest: MotionProfile, goal: AxisState, lim: AxisLimits, T: float) -> bool:
    try:
        plan_fixed_time(fastest.initial, goal, lim, T, fastest=fastest)
    except TimeTooShort:
        return False
    return True


def _at_rest(s: AxisState) -> bool:
    return s.velocity == 0.0 and s.acceleration == 0.0


def wrap_angle(angle: float) -> float:
    """Map an angle to (-pi, pi]; an exact -pi maps to +pi."""
    wrapped = math.remainder(angle, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def yaw_rate(current_yaw: float, target_yaw: float, gain: float = 1.5, max_rate: float = 1.0) -> float:
    """Proportional heading control on the wrapped error, clamped to ``max_rate``."""
    if gain <= 0.0:
        raise ValueError("yaw gain must be positive")
    rate = gain * wrap_angle(target_yaw - current_yaw)
    return min(max(rate, -max_rate), max_rate)
