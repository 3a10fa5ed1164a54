"""Triple-integrator vehicle driven through the attitude-command interface."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..mpc import GRAVITY, AttitudeCommand
from ..traj_sync import VehicleState

ATTITUDE_MODES = ("ramp", "hold")


@dataclass(frozen=True)
class PlantParams:
    """``attitude_mode`` selects how tilt commands become acceleration.

    ``ramp`` moves the horizontal acceleration linearly from its current
    value to ``g·tan(tilt)`` over the tick (a first-order-hold attitude
    loop); ``hold`` jumps to it and keeps it constant.  ``climb_lag`` is the
    time constant of the vertical speed response.  With zero lag the climb
    rate reaches the command exactly at the end of the tick through a
    linearly ramped acceleration.
    """

    gravity: float = GRAVITY
    climb_lag: float = 0.15
    attitude_mode: str = "ramp"

    def __post_init__(self):
        if self.attitude_mode not in ATTITUDE_MODES:
            raise ValueError(f"attitude_mode must be one of {ATTITUDE_MODES}")
        if self.climb_lag < 0.0:
            raise ValueError("climb_lag must be non-negative")


IDEAL = PlantParams(climb_lag=0.0)


def _horizontal(p: float, v: float, a: float, a_cmd: float, dt: float, mode: str) -> tuple[float, float, float]:
    if mode == "hold":
        return p + v * dt + 0.5 * a_cmd * dt * dt, v + a_cmd * dt, a_cmd
    j = (a_cmd - a) / dt
    return (
        p + v * dt + a * dt * dt / 2.0 + j * dt**3 / 6.0,
        v + a * dt + j * dt * dt / 2.0,
        a_cmd,
    )


def _vertical(p: float, v: float, a: float, v_cmd: float, dt: float, tau: float) -> tuple[float, float, float]:
    if tau == 0.0:
        # ideal: acceleration ramps linearly so the climb rate hits the command at the end of the tick
        a_end = 2.0 * (v_cmd - v) / dt - a
        return p + v * dt + a * dt * dt / 2.0 + (a_end - a) * dt * dt / 6.0, v_cmd, a_end
    decay = math.exp(-dt / tau)
    gap = v - v_cmd
    return p + v_cmd * dt + gap * tau * (1.0 - decay), v_cmd + gap * decay, -gap * decay / tau


def step_plant(state: VehicleState, cmd: AttitudeCommand, dt: float, params: PlantParams = PlantParams()) -> VehicleState:
    """Advance the vehicle by ``dt`` under a constant attitude command."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    g = params.gravity
    x = _horizontal(state.position[0], state.velocity[0], state.acceleration[0], g * math.tan(cmd.pitch), dt,
                    params.attitude_mode)
    y = _horizontal(state.position[1], state.velocity[1], state.acceleration[1], g * math.tan(cmd.roll), dt,
                    params.attitude_mode)
    z = _vertical(state.position[2], state.velocity[2], state.acceleration[2], cmd.climb_rate, dt, params.climb_lag)
    return VehicleState(
        (x[0], y[0], z[0]),
        (x[1], y[1], z[1]),
        (x[2], y[2], z[2]),
        state.yaw + cmd.yaw_rate * dt,
    )
